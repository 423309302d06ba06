// Copyright 2026 The DriveOpt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Late-game win utilities. States carry the score differential and seconds
// remaining; the game ends at time zero with utility 1, 0.5 or 0 by the sign
// of the differential. Utilities are computed on demand by a bounded
// lookahead over a persisted memo store.

#ifndef DRIVEOPT_LATEGAME_H_
#define DRIVEOPT_LATEGAME_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/statusor.h"
#include "driveopt/config.h"
#include "driveopt/models.h"
#include "driveopt/statespace.h"
#include "driveopt/transitions.h"

namespace driveopt {

// Scrimmage: the offense snaps at `base`. ExtraPoint: the team that just
// scored a touchdown attempts a try. Kickoff: the team to move kicks off.
// sd is always from the perspective of the team to move.
enum class Phase : uint8_t { kScrimmage = 0, kKickoff, kExtraPoint };

std::string_view PhaseName(Phase phase);
std::optional<Phase> ParsePhase(std::string_view name);

struct LateGameState {
  GameState base;
  int sd = 0;
  int time = 0;
  Phase phase = Phase::kScrimmage;

  friend bool operator==(const LateGameState&, const LateGameState&) = default;
};

std::string ToString(const LateGameState& s);

enum class LateAction : int8_t {
  kRun = 0,
  kPass,
  kFieldGoal,
  kPunt,
  kExtraPoint,
  kTwoPoint,
  kKickoff,
};

std::string_view LateActionName(LateAction action);

// 1, 0.5 or 0 by the sign of sd.
double TerminalWinUtility(int sd);

struct LateEntry {
  double utility = 0.0;
  // -1 when no action applies.
  int8_t action = -1;
  // Computed without any heuristic leaf below it.
  bool exact = false;
};

inline constexpr char kLateGameSchema[] = "driveopt.lategame/1";

// Memo of solved late-game states, keyed by the packed state.
class LateGameStore {
 public:
  static uint64_t Key(const LateGameState& s);
  static LateGameState Unpack(uint64_t key);

  const LateEntry* Find(const LateGameState& s) const;
  void Put(const LateGameState& s, const LateEntry& entry);
  size_t size() const { return entries_.size(); }

  // Incremented by every save.
  int64_t version = 0;
  std::string models_hash;
  std::string transitions_hash;

  std::string Serialize() const;
  static absl::StatusOr<LateGameStore> Deserialize(const std::string& text);
  absl::Status Save(const std::string& path);
  static absl::StatusOr<LateGameStore> Load(const std::string& path);

 private:
  absl::flat_hash_map<uint64_t, LateEntry> entries_;
};

struct LateGameResult {
  LateGameState state;
  bool terminal = false;
  std::optional<LateAction> action;
  double utility = 0.0;
  std::vector<std::pair<LateAction, double>> values;
  // False when the node budget cut the lookahead short.
  bool converged = false;
  // No heuristic leaf influenced the utility.
  bool exact = false;
  int nodes_expanded = 0;
  int64_t store_version = 0;
};

struct LateSolveLimits {
  int node_budget = 400;
  int depth = 2;
};

class LateGameSolver {
 public:
  // All references must outlive the solver.
  LateGameSolver(const StateSpace& space, const TransitionTable& transitions,
                 const ModelStore& models, const LateGameConfig& config);

  absl::Status Validate(const LateGameState& s) const;

  // Refreshes the query state and, within the limits, its successors, writing
  // every expanded state to `store`.
  absl::StatusOr<LateGameResult> Solve(const LateGameState& s,
                                       LateGameStore* store,
                                       const LateSolveLimits& limits);

  // Cold-start utility: a normal approximation to the final margin whose
  // spread grows with the time remaining. Above 1/2 exactly when sd > 0.
  double Heuristic(const LateGameState& s) const;

  // Elapsed-time draws as (seconds, weight) for one play family.
  const std::vector<std::pair<int, double>>& TimeDraws(TimeFamily family,
                                                       int sd,
                                                       bool fourth_down) const;

  int ClampSd(int sd) const;

 private:
  struct Search;
  double Value(Search& search, const LateGameState& s, int depth, bool* exact);
  LateEntry Expand(Search& search, const LateGameState& s, int depth,
                   std::vector<std::pair<LateAction, double>>* values,
                   bool* exact);
  double SuccessorValue(Search& search, const Successor& successor, int sd,
                        int time, int depth, bool* exact);

  const StateSpace& space_;
  const TransitionTable& transitions_;
  const ModelStore& models_;
  LateGameConfig config_;
  std::map<TimeKey, std::vector<std::pair<int, double>>> draws_;
};

}  // namespace driveopt

#endif  // DRIVEOPT_LATEGAME_H_
