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

// The normal-regime football MDP: solving, persisted utility tables and
// queries against them.

#ifndef DRIVEOPT_FOOTBALL_H_
#define DRIVEOPT_FOOTBALL_H_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "driveopt/solver.h"
#include "driveopt/statespace.h"
#include "driveopt/transitions.h"

namespace driveopt {

inline constexpr char kUtilitySchema[] = "driveopt.utility/1";

struct UtilityTable {
  int max_dist = kDefaultMaxDist;
  double theta = 0.0;
  int sweeps = 0;
  double final_delta = 0.0;
  bool converged = false;
  std::vector<double> delta_trace;
  std::string transitions_hash;

  // By state index.
  std::vector<double> utility;
  // Action as int, -1 where no action is available.
  std::vector<int> policy;
  // Value of each scrimmage action (RUN, PASS, FG, PUNT) at the solution.
  std::vector<std::array<std::optional<double>, kNumScrimmageActions>>
      action_values;
  // Defense first down at los j + 1, from the defense's side.
  std::vector<double> semi_utility;

  std::string Serialize() const;
  static absl::StatusOr<UtilityTable> Deserialize(const std::string& text);
  absl::Status Save(const std::string& path) const;
  static absl::StatusOr<UtilityTable> Load(const std::string& path);
};

// Semi-ordered value iteration over the table's MDP.
absl::StatusOr<UtilityTable> SolveFootball(const StateSpace& space,
                                           const TransitionTable& table,
                                           const SolveOptions& options);

struct Recommendation {
  GameState state;
  std::optional<Action> action;
  double utility = 0.0;
  std::array<std::optional<double>, kNumScrimmageActions> values;
};

absl::StatusOr<Recommendation> Recommend(const StateSpace& space,
                                         const UtilityTable& table,
                                         const GameState& state);

// Utility of the successor reached by each physically possible gain, keyed by
// the resulting los in the offense's coordinates (0 = touchdown, 100 =
// safety).
struct CurvePoint {
  int resulting_los = 0;
  int gain = 0;
  std::string successor;
  double utility = 0.0;
};

absl::StatusOr<std::vector<CurvePoint>> UtilityCurve(const StateSpace& space,
                                                     const UtilityTable& table,
                                                     const GameState& state);

// Offense-side utility of a successor under `table`.
double SuccessorUtility(const StateSpace& space, const UtilityTable& table,
                        const Successor& successor);

// Formats with four decimals.
std::string Fixed4(double x);

}  // namespace driveopt

#endif  // DRIVEOPT_FOOTBALL_H_
