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

// Transition rows P(s* | s, a) over the 202-slot successor universe.

#ifndef DRIVEOPT_TRANSITIONS_H_
#define DRIVEOPT_TRANSITIONS_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "driveopt/models.h"
#include "driveopt/solver.h"
#include "driveopt/statespace.h"

namespace driveopt {

struct TransitionEntry {
  Successor successor;
  double probability = 0.0;
};

struct TransitionRow {
  GameState state;
  Action action = Action::kRun;
  // Sorted by successor slot; at most one entry per slot.
  std::vector<TransitionEntry> entries;

  double Total() const;
};

struct TransitionOptions {
  // Entries below this are dropped before renormalizing.
  double prune = 1e-12;
};

// Unavailable models yield kNotFound; the action is then omitted.
absl::StatusOr<TransitionRow> BuildRow(const StateSpace& space,
                                       const ModelStore& store,
                                       const GameState& state, Action action,
                                       const TransitionOptions& options = {});

struct TransitionTable {
  int max_dist = kDefaultMaxDist;
  std::string store_hash;
  // Rows in state index order, actions in RUN, PASS, FG, PUNT order.
  std::vector<TransitionRow> rows;
  // First row of each state in `rows`; size num_states + 1.
  std::vector<int> offsets;
  std::vector<std::string> report;

  absl::Status Save(const std::string& path) const;
  static absl::StatusOr<TransitionTable> Load(const std::string& path);
  std::string Serialize() const;
  static absl::StatusOr<TransitionTable> Deserialize(const std::string& text);
};

TransitionTable BuildAll(const StateSpace& space, const ModelStore& store,
                         const TransitionOptions& options = {}, int jobs = 1);

// The offense's successor when `row`'s action lands in `slot`.
absl::StatusOr<Successor> SuccessorForSlot(const StateSpace& space,
                                           const GameState& state,
                                           Action action, int slot);

inline constexpr char kTransitionSchema[] = "driveopt.transitions/1";

// Football MDP: intermediate states are the state space, terminals are the
// four scoring outcomes with their point values, and semi-terminal j is the
// defense's first down at los j + 1.
MdpInstance ToMdp(const StateSpace& space, const TransitionTable& table);

}  // namespace driveopt

#endif  // DRIVEOPT_TRANSITIONS_H_
