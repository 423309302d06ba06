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

// Undiscounted MDP solvers over a generic instance description.
//
// An instance has intermediate states 0..n-1, terminal states with fixed
// utilities, and optionally semi-terminal states. A semi-terminal j stands for
// the opponent taking over in intermediate state mirror[j]; it enters a row
// with utility -U(mirror[j]).

#ifndef DRIVEOPT_SOLVER_H_
#define DRIVEOPT_SOLVER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace driveopt {

struct Outcome {
  enum class Kind : uint8_t { kTerminal, kState, kSemi };
  Kind kind = Kind::kState;
  int32_t index = 0;
  double probability = 0.0;
};

struct MdpAction {
  // Reported in policies; actions are listed in tie-break order.
  int label = 0;
  std::vector<Outcome> outcomes;
};

struct MdpInstance {
  int num_states = 0;
  std::vector<double> terminal_utility;
  std::vector<int> semi_mirror;
  // actions[s] for each intermediate state s.
  std::vector<std::vector<MdpAction>> actions;

  absl::Status Validate(double tolerance = 1e-9) const;
};

struct SolveResult {
  std::vector<double> utility;
  // Semi-terminal utilities from the opponent's side, i.e. U(mirror).
  std::vector<double> semi_utility;
  // Label of the greedy action, -1 for states without a usable action.
  std::vector<int> policy;
  int sweeps = 0;
  double final_delta = 0.0;
  double theta = 0.0;
  bool converged = false;
  std::vector<double> delta_trace;
  // States where every action self-transitions with probability one.
  std::vector<int> unsolvable;
};

struct SolveOptions {
  double theta = 1e-6;
  int max_sweeps = 500;
  // Optional starting utilities; zeros when empty.
  std::vector<double> initial;
};

// Gauss-Seidel value iteration with self-transition elimination. Semi-terminal
// references read the live utility of their mirror state.
absl::StatusOr<SolveResult> SolveValueIteration(const MdpInstance& instance,
                                                const SolveOptions& options);

// One backward sweep in topological order. Fails with the offending cycle when
// the instance has a self-transition, a cycle, or semi-terminals.
absl::StatusOr<SolveResult> SolveOrdered(const MdpInstance& instance);

// Ordered sweeps over the intermediate states with semi-terminal utilities
// held fixed, alternated with self-eliminating updates of the semi-terminal
// utilities, until the summed squared change of a sweep drops below theta.
absl::StatusOr<SolveResult> SolveSemiOrdered(const MdpInstance& instance,
                                             const SolveOptions& options);

// Value of action `a` at state `s` under `utility` (and `semi_utility` when
// non-null; otherwise semi-terminals read the mirror states' utilities),
// with self-references eliminated. Returns false when the action cannot
// leave the state.
bool ActionValue(const MdpInstance& instance, int s, const MdpAction& a,
                 const std::vector<double>& utility,
                 const std::vector<double>* semi_utility, double* value);

// Greedy action index (into instance.actions[s]); ties go to the earliest.
int GreedyAction(const MdpInstance& instance, int s,
                 const std::vector<double>& utility,
                 const std::vector<double>* semi_utility, double* value);

// Topological order of intermediate states, children first; self-transitions
// count as cycles. Returns the cycle as a state sequence on failure.
absl::StatusOr<std::vector<int>> TopologicalOrder(const MdpInstance& instance,
                                                  std::vector<int>* cycle);

// DFS post-order over state-to-state edges: exact topological order when one
// exists, otherwise a good Gauss-Seidel order for the few back edges.
std::vector<int> PostOrder(const MdpInstance& instance);

// Three intermediate states with actions P and Q and terminals WIN (3) and
// LOSE (0).
MdpInstance FiveStateInstance();
std::string FiveStateActionName(int label);

}  // namespace driveopt

#endif  // DRIVEOPT_SOLVER_H_
