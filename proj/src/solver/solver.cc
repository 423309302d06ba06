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

#include "driveopt/solver.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace driveopt {
namespace {

constexpr double kMinEscape = 1e-12;

// Semi-terminal references read `semi` when given, otherwise the live utility
// of their mirror state. With `eliminate_semi_self`, a semi-terminal that
// mirrors `s` itself is folded into the denominator even when `semi` is given.
bool EvalAction(const MdpInstance& m, int s, const MdpAction& a,
                const std::vector<double>& u, const std::vector<double>* semi,
                bool eliminate_semi_self, double* value) {
  double num = 0.0;
  double self = 0.0;
  for (const Outcome& o : a.outcomes) {
    switch (o.kind) {
      case Outcome::Kind::kTerminal:
        num += o.probability * m.terminal_utility[o.index];
        break;
      case Outcome::Kind::kState:
        if (o.index == s) {
          self += o.probability;
        } else {
          num += o.probability * u[o.index];
        }
        break;
      case Outcome::Kind::kSemi: {
        const int mirror = m.semi_mirror[o.index];
        if (mirror == s && (semi == nullptr || eliminate_semi_self)) {
          self -= o.probability;
        } else if (semi != nullptr) {
          num -= o.probability * (*semi)[o.index];
        } else {
          num -= o.probability * u[mirror];
        }
        break;
      }
    }
  }
  const double denom = 1.0 - self;
  if (denom <= kMinEscape) return false;
  *value = num / denom;
  return true;
}

int Greedy(const MdpInstance& m, int s, const std::vector<double>& u,
           const std::vector<double>* semi, bool eliminate_semi_self,
           double* value) {
  int best = -1;
  double best_value = -std::numeric_limits<double>::infinity();
  const auto& actions = m.actions[s];
  for (int i = 0; i < static_cast<int>(actions.size()); ++i) {
    double v;
    if (!EvalAction(m, s, actions[i], u, semi, eliminate_semi_self, &v)) {
      continue;
    }
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best >= 0) *value = best_value;
  return best;
}

void FillPolicy(const MdpInstance& m, const std::vector<double>* semi,
                SolveResult* r) {
  r->policy.assign(m.num_states, -1);
  for (int s = 0; s < m.num_states; ++s) {
    double v;
    const int g = Greedy(m, s, r->utility, semi, false, &v);
    if (g >= 0) r->policy[s] = m.actions[s][g].label;
  }
}

std::vector<int> Unsolvable(const MdpInstance& m, const std::vector<double>& u,
                            const std::vector<double>* semi) {
  std::vector<int> out;
  for (int s = 0; s < m.num_states; ++s) {
    double v;
    if (Greedy(m, s, u, semi, false, &v) < 0) out.push_back(s);
  }
  return out;
}

// Iterative three-colour DFS over state-to-state edges. Visits roots in index
// order and children in row order so the result is deterministic.
std::vector<int> Dfs(const MdpInstance& m, bool include_semi,
                     std::vector<int>* cycle) {
  enum Colour : uint8_t { kWhite, kGrey, kBlack };
  std::vector<Colour> colour(m.num_states, kWhite);
  std::vector<int> order;
  order.reserve(m.num_states);
  std::vector<std::vector<int>> children(m.num_states);
  for (int s = 0; s < m.num_states; ++s) {
    for (const MdpAction& a : m.actions[s]) {
      for (const Outcome& o : a.outcomes) {
        if (o.probability <= 0) continue;
        if (o.kind == Outcome::Kind::kState) {
          children[s].push_back(o.index);
        } else if (include_semi && o.kind == Outcome::Kind::kSemi) {
          children[s].push_back(m.semi_mirror[o.index]);
        }
      }
    }
    std::sort(children[s].begin(), children[s].end());
    children[s].erase(std::unique(children[s].begin(), children[s].end()),
                      children[s].end());
  }
  std::vector<std::pair<int, size_t>> stack;
  for (int root = 0; root < m.num_states; ++root) {
    if (colour[root] != kWhite) continue;
    stack.emplace_back(root, 0);
    colour[root] = kGrey;
    while (!stack.empty()) {
      auto& [s, next] = stack.back();
      if (next < children[s].size()) {
        const int c = children[s][next++];
        if (colour[c] == kWhite) {
          colour[c] = kGrey;
          stack.emplace_back(c, 0);
        } else if (colour[c] == kGrey && cycle != nullptr && cycle->empty()) {
          auto it = std::find_if(stack.begin(), stack.end(),
                                 [c](const auto& f) { return f.first == c; });
          for (; it != stack.end(); ++it) cycle->push_back(it->first);
          cycle->push_back(c);
        }
      } else {
        colour[s] = kBlack;
        order.push_back(s);
        stack.pop_back();
      }
    }
  }
  return order;
}

}  // namespace

absl::Status MdpInstance::Validate(double tolerance) const {
  if (static_cast<int>(actions.size()) != num_states) {
    return absl::InvalidArgumentError("actions must cover every state");
  }
  for (int j = 0; j < static_cast<int>(semi_mirror.size()); ++j) {
    if (semi_mirror[j] < 0 || semi_mirror[j] >= num_states) {
      return absl::InvalidArgumentError(
          absl::StrCat("semi-terminal ", j, " mirrors no state"));
    }
  }
  for (int s = 0; s < num_states; ++s) {
    for (const MdpAction& a : actions[s]) {
      double total = 0.0;
      for (const Outcome& o : a.outcomes) {
        size_t bound = 0;
        switch (o.kind) {
          case Outcome::Kind::kTerminal:
            bound = terminal_utility.size();
            break;
          case Outcome::Kind::kState:
            bound = num_states;
            break;
          case Outcome::Kind::kSemi:
            bound = semi_mirror.size();
            break;
        }
        if (o.index < 0 || static_cast<size_t>(o.index) >= bound) {
          return absl::InvalidArgumentError(
              absl::StrCat("state ", s, " action ", a.label,
                           ": successor index out of range"));
        }
        if (!(o.probability >= 0.0)) {
          return absl::InvalidArgumentError(absl::StrCat(
              "state ", s, " action ", a.label, ": negative probability"));
        }
        total += o.probability;
      }
      if (std::abs(total - 1.0) > tolerance) {
        return absl::InvalidArgumentError(absl::StrCat(
            "state ", s, " action ", a.label, ": row sums to ", total));
      }
    }
  }
  return absl::OkStatus();
}

bool ActionValue(const MdpInstance& instance, int s, const MdpAction& a,
                 const std::vector<double>& utility,
                 const std::vector<double>* semi_utility, double* value) {
  return EvalAction(instance, s, a, utility, semi_utility, false, value);
}

int GreedyAction(const MdpInstance& instance, int s,
                 const std::vector<double>& utility,
                 const std::vector<double>* semi_utility, double* value) {
  return Greedy(instance, s, utility, semi_utility, false, value);
}

absl::StatusOr<std::vector<int>> TopologicalOrder(const MdpInstance& instance,
                                                  std::vector<int>* cycle) {
  std::vector<int> witness;
  std::vector<int> order = Dfs(instance, true, &witness);
  if (!witness.empty()) {
    if (cycle != nullptr) *cycle = witness;
    return absl::FailedPreconditionError(
        absl::StrCat("instance is not ordered; cycle through states ",
                     absl::StrJoin(witness, " -> ")));
  }
  return order;
}

std::vector<int> PostOrder(const MdpInstance& instance) {
  return Dfs(instance, false, nullptr);
}

absl::StatusOr<SolveResult> SolveValueIteration(const MdpInstance& instance,
                                                const SolveOptions& options) {
  if (!(options.theta > 0)) {
    return absl::InvalidArgumentError("theta must be positive");
  }
  SolveResult r;
  r.theta = options.theta;
  r.utility = options.initial.empty()
                  ? std::vector<double>(instance.num_states, 0.0)
                  : options.initial;
  if (static_cast<int>(r.utility.size()) != instance.num_states) {
    return absl::InvalidArgumentError("initial utilities have the wrong size");
  }
  r.unsolvable = Unsolvable(instance, r.utility, nullptr);
  for (int s : r.unsolvable) r.utility[s] = 0.0;
  if (instance.num_states == 0) {
    r.converged = true;
    return r;
  }
  while (r.sweeps < options.max_sweeps) {
    double delta = 0.0;
    for (int s = 0; s < instance.num_states; ++s) {
      double v;
      if (Greedy(instance, s, r.utility, nullptr, false, &v) < 0) continue;
      delta += (v - r.utility[s]) * (v - r.utility[s]);
      r.utility[s] = v;
    }
    ++r.sweeps;
    r.delta_trace.push_back(delta);
    r.final_delta = delta;
    if (delta < options.theta) {
      r.converged = true;
      break;
    }
  }
  FillPolicy(instance, nullptr, &r);
  r.semi_utility.resize(instance.semi_mirror.size());
  for (size_t j = 0; j < instance.semi_mirror.size(); ++j) {
    r.semi_utility[j] = r.utility[instance.semi_mirror[j]];
  }
  return r;
}

absl::StatusOr<SolveResult> SolveOrdered(const MdpInstance& instance) {
  if (!instance.semi_mirror.empty()) {
    return absl::FailedPreconditionError(
        "ordered solve does not accept semi-terminal states");
  }
  auto order = TopologicalOrder(instance, nullptr);
  if (!order.ok()) return order.status();
  SolveResult r;
  r.utility.assign(instance.num_states, 0.0);
  for (int s : *order) {
    double v;
    if (Greedy(instance, s, r.utility, nullptr, false, &v) < 0) {
      r.unsolvable.push_back(s);
      continue;
    }
    r.utility[s] = v;
  }
  std::sort(r.unsolvable.begin(), r.unsolvable.end());
  r.sweeps = 1;
  r.converged = true;
  FillPolicy(instance, nullptr, &r);
  return r;
}

absl::StatusOr<SolveResult> SolveSemiOrdered(const MdpInstance& instance,
                                             const SolveOptions& options) {
  if (!(options.theta > 0)) {
    return absl::InvalidArgumentError("theta must be positive");
  }
  SolveResult r;
  r.theta = options.theta;
  r.utility = options.initial.empty()
                  ? std::vector<double>(instance.num_states, 0.0)
                  : options.initial;
  if (static_cast<int>(r.utility.size()) != instance.num_states) {
    return absl::InvalidArgumentError("initial utilities have the wrong size");
  }
  r.semi_utility.assign(instance.semi_mirror.size(), 0.0);
  r.unsolvable = Unsolvable(instance, r.utility, &r.semi_utility);
  const std::vector<int> order = PostOrder(instance);
  while (r.sweeps < options.max_sweeps) {
    double delta = 0.0;
    for (int s : order) {
      double v;
      if (Greedy(instance, s, r.utility, &r.semi_utility, false, &v) < 0) {
        continue;
      }
      delta += (v - r.utility[s]) * (v - r.utility[s]);
      r.utility[s] = v;
    }
    for (size_t j = 0; j < instance.semi_mirror.size(); ++j) {
      double v;
      if (Greedy(instance, instance.semi_mirror[j], r.utility, &r.semi_utility,
                 true, &v) < 0) {
        continue;
      }
      delta += (v - r.semi_utility[j]) * (v - r.semi_utility[j]);
      r.semi_utility[j] = v;
    }
    ++r.sweeps;
    r.delta_trace.push_back(delta);
    r.final_delta = delta;
    if (delta < options.theta) {
      r.converged = true;
      break;
    }
  }
  FillPolicy(instance, &r.semi_utility, &r);
  return r;
}

MdpInstance FiveStateInstance() {
  constexpr int kWin = 0;
  constexpr int kLose = 1;
  // {to state 0, 1, 2, WIN, LOSE} for actions P and Q.
  const double rows[3][2][5] = {
      {{0.30, 0.15, 0.10, 0.40, 0.05}, {0.50, 0.05, 0.25, 0.15, 0.05}},
      {{0.15, 0.30, 0.15, 0.25, 0.15}, {0.15, 0.50, 0.15, 0.10, 0.10}},
      {{0.15, 0.15, 0.30, 0.10, 0.30}, {0.25, 0.05, 0.50, 0.05, 0.15}},
  };
  MdpInstance m;
  m.num_states = 3;
  m.terminal_utility = {3.0, 0.0};
  m.actions.resize(3);
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 2; ++a) {
      MdpAction action;
      action.label = a;
      for (int t = 0; t < 3; ++t) {
        action.outcomes.push_back({Outcome::Kind::kState, t, rows[s][a][t]});
      }
      action.outcomes.push_back(
          {Outcome::Kind::kTerminal, kWin, rows[s][a][3]});
      action.outcomes.push_back(
          {Outcome::Kind::kTerminal, kLose, rows[s][a][4]});
      m.actions[s].push_back(std::move(action));
    }
  }
  return m;
}

std::string FiveStateActionName(int label) { return label == 0 ? "P" : "Q"; }

}  // namespace driveopt
