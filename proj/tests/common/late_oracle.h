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

// Exact late-game win probabilities by direct recursion, independent of the
// solver, over the shared test fixtures.

#ifndef DRIVEOPT_TESTS_COMMON_LATE_ORACLE_H_
#define DRIVEOPT_TESTS_COMMON_LATE_ORACLE_H_

#include <algorithm>
#include <climits>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "driveopt/lategame.h"
#include "driveopt/transitions.h"
#include "fixture.h"

namespace driveopt::testing {

struct World {
  explicit World(const ModelStore& store)
      : models(store),
        space(store.max_dist),
        transitions(BuildAll(space, store)) {}
  const ModelStore& models;
  StateSpace space;
  TransitionTable transitions;
};

inline const World& Frozen() {
  static const World* w = new World(FrozenLateStore());
  return *w;
}

inline const World& Fitted() {
  static const World* w = new World(SmallStore());
  return *w;
}

inline constexpr LateSolveLimits kExhaustive{INT_MAX, 1 << 20};

// Exact win probabilities by direct recursion over the game tree.
class Oracle {
 public:
  explicit Oracle(const World& w) : w_(w) {}

  double Scrimmage(const GameState& b, int sd, int t) {
    if (t == 0) return End(sd);
    const uint64_t key = Pack(0, b.down, b.dist, b.los, sd, t);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const int i = w_.space.IndexOf(b);
    double best = -1;
    for (int r = w_.transitions.offsets[i]; r < w_.transitions.offsets[i + 1];
         ++r) {
      const TransitionRow& row = w_.transitions.rows[r];
      double v = 0;
      for (const auto& [secs, share] : Draws(TimeFamilyOf(row.action))) {
        const int next = std::max(0, t - secs);
        for (const auto& e : row.entries) {
          v += share * e.probability * Outcome(e.successor, sd, next);
        }
      }
      best = std::max(best, v);
    }
    memo_[key] = best;
    return best;
  }

  double Kick(int sd, int t) {
    if (t == 0) return End(sd);
    const uint64_t key = Pack(1, 0, 0, 0, sd, t);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    double v = 0;
    const IntMass& m = w_.models.kickoff.receive_mass;
    for (const auto& [secs, share] : Draws(TimeFamily::kKickoff)) {
      const int next = std::max(0, t - secs);
      for (int r = m.lo(); r <= m.hi(); ++r) {
        if (m.at(r) <= 0) continue;
        const double receiver =
            r == 0
                ? Try(Clamp(-sd + 6), next)
                : Scrimmage(GameState{1, std::min(10, r), r}, Clamp(-sd), next);
        v += share * m.at(r) * (1 - receiver);
      }
    }
    memo_[key] = v;
    return v;
  }

  double Try(int sd, int t) {
    const double stay = Kick(sd, t);
    return std::max(0.90 * Kick(Clamp(sd + 1), t) + 0.10 * stay,
                    0.45 * Kick(Clamp(sd + 2), t) + 0.55 * stay);
  }

 private:
  static double End(int sd) { return sd > 0 ? 1.0 : sd == 0 ? 0.5 : 0.0; }
  static int Clamp(int sd) { return std::clamp(sd, -30, 30); }
  static uint64_t Pack(int phase, int down, int dist, int los, int sd, int t) {
    return ((((static_cast<uint64_t>(phase) * 8 + down) * 128 + dist) * 128 +
             los) *
                128 +
            (sd + 64)) *
               1024 +
           t;
  }

  // Ten stratified quantiles of the family's elapsed-time mass.
  std::vector<std::pair<int, double>> Draws(TimeFamily f) {
    const IntMass& m = w_.models.time.family().at(f).mass;
    std::map<int, double> out;
    for (int k = 0; k < 10; ++k) {
      const double u = (k + 0.5) / 10;
      double c = 0;
      for (int s = m.lo(); s <= m.hi(); ++s) {
        c += m.at(s);
        if (m.at(s) > 0 && c >= u - 1e-15) {
          out[s] += 0.1;
          break;
        }
      }
    }
    return {out.begin(), out.end()};
  }

  double Outcome(const Successor& s, int sd, int t) {
    switch (s.kind) {
      case Successor::Kind::kOffense:
        return Scrimmage(s.state, sd, t);
      case Successor::Kind::kDefense:
        return 1 - Scrimmage(s.state, Clamp(-sd), t);
      case Successor::Kind::kTerminal:
        break;
    }
    switch (s.terminal) {
      case TerminalKind::kOffTouchdown:
        return Try(Clamp(sd + 6), t);
      case TerminalKind::kOffFieldGoal:
        return Kick(Clamp(sd + 3), t);
      case TerminalKind::kSafety:
        return Kick(Clamp(sd - 2), t);
      case TerminalKind::kDefTouchdown:
        return 1 - Try(Clamp(-sd + 6), t);
    }
    return 0;
  }

  const World& w_;
  std::unordered_map<uint64_t, double> memo_;
};

}  // namespace driveopt::testing

#endif  // DRIVEOPT_TESTS_COMMON_LATE_ORACLE_H_
