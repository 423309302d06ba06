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

#include "driveopt/lategame.h"

#include <climits>
#include <cmath>
#include <map>
#include <random>
#include <unordered_map>

#include "fixture.h"
#include "gtest/gtest.h"
#include "late_oracle.h"

namespace driveopt {
namespace {

using testing::Fitted;
using testing::Frozen;
using testing::kExhaustive;
using testing::Oracle;
using testing::World;

LateGameSolver MakeSolver(const World& w, LateGameConfig config = {}) {
  return LateGameSolver(w.space, w.transitions, w.models, config);
}

TEST(LateGameTest, TimeZeroIsTerminal) {
  const World& w = Frozen();
  LateGameSolver solver = MakeSolver(w);
  LateGameStore store;
  for (Phase phase : {Phase::kScrimmage, Phase::kKickoff}) {
    for (auto [sd, want] : {std::pair{3, 1.0}, {0, 0.5}, {-1, 0.0}}) {
      auto r = solver.Solve(LateGameState{GameState{2, 5, 40}, sd, 0, phase},
                            &store, {});
      ASSERT_TRUE(r.ok());
      EXPECT_TRUE(r->terminal);
      EXPECT_EQ(r->utility, want);
      EXPECT_FALSE(r->action.has_value());
    }
  }
}

TEST(LateGameTest, TryAtExpiredClockPicksBetterConversion) {
  const World& w = Frozen();
  LateGameSolver solver = MakeSolver(w);
  LateGameStore store;
  // Down 7 before the score: the kick ties more often than two points wins.
  auto one = solver.Solve(LateGameState{GameState{}, -1, 0, Phase::kExtraPoint},
                          &store, {});
  ASSERT_TRUE(one.ok());
  EXPECT_EQ(*one->action, LateAction::kExtraPoint);
  EXPECT_NEAR(one->utility, 0.45, 1e-15);
  // Down 8: only two points can tie.
  auto two = solver.Solve(LateGameState{GameState{}, -2, 0, Phase::kExtraPoint},
                          &store, {});
  EXPECT_EQ(*two->action, LateAction::kTwoPoint);
  EXPECT_NEAR(two->utility, 0.45 * 0.5, 1e-15);
}

TEST(LateGameTest, MatchesExactOracle) {
  const World& w = Frozen();
  LateGameSolver solver = MakeSolver(w);
  LateGameStore store;
  Oracle oracle(w);
  std::mt19937_64 rng(11);
  for (int n = 0; n < 60; ++n) {
    const GameState b = w.space.StateAt(
        std::uniform_int_distribution<int>(0, w.space.size() - 1)(rng));
    const int sd = std::uniform_int_distribution<int>(-10, 10)(rng);
    const int t = std::uniform_int_distribution<int>(1, 18)(rng);
    auto r = solver.Solve(LateGameState{b, sd, t, Phase::kScrimmage}, &store,
                          kExhaustive);
    ASSERT_TRUE(r.ok());
    EXPECT_TRUE(r->exact);
    EXPECT_TRUE(r->converged);
    EXPECT_NEAR(r->utility, oracle.Scrimmage(b, sd, t), 1e-12)
        << ToString(b) << " sd=" << sd << " t=" << t;
  }
  auto kick = solver.Solve(LateGameState{GameState{}, 3, 12, Phase::kKickoff},
                           &store, kExhaustive);
  EXPECT_NEAR(kick->utility, oracle.Kick(3, 12), 1e-12);
}

// A frozen sample of 500 states; utilities from the exact oracle.
TEST(LateGameTest, MonotoneInScoreDifferential) {
  const World& w = Frozen();
  Oracle oracle(w);
  std::mt19937_64 rng(500);
  for (int n = 0; n < 500; ++n) {
    const GameState b = w.space.StateAt(
        std::uniform_int_distribution<int>(0, w.space.size() - 1)(rng));
    const int sd = std::uniform_int_distribution<int>(-12, 11)(rng);
    const int t = std::uniform_int_distribution<int>(1, 20)(rng);
    const double lo = oracle.Scrimmage(b, sd, t);
    const double hi = oracle.Scrimmage(b, sd + 1, t);
    ASSERT_GE(hi, lo - 1e-12) << ToString(b) << " sd=" << sd << " t=" << t;
    ASSERT_GE(lo, -1e-12);
    ASSERT_LE(hi, 1 + 1e-12);
  }
}

TEST(LateGameTest, LastSnapCannotCloseTenPoints) {
  const World& w = Fitted();
  LateGameSolver solver = MakeSolver(w);
  LateGameStore store;
  auto r = solver.Solve(
      LateGameState{GameState{1, 10, 99}, -10, 1, Phase::kScrimmage}, &store,
      {});
  ASSERT_TRUE(r.ok());
  EXPECT_LE(r->utility, 0.05);
  EXPECT_TRUE(r->exact);
}

TEST(LateGameTest, BudgetedSolvesStayInUnitInterval) {
  const World& w = Fitted();
  LateGameConfig config;
  LateGameSolver solver = MakeSolver(w, config);
  LateGameStore store;
  std::mt19937_64 rng(3);
  for (int n = 0; n < 20; ++n) {
    const GameState b = w.space.StateAt(
        std::uniform_int_distribution<int>(0, w.space.size() - 1)(rng));
    const int sd = std::uniform_int_distribution<int>(-14, 14)(rng);
    const int t = std::uniform_int_distribution<int>(30, 300)(rng);
    auto r = solver.Solve(LateGameState{b, sd, t, Phase::kScrimmage}, &store,
                          LateSolveLimits{config.node_budget, 2});
    ASSERT_TRUE(r.ok());
    EXPECT_LE(r->nodes_expanded, config.node_budget);
    EXPECT_GE(r->utility, 0.0);
    EXPECT_LE(r->utility, 1.0);
    for (const auto& [a, v] : r->values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  auto back = LateGameStore::Deserialize(store.Serialize());
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->size(), store.size());
}

TEST(LateGameTest, BudgetCutIsReported) {
  const World& w = Fitted();
  LateGameSolver solver = MakeSolver(w);
  LateGameStore store;
  auto r = solver.Solve(
      LateGameState{GameState{1, 10, 75}, 0, 200, Phase::kScrimmage}, &store,
      LateSolveLimits{1, 2});
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->nodes_expanded, 1);
  EXPECT_FALSE(r->converged);
  EXPECT_FALSE(r->exact);
}

TEST(LateGameTest, HeuristicFavoursTheLeader) {
  const World& w = Frozen();
  LateGameSolver solver = MakeSolver(w);
  for (int t : {1, 60, 300}) {
    LateGameState s{GameState{1, 10, 75}, 0, t, Phase::kScrimmage};
    EXPECT_EQ(solver.Heuristic(s), 0.5);
    double previous = 0.5;
    for (int sd = 1; sd <= 30; ++sd) {
      s.sd = sd;
      EXPECT_GT(solver.Heuristic(s), 0.5);
      EXPECT_GE(solver.Heuristic(s), previous);
      previous = solver.Heuristic(s);
      s.sd = -sd;
      EXPECT_NEAR(solver.Heuristic(s), 1 - previous, 1e-15);
    }
  }
}

TEST(LateGameTest, RejectsInvalidStates) {
  const World& w = Frozen();
  LateGameSolver solver = MakeSolver(w);
  LateGameStore store;
  EXPECT_EQ(
      solver
          .Solve(LateGameState{GameState{1, 10, 75}, 0, 301, Phase::kScrimmage},
                 &store, {})
          .status()
          .code(),
      absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(
      solver
          .Solve(LateGameState{GameState{1, 12, 5}, 0, 30, Phase::kScrimmage},
                 &store, {})
          .ok());
}

TEST(LateGameStoreTest, KeysRoundTrip) {
  for (const LateGameState& s :
       {LateGameState{GameState{4, 30, 99}, -30, 300, Phase::kScrimmage},
        LateGameState{GameState{1, 1, 1}, 30, 0, Phase::kScrimmage},
        LateGameState{GameState{0, 0, 0}, 7, 12, Phase::kKickoff},
        LateGameState{GameState{0, 0, 0}, -5, 3, Phase::kExtraPoint}}) {
    EXPECT_EQ(LateGameStore::Unpack(LateGameStore::Key(s)), s);
  }
}

TEST(LateGameStoreTest, SerializationIsStableAndVersioned) {
  LateGameStore store;
  store.models_hash = "m";
  store.Put(LateGameState{GameState{2, 3, 40}, 1, 50, Phase::kScrimmage},
            LateEntry{0.625, 1, false});
  store.Put(LateGameState{GameState{}, -3, 20, Phase::kKickoff},
            LateEntry{0.1, 6, true});
  const std::string text = store.Serialize();
  auto back = LateGameStore::Deserialize(text);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->Serialize(), text);
  const std::string path = ::testing::TempDir() + "/lategame.jsonl";
  ASSERT_TRUE(store.Save(path).ok());
  EXPECT_EQ(store.version, 1);
  auto loaded = LateGameStore::Load(path);
  ASSERT_TRUE(loaded.ok());
  EXPECT_EQ(loaded->version, 1);
  EXPECT_EQ(
      loaded->Find(LateGameState{GameState{}, -3, 20, Phase::kKickoff})->action,
      6);
  EXPECT_FALSE(LateGameStore::Deserialize("{\"schema\":\"x\"}\n").ok());
}

}  // namespace
}  // namespace driveopt
