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

#include <chrono>
#include <random>

#include "gtest/gtest.h"
#include "mdp_oracle.h"

namespace driveopt {
namespace {

using ::driveopt::testing::BruteForce;
using ::driveopt::testing::GameInstance;
using ::driveopt::testing::PolicyValue;
using ::driveopt::testing::RandomInstance;

TEST(ValueIterationTest, FiveStateInstance) {
  MdpInstance m = FiveStateInstance();
  ASSERT_TRUE(m.Validate().ok());
  auto r = SolveValueIteration(m, SolveOptions());
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r->converged);
  EXPECT_NEAR(r->utility[0], 2.37, 0.01);
  EXPECT_NEAR(r->utility[1], 1.94, 0.01);
  EXPECT_NEAR(r->utility[2], 1.68, 0.01);
  EXPECT_EQ(r->policy, (std::vector<int>{0, 0, 1}));
  EXPECT_LE(r->sweeps, 10);
}

TEST(ValueIterationTest, FiveStateFromArbitraryStarts) {
  MdpInstance m = FiveStateInstance();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> init(-30.0, 30.0);
  auto start = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 1000; ++trial) {
    SolveOptions options;
    options.initial = {init(rng), init(rng), init(rng)};
    auto r = SolveValueIteration(m, options);
    ASSERT_TRUE(r.ok());
    ASSERT_LE(r->sweeps, 10);
    ASSERT_NEAR(r->utility[0], 2.3696, 1e-3);
  }
  EXPECT_LT(
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count(),
      1.0);
}

TEST(ValueIterationTest, ScalingRewardsScalesUtilities) {
  MdpInstance m = FiveStateInstance();
  MdpInstance doubled = m;
  for (double& t : doubled.terminal_utility) t *= 2.0;
  // Same sweep count on both sides; doubling is exact in floating point.
  SolveOptions options;
  options.theta = 1e-300;
  options.max_sweeps = 40;
  auto a = SolveValueIteration(m, options);
  auto b = SolveValueIteration(doubled, options);
  for (int s = 0; s < 3; ++s) {
    EXPECT_DOUBLE_EQ(b->utility[s], 2.0 * a->utility[s]);
  }
  EXPECT_EQ(a->policy, b->policy);
}

TEST(ValueIterationTest, NoIntermediateStates) {
  MdpInstance m;
  m.terminal_utility = {7.0, -2.0};
  auto r = SolveValueIteration(m, SolveOptions());
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r->utility.empty());
  EXPECT_EQ(m.terminal_utility, (std::vector<double>{7.0, -2.0}));
}

TEST(ValueIterationTest, ReportsUnsolvableStates) {
  MdpInstance m;
  m.num_states = 2;
  m.terminal_utility = {1.0};
  m.actions.resize(2);
  m.actions[0].push_back({0, {{Outcome::Kind::kState, 0, 1.0}}});
  m.actions[1].push_back(
      {0,
       {{Outcome::Kind::kTerminal, 0, 0.5}, {Outcome::Kind::kState, 1, 0.5}}});
  auto r = SolveValueIteration(m, SolveOptions());
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->unsolvable, (std::vector<int>{0}));
  EXPECT_EQ(r->policy[0], -1);
  EXPECT_NEAR(r->utility[1], 1.0, 1e-6);
}

TEST(ValueIterationTest, SelfLoopActionIsExcluded) {
  MdpInstance m;
  m.num_states = 1;
  m.terminal_utility = {1.0};
  m.actions.resize(1);
  m.actions[0].push_back({0, {{Outcome::Kind::kState, 0, 1.0}}});
  m.actions[0].push_back({1, {{Outcome::Kind::kTerminal, 0, 1.0}}});
  auto r = SolveValueIteration(m, SolveOptions());
  EXPECT_TRUE(r->unsolvable.empty());
  EXPECT_EQ(r->policy[0], 1);
}

TEST(ValueIterationTest, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(11);
  SolveOptions options;
  options.theta = 1e-20;
  options.max_sweeps = 100000;
  for (int trial = 0; trial < 50; ++trial) {
    MdpInstance m = RandomInstance(rng, 6, 2, false);
    ASSERT_TRUE(m.Validate().ok());
    auto r = SolveValueIteration(m, options);
    ASSERT_TRUE(r.ok());
    auto oracle = BruteForce(m);
    for (int s = 0; s < m.num_states; ++s) {
      EXPECT_NEAR(r->utility[s], oracle[s], 1e-6) << trial << " " << s;
    }
  }
}

TEST(GreedyTest, PolicyAttainsTheMax) {
  std::mt19937_64 rng(3);
  MdpInstance m = RandomInstance(rng, 8, 3, false);
  auto r = SolveValueIteration(m, SolveOptions());
  for (int s = 0; s < m.num_states; ++s) {
    double best = -1e300;
    for (const MdpAction& a : m.actions[s]) {
      double v;
      ASSERT_TRUE(ActionValue(m, s, a, r->utility, nullptr, &v));
      best = std::max(best, v);
    }
    double chosen;
    const int g = GreedyAction(m, s, r->utility, nullptr, &chosen);
    EXPECT_EQ(m.actions[s][g].label, r->policy[s]);
    EXPECT_EQ(chosen, best);
  }
}

TEST(GreedyTest, TiesGoToTheEarlierAction) {
  MdpInstance m;
  m.num_states = 1;
  m.terminal_utility = {1.0};
  m.actions.resize(1);
  m.actions[0].push_back({2, {{Outcome::Kind::kTerminal, 0, 1.0}}});
  m.actions[0].push_back({1, {{Outcome::Kind::kTerminal, 0, 1.0}}});
  auto r = SolveValueIteration(m, SolveOptions());
  EXPECT_EQ(r->policy[0], 2);
}

TEST(OrderedTest, MatchesValueIteration) {
  std::mt19937_64 rng(5);
  SolveOptions options;
  options.theta = 1e-24;
  options.max_sweeps = 100000;
  for (int trial = 0; trial < 50; ++trial) {
    MdpInstance m = RandomInstance(rng, 1 + trial % 8, 3, true);
    auto ordered = SolveOrdered(m);
    ASSERT_TRUE(ordered.ok()) << ordered.status();
    auto vi = SolveValueIteration(m, options);
    auto semi = SolveSemiOrdered(m, options);
    for (int s = 0; s < m.num_states; ++s) {
      EXPECT_NEAR(ordered->utility[s], vi->utility[s], 1e-9);
      EXPECT_NEAR(semi->utility[s], vi->utility[s], 1e-9);
    }
    EXPECT_EQ(ordered->policy, vi->policy);
  }
}

TEST(OrderedTest, SingleStateChain) {
  MdpInstance m;
  m.num_states = 1;
  m.terminal_utility = {1.0, 0.0};
  m.actions.resize(1);
  m.actions[0].push_back({0,
                          {{Outcome::Kind::kTerminal, 0, 0.3},
                           {Outcome::Kind::kTerminal, 1, 0.7}}});
  m.actions[0].push_back({1,
                          {{Outcome::Kind::kTerminal, 0, 0.6},
                           {Outcome::Kind::kTerminal, 1, 0.4}}});
  auto r = SolveOrdered(m);
  ASSERT_TRUE(r.ok());
  EXPECT_DOUBLE_EQ(r->utility[0], 0.6);
  EXPECT_EQ(r->policy[0], 1);
}

TEST(OrderedTest, GameShapedInstancesMatchBruteForce) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    MdpInstance small = GameInstance(rng, 2, 2, 2);
    auto r = SolveOrdered(small);
    ASSERT_TRUE(r.ok()) << r.status();
    auto oracle = BruteForce(small);
    for (int s = 0; s < small.num_states; ++s) {
      EXPECT_NEAR(r->utility[s], oracle[s], 1e-9);
    }
    MdpInstance big = GameInstance(rng, 6, 3, 4);
    auto ordered = SolveOrdered(big);
    ASSERT_TRUE(ordered.ok());
    SolveOptions options;
    options.theta = 1e-24;
    auto vi = SolveValueIteration(big, options);
    for (int s = 0; s < big.num_states; ++s) {
      EXPECT_NEAR(ordered->utility[s], vi->utility[s], 1e-9);
      EXPECT_GE(ordered->utility[s], 0.0);
      EXPECT_LE(ordered->utility[s], 1.0);
    }
  }
}

TEST(OrderedTest, RefusesCyclesWithWitness) {
  MdpInstance m;
  m.num_states = 3;
  m.terminal_utility = {1.0};
  m.actions.resize(3);
  m.actions[0].push_back(
      {0,
       {{Outcome::Kind::kState, 1, 0.5}, {Outcome::Kind::kTerminal, 0, 0.5}}});
  m.actions[1].push_back(
      {0,
       {{Outcome::Kind::kState, 2, 0.5}, {Outcome::Kind::kTerminal, 0, 0.5}}});
  m.actions[2].push_back(
      {0,
       {{Outcome::Kind::kState, 0, 0.5}, {Outcome::Kind::kTerminal, 0, 0.5}}});
  std::vector<int> cycle;
  EXPECT_FALSE(TopologicalOrder(m, &cycle).ok());
  EXPECT_EQ(cycle, (std::vector<int>{0, 1, 2, 0}));
  auto r = SolveOrdered(m);
  EXPECT_EQ(r.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_NE(r.status().message().find("0 -> 1 -> 2 -> 0"), std::string::npos);

  MdpInstance self = FiveStateInstance();
  EXPECT_FALSE(SolveOrdered(self).ok());
}

// Semi-terminal instance: state 0 is the mirror of semi-terminal 0.
MdpInstance TinySemiInstance(double td) {
  MdpInstance m;
  m.num_states = 3;
  m.terminal_utility = {td, 0.0};
  m.semi_mirror = {0};
  m.actions.resize(3);
  m.actions[0].push_back({0,
                          {{Outcome::Kind::kState, 1, 0.6},
                           {Outcome::Kind::kTerminal, 0, 0.2},
                           {Outcome::Kind::kSemi, 0, 0.2}}});
  m.actions[0].push_back({1,
                          {{Outcome::Kind::kState, 2, 0.5},
                           {Outcome::Kind::kTerminal, 0, 0.1},
                           {Outcome::Kind::kSemi, 0, 0.4}}});
  m.actions[1].push_back({0,
                          {{Outcome::Kind::kState, 2, 0.5},
                           {Outcome::Kind::kTerminal, 0, 0.3},
                           {Outcome::Kind::kSemi, 0, 0.2}}});
  m.actions[1].push_back({1,
                          {{Outcome::Kind::kTerminal, 0, 0.45},
                           {Outcome::Kind::kTerminal, 1, 0.05},
                           {Outcome::Kind::kSemi, 0, 0.5}}});
  m.actions[2].push_back(
      {0,
       {{Outcome::Kind::kTerminal, 0, 0.4}, {Outcome::Kind::kSemi, 0, 0.6}}});
  m.actions[2].push_back({1,
                          {{Outcome::Kind::kTerminal, 0, 0.25},
                           {Outcome::Kind::kTerminal, 1, 0.5},
                           {Outcome::Kind::kSemi, 0, 0.25}}});
  return m;
}

TEST(SemiOrderedTest, ZeroRewardsGiveZeroUtilities) {
  MdpInstance m = TinySemiInstance(0.0);
  auto r = SolveSemiOrdered(m, SolveOptions());
  ASSERT_TRUE(r.ok());
  for (double u : r->utility) EXPECT_EQ(u, 0.0);
  for (double u : r->semi_utility) EXPECT_EQ(u, 0.0);
}

TEST(SemiOrderedTest, MatchesHandFixedPoint) {
  MdpInstance m = TinySemiInstance(7.0);
  ASSERT_TRUE(m.Validate().ok());
  SolveOptions options;
  options.theta = 1e-26;
  auto r = SolveSemiOrdered(m, options);
  ASSERT_TRUE(r.ok());
  ASSERT_TRUE(r->converged);
  // Fixed point: the returned policy's exact value must reproduce U, and no
  // single-state deviation may improve on it.
  std::vector<int> choice(3);
  for (int s = 0; s < 3; ++s) choice[s] = r->policy[s];
  auto exact = PolicyValue(m, choice);
  for (int s = 0; s < 3; ++s) EXPECT_NEAR(r->utility[s], exact[s], 1e-10);
  EXPECT_NEAR(r->semi_utility[0], exact[0], 1e-10);
  for (int s = 0; s < 3; ++s) {
    for (const MdpAction& a : m.actions[s]) {
      double q = 0.0;
      for (const Outcome& o : a.outcomes) {
        if (o.kind == Outcome::Kind::kTerminal) {
          q += o.probability * m.terminal_utility[o.index];
        } else if (o.kind == Outcome::Kind::kState) {
          q += o.probability * exact[o.index];
        } else {
          q -= o.probability * exact[0];
        }
      }
      EXPECT_LE(q, exact[s] + 1e-10);
    }
  }
  // Hand computation of the converged values for policy (0, 0, 0):
  // u2 = 2.8 - 0.6 u0; u1 = 2.1 + 0.5 u2 - 0.2 u0; u0 = 1.4 + 0.6 u1 - 0.2 u0.
  if (choice == std::vector<int>{0, 0, 0}) {
    const double u0 = (1.4 + 0.6 * (2.1 + 0.5 * 2.8)) / (1.2 + 0.6 * 0.5);
    EXPECT_NEAR(r->utility[0], u0, 1e-10);
  }
}

TEST(SemiOrderedTest, ValueIterationAgrees) {
  MdpInstance m = TinySemiInstance(7.0);
  SolveOptions options;
  options.theta = 1e-26;
  options.max_sweeps = 10000;
  auto a = SolveSemiOrdered(m, options);
  auto b = SolveValueIteration(m, options);
  for (int s = 0; s < 3; ++s) EXPECT_NEAR(a->utility[s], b->utility[s], 1e-9);
  EXPECT_EQ(a->policy, b->policy);
}

TEST(SemiOrderedTest, SelfReferenceThroughSemiUsesOnePlusP) {
  // U = 0.5 * 3 - 0.5 * U  =>  U = 1.
  MdpInstance m;
  m.num_states = 1;
  m.terminal_utility = {3.0};
  m.semi_mirror = {0};
  m.actions.resize(1);
  m.actions[0].push_back(
      {0,
       {{Outcome::Kind::kTerminal, 0, 0.5}, {Outcome::Kind::kSemi, 0, 0.5}}});
  auto vi = SolveValueIteration(m, SolveOptions());
  EXPECT_NEAR(vi->utility[0], 1.0, 1e-12);
  EXPECT_EQ(vi->sweeps, 2);
  auto semi = SolveSemiOrdered(m, SolveOptions());
  EXPECT_NEAR(semi->utility[0], 1.0, 1e-6);
  EXPECT_NEAR(semi->semi_utility[0], 1.0, 1e-12);
}

}  // namespace
}  // namespace driveopt
