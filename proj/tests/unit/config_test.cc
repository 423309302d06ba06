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

#include "driveopt/config.h"

#include <cstdio>
#include <fstream>

#include "gtest/gtest.h"

namespace driveopt {
namespace {

using nlohmann::json;

TEST(ConfigTest, DefaultsRoundTrip) {
  Config c;
  auto back = Config::FromJson(c.ToJson());
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->ToJson(), c.ToJson());
  EXPECT_EQ(back->Hash(), c.Hash());
  EXPECT_EQ(c.match.k, 100);
  EXPECT_EQ(c.run.components, 4);
  EXPECT_EQ(c.max_dist, 30);
}

TEST(ConfigTest, OverridesMergeIntoDefaults) {
  auto c = Config::FromJson({{"seed", 5},
                             {"match", {{"k", 40}}},
                             {"sim", {{"caller_seasons", {2017, 2018}}}}});
  ASSERT_TRUE(c.ok()) << c.status();
  EXPECT_EQ(c->seed, 5u);
  EXPECT_EQ(c->match.k, 40);
  EXPECT_DOUBLE_EQ(c->match.max_scale, 1.5);
  EXPECT_EQ(c->sim.caller_seasons, (std::vector<int>{2017, 2018}));
  EXPECT_NE(c->Hash(), Config().Hash());
}

TEST(ConfigTest, RejectsUnknownKeys) {
  auto c = Config::FromJson({{"match", {{"kk", 4}}}});
  ASSERT_FALSE(c.ok());
  EXPECT_NE(c.status().message().find("match.kk"), std::string::npos);
  EXPECT_FALSE(Config::FromJson({{"match", 3}}).ok());
}

TEST(ConfigTest, RejectsOutOfRangeValues) {
  for (const json& bad :
       {json{{"max_dist", 9}}, json{{"run", {{"components", 0}}}},
        json{{"run", {{"components", 17}}}}, json{{"jobs", 0}},
        json{{"gibbs", {{"iterations", 10}, {"burn_in", 10}}}},
        json{{"solver", {{"theta", 0.0}}}},
        json{{"late", {{"node_budget", 0}}}},
        json{{"late", {{"lookahead_depth", 0}}}},
        json{{"sim", {{"possession_cap", 0}}}}, json{{"seed", "seven"}}}) {
    EXPECT_FALSE(Config::FromJson(bad).ok()) << bad.dump();
  }
}

TEST(ConfigTest, LoadsFromFile) {
  const std::string path = ::testing::TempDir() + "/config_test.json";
  {
    std::ofstream out(path);
    out << R"({"late": {"node_budget": 50}})";
  }
  auto c = Config::FromFile(path);
  ASSERT_TRUE(c.ok()) << c.status();
  EXPECT_EQ(c->late.node_budget, 50);
  {
    std::ofstream out(path);
    out << "{";
  }
  EXPECT_FALSE(Config::FromFile(path).ok());
  std::remove(path.c_str());
  EXPECT_EQ(Config::FromFile(path).status().code(),
            absl::StatusCode::kNotFound);
}

TEST(MixSeedTest, DistinctStreams) {
  EXPECT_NE(MixSeed(1, 0), MixSeed(1, 1));
  EXPECT_NE(MixSeed(1, 2), MixSeed(2, 1));
  EXPECT_EQ(MixSeed(7, 3), MixSeed(7, 3));
}

TEST(Fnv1aTest, KnownVectors) {
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

}  // namespace
}  // namespace driveopt
