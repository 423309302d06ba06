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

#include "driveopt/service.h"

#include <filesystem>
#include <thread>

#include "driveopt/pipeline.h"
#include "fixture.h"
#include "gtest/gtest.h"
#include "httplib.h"

namespace driveopt {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const std::string& ArtifactDir() {
  static const std::string* dir = [] {
    auto* d = new std::string(
        (fs::temp_directory_path() / "driveopt_service_test").string());
    fs::remove_all(*d);
    fs::create_directories(*d);
    const Config config = testing::SmallConfig();
    EXPECT_TRUE(testing::SmallStore().Save(JoinPath(*d, kModelsFile)).ok());
    EXPECT_TRUE(StepBuildTransitions(config, *d).ok());
    EXPECT_TRUE(StepSolve(config, *d).ok());
    return d;
  }();
  return *dir;
}

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    service_ = new AdvisorService(testing::SmallConfig());
    ASSERT_TRUE(service_->Load(ArtifactDir()).ok());
  }
  static void TearDownTestSuite() {
    delete service_;
    service_ = nullptr;
  }

  static ApiResponse Post(const std::string& path, const json& body) {
    return service_->Handle(ApiRequest{"POST", path, {}, body.dump()});
  }
  static ApiResponse Get(const std::string& path,
                         std::map<std::string, std::string> params = {}) {
    return service_->Handle(ApiRequest{"GET", path, std::move(params), ""});
  }

  static AdvisorService* service_;
};

AdvisorService* ServiceTest::service_ = nullptr;

TEST_F(ServiceTest, HealthReportsLoadedTables) {
  ApiResponse r = Get("/health");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["schema"], kApiSchema);
  EXPECT_TRUE(r.body["loaded"]["utility"].get<bool>());
  EXPECT_TRUE(r.body["loaded"]["lategame"].get<bool>());
}

TEST_F(ServiceTest, RecommendMatchesTable) {
  auto table = UtilityTable::Load(JoinPath(ArtifactDir(), kUtilityFile));
  ASSERT_TRUE(table.ok());
  StateSpace space(table->max_dist);
  const GameState s{4, 2, 40};
  auto want = Recommend(space, *table, s);
  ASSERT_TRUE(want.ok());
  ApiResponse r = Post("/recommend", {{"down", 4}, {"dist", 2}, {"los", 40}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["regime"], "normal");
  EXPECT_EQ(r.body["action"], std::string(ActionName(*want->action)));
  EXPECT_DOUBLE_EQ(r.body["utility"].get<double>(), want->utility);
  EXPECT_TRUE(r.body["values"]["PUNT"].is_number());
}

TEST_F(ServiceTest, RecommendRejectsBadInput) {
  EXPECT_EQ(Post("/recommend", {{"down", 1}, {"dist", 20}, {"los", 10}}).status,
            400);
  EXPECT_EQ(Post("/recommend", {{"down", 1}, {"dist", 10}}).status, 400);
  EXPECT_EQ(
      service_->Handle(ApiRequest{"POST", "/recommend", {}, "{oops"}).status,
      400);
  EXPECT_EQ(
      Post("/recommend", {{"down", 1}, {"dist", 10}, {"los", 75}, {"sd", 3}})
          .status,
      422);
  EXPECT_EQ(
      Post("/recommend", {{"down", 1}, {"dist", 10}, {"los", 75}, {"time", 30}})
          .status,
      422);
}

TEST_F(ServiceTest, LateRecommendAtExpiredClockIsTerminal) {
  ApiResponse r =
      Post("/recommend",
           {{"down", 1}, {"dist", 10}, {"los", 75}, {"sd", -3}, {"time", 0}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_TRUE(r.body["terminal"].get<bool>());
  EXPECT_EQ(r.body["utility"].get<double>(), 0.0);
  EXPECT_TRUE(r.body["action"].is_null());
}

TEST_F(ServiceTest, LateRecommendPersistsStore) {
  ApiResponse r =
      Post("/recommend",
           {{"down", 3}, {"dist", 4}, {"los", 30}, {"sd", -2}, {"time", 40}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["regime"], "late");
  const double u = r.body["utility"].get<double>();
  EXPECT_GE(u, 0.0);
  EXPECT_LE(u, 1.0);
  EXPECT_TRUE(r.body["converged"].is_boolean());
  EXPECT_TRUE(r.body["exact"].is_boolean());
  EXPECT_GT(r.body["nodes_expanded"].get<int>(), 0);
  auto stored = LateGameStore::Load(JoinPath(ArtifactDir(), kLateGameFile));
  ASSERT_TRUE(stored.ok()) << stored.status();
  EXPECT_GT(stored->size(), 0u);
  EXPECT_EQ(stored->version, r.body["store_version"].get<int64_t>());
  EXPECT_EQ(
      Post("/recommend",
           {{"down", 3}, {"dist", 4}, {"los", 30}, {"sd", -2}, {"time", -1}})
          .status,
      400);
}

TEST_F(ServiceTest, CurveAndPolicy) {
  ApiResponse c = Get("/curve", {{"down", "2"}, {"dist", "5"}, {"los", "50"}});
  ASSERT_EQ(c.status, 200) << c.body.dump();
  EXPECT_EQ(c.body["first_down_los"], 45);
  EXPECT_FALSE(c.body["points"].empty());
  EXPECT_EQ(Get("/curve", {{"down", "2"}}).status, 400);

  ApiResponse p = Get("/policy", {{"down", "4"}, {"dist", "10"}});
  ASSERT_EQ(p.status, 200) << p.body.dump();
  ASSERT_EQ(p.body["entries"].size(), 99u);
  EXPECT_EQ(p.body["entries"][4]["dist"], 5);
  EXPECT_EQ(p.body["entries"][50]["dist"], 10);
  EXPECT_EQ(Get("/policy", {{"down", "5"}, {"dist", "3"}}).status, 400);
}

TEST_F(ServiceTest, WhatIfSummaryIsAProbability) {
  const json req = {{"state", {{"down", 3}, {"dist", 6}, {"los", 35}}},
                    {"action", "PASS"},
                    {"seed", 11}};
  ApiResponse r = Post("/whatif", req);
  ASSERT_EQ(r.status, 200) << r.body.dump();
  double total = 0.0;
  for (const auto& [k, v] : r.body["summary"].items()) total += v.get<double>();
  EXPECT_NEAR(total, 1.0, 1e-9);
  EXPECT_LE(r.body["top_outcomes"].size(), 10u);
  EXPECT_EQ(Post("/whatif", req).body, r.body);
  EXPECT_EQ(
      Post("/whatif", {{"state", req["state"]}, {"action", "DANCE"}}).status,
      400);
  // A field goal from the opponent's 90 always misses.
  ApiResponse fg = Post(
      "/whatif",
      {{"state", {{"down", 4}, {"dist", 5}, {"los", 90}}}, {"action", "FG"}});
  ASSERT_EQ(fg.status, 200);
  EXPECT_DOUBLE_EQ(fg.body["summary"]["turnover"].get<double>(), 1.0);
}

TEST_F(ServiceTest, SimulateDriveIsSeededAndEnds) {
  const json req = {{"state", {{"down", 1}, {"dist", 10}, {"los", 75}}},
                    {"choices", {"RUN", "RUN"}},
                    {"seed", 5}};
  ApiResponse r = Post("/simulate-drive", req);
  ASSERT_EQ(r.status, 200) << r.body.dump();
  const json& steps = r.body["steps"];
  ASSERT_FALSE(steps.empty());
  EXPECT_EQ(steps[0]["chosen"], "RUN");
  EXPECT_TRUE(r.body["result"]["end"].is_string());
  EXPECT_EQ(Post("/simulate-drive", req).body, r.body);
}

TEST_F(ServiceTest, UnknownPathIs404) {
  EXPECT_EQ(Get("/nope").status, 404);
  EXPECT_EQ(
      service_->Handle(ApiRequest{"OPTIONS", "/recommend", {}, ""}).status,
      204);
}

TEST(ServiceEmptyTest, MissingTablesAre409) {
  const std::string dir =
      (fs::temp_directory_path() / "driveopt_service_empty").string();
  fs::remove_all(dir);
  fs::create_directories(dir);
  AdvisorService service(testing::SmallConfig());
  ASSERT_TRUE(service.Load(dir).ok());
  ApiResponse r = service.Handle(
      ApiRequest{"POST", "/recommend", {}, R"({"down":1,"dist":10,"los":75})"});
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(service.Handle(ApiRequest{"GET", "/health", {}, ""}).status, 200);
}

TEST_F(ServiceTest, ServesOverHttp) {
  httplib::Server server;
  service_->Mount(&server);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "*");
  auto rec = client.Post("/recommend", R"({"down":1,"dist":10,"los":75})",
                         "application/json");
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->status, 200);
  EXPECT_EQ(json::parse(rec->body)["regime"], "normal");
  auto preflight = client.Options("/recommend");
  ASSERT_TRUE(preflight);
  EXPECT_EQ(preflight->status, 204);
  auto missing = client.Get("/missing");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  server.stop();
  t.join();
}

}  // namespace
}  // namespace driveopt
