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

// JSON-over-HTTP facade for play-calling clients. Requests are dispatched by
// a transport-independent handler; Mount() attaches it to an HTTP server.

#ifndef DRIVEOPT_SERVICE_H_
#define DRIVEOPT_SERVICE_H_

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "absl/status/status.h"
#include "driveopt/config.h"
#include "driveopt/pipeline.h"
#include "nlohmann/json.hpp"

namespace httplib {
class Server;
}  // namespace httplib

namespace driveopt {

inline constexpr char kApiSchema[] = "driveopt.api/1";

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> params;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

class AdvisorService {
 public:
  explicit AdvisorService(Config config) : config_(std::move(config)) {}

  // Loads whichever artifacts exist in `dir`; endpoints needing an absent
  // table answer 409. Fails only on unreadable artifacts.
  absl::Status Load(const std::string& dir);

  ApiResponse Handle(const ApiRequest& request);

  // Routes every endpoint, CORS preflight included, to Handle().
  void Mount(httplib::Server* server);

 private:
  ApiResponse Health();
  ApiResponse RecommendEndpoint(const nlohmann::json& body);
  ApiResponse Curve(const ApiRequest& request);
  ApiResponse WhatIf(const nlohmann::json& body);
  ApiResponse SimulateDrive(const nlohmann::json& body);
  ApiResponse Policy(const ApiRequest& request);
  ApiResponse LateRecommend(const GameState& base, const nlohmann::json& body);

  Config config_;
  Artifacts artifacts_;
  std::unique_ptr<StateSpace> space_;
  std::unique_ptr<RowIndex> rows_;
  std::unique_ptr<LateGameSolver> late_solver_;
  std::unique_ptr<LateGameStore> late_store_;
  std::string late_note_;
  // Single writer for the late-game store.
  std::mutex late_mu_;
};

}  // namespace driveopt

#endif  // DRIVEOPT_SERVICE_H_
