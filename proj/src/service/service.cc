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

#include <algorithm>
#include <filesystem>
#include <random>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "httplib.h"

namespace driveopt {
namespace {

using nlohmann::json;

constexpr int kMaxDriveSteps = 200;
constexpr int kTopOutcomes = 10;

ApiResponse Error(int status, const std::string& message) {
  return ApiResponse{
      status, json{{"schema", kApiSchema},
                   {"error", {{"status", status}, {"message", message}}}}};
}

ApiResponse NotLoaded(const std::string& what) {
  return Error(409, absl::StrCat(what, " not loaded"));
}

json StateJson(const GameState& s) {
  return json{{"down", s.down}, {"dist", s.dist}, {"los", s.los}};
}

json ValuesJson(
    const std::array<std::optional<double>, kNumScrimmageActions>& values) {
  json out = json::object();
  for (int a = 0; a < kNumScrimmageActions; ++a) {
    const std::string name(ActionName(kScrimmageActions[a]));
    out[name] = values[a].has_value() ? json(*values[a]) : json(nullptr);
  }
  return out;
}

json ActionJson(const std::optional<Action>& a) {
  return a.has_value() ? json(std::string(ActionName(*a))) : json(nullptr);
}

// Reads an integer field; false when absent or not an integer.
bool IntField(const json& j, const char* name, int* out) {
  if (!j.is_object() || !j.contains(name)) return false;
  const json& v = j.at(name);
  if (!v.is_number_integer()) return false;
  *out = v.get<int>();
  return true;
}

bool IntParam(const ApiRequest& r, const char* name, int* out) {
  auto it = r.params.find(name);
  return it != r.params.end() && absl::SimpleAtoi(it->second, out);
}

// Parses {down, dist, los}; the message names the offending field.
std::optional<std::string> ParseState(const json& j, const StateSpace& space,
                                      GameState* s) {
  for (auto [name, field] :
       {std::pair{"down", &s->down}, {"dist", &s->dist}, {"los", &s->los}}) {
    if (!IntField(j, name, field)) {
      return absl::StrCat("field '", name, "' must be an integer");
    }
  }
  if (!space.IsValid(*s)) {
    return absl::StrCat("invalid state ", ToString(*s));
  }
  return std::nullopt;
}

std::optional<json> ParseBody(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

}  // namespace

absl::Status AdvisorService::Load(const std::string& dir) {
  int needs = 0;
  auto has = [&](const char* name) {
    return std::filesystem::exists(JoinPath(dir, name));
  };
  if (has(kModelsFile)) needs |= kNeedModels;
  if (has(kTransitionsFile)) needs |= kNeedTransitions;
  if (has(kUtilityFile)) needs |= kNeedUtility;
  auto loaded = LoadArtifacts(dir, needs);
  if (!loaded.ok()) return loaded.status();
  artifacts_ = *std::move(loaded);
  space_ = std::make_unique<StateSpace>(artifacts_.max_dist());
  if (artifacts_.transitions) {
    rows_ = std::make_unique<RowIndex>(*space_, *artifacts_.transitions);
  }
  if (artifacts_.models && artifacts_.transitions) {
    late_solver_ = std::make_unique<LateGameSolver>(
        *space_, *artifacts_.transitions, *artifacts_.models, config_.late);
    late_store_ =
        std::make_unique<LateGameStore>(OpenLateStore(artifacts_, &late_note_));
  }
  return absl::OkStatus();
}

ApiResponse AdvisorService::Handle(const ApiRequest& request) {
  const bool get = request.method == "GET";
  const bool post = request.method == "POST";
  if (request.method == "OPTIONS") return ApiResponse{204, nullptr};
  if (get && request.path == "/health") return Health();
  if (get && request.path == "/curve") return Curve(request);
  if (get && request.path == "/policy") return Policy(request);
  if (post && (request.path == "/recommend" || request.path == "/whatif" ||
               request.path == "/simulate-drive")) {
    auto body = ParseBody(request.body);
    if (!body) return Error(400, "body must be a JSON object");
    if (request.path == "/recommend") return RecommendEndpoint(*body);
    if (request.path == "/whatif") return WhatIf(*body);
    return SimulateDrive(*body);
  }
  return Error(404,
               absl::StrCat("no endpoint ", request.method, " ", request.path));
}

ApiResponse AdvisorService::Health() {
  json late = nullptr;
  if (late_store_) {
    std::lock_guard<std::mutex> lock(late_mu_);
    late = json{{"entries", late_store_->size()},
                {"version", late_store_->version},
                {"note", late_note_}};
  }
  return ApiResponse{200,
                     json{{"schema", kApiSchema},
                          {"status", "ok"},
                          {"version", kVersion},
                          {"loaded",
                           {{"models", artifacts_.models.has_value()},
                            {"transitions", artifacts_.transitions.has_value()},
                            {"utility", artifacts_.utility.has_value()},
                            {"lategame", late_solver_ != nullptr}}},
                          {"lategame", late}}};
}

ApiResponse AdvisorService::RecommendEndpoint(const json& body) {
  GameState s;
  if (auto err = ParseState(body, *space_, &s)) return Error(400, *err);
  const bool has_sd = body.contains("sd");
  const bool has_time = body.contains("time");
  if (has_sd || has_time) {
    if (!has_sd || !has_time) {
      return Error(422, "late-game requests need both 'sd' and 'time'");
    }
    return LateRecommend(s, body);
  }
  if (!artifacts_.utility) return NotLoaded("utility table");
  auto rec = Recommend(*space_, *artifacts_.utility, s);
  if (!rec.ok()) return Error(400, std::string(rec.status().message()));
  return ApiResponse{200, json{{"schema", kApiSchema},
                               {"regime", "normal"},
                               {"state", StateJson(s)},
                               {"action", ActionJson(rec->action)},
                               {"utility", rec->utility},
                               {"values", ValuesJson(rec->values)}}};
}

ApiResponse AdvisorService::LateRecommend(const GameState& base,
                                          const json& body) {
  int sd = 0, time = 0;
  if (!IntField(body, "sd", &sd) || !IntField(body, "time", &time)) {
    return Error(400, "'sd' and 'time' must be integers");
  }
  if (!late_solver_) return NotLoaded("late-game models");
  const LateGameState state{base, sd, time, Phase::kScrimmage};
  if (absl::Status st = late_solver_->Validate(state); !st.ok()) {
    return Error(400, std::string(st.message()));
  }
  std::lock_guard<std::mutex> lock(late_mu_);
  auto r = late_solver_->Solve(
      state, late_store_.get(),
      LateSolveLimits{config_.late.node_budget, config_.late.lookahead_depth});
  if (!r.ok()) return Error(400, std::string(r.status().message()));
  if (!r->terminal) {
    if (absl::Status st =
            late_store_->Save(JoinPath(artifacts_.dir, kLateGameFile));
        !st.ok()) {
      return Error(500, std::string(st.message()));
    }
  }
  json values = json::object();
  for (const auto& [a, v] : r->values) {
    values[std::string(LateActionName(a))] = v;
  }
  return ApiResponse{
      200,
      json{{"schema", kApiSchema},
           {"regime", "late"},
           {"state", StateJson(base)},
           {"sd", r->state.sd},
           {"time", r->state.time},
           {"terminal", r->terminal},
           {"action", r->action ? json(std::string(LateActionName(*r->action)))
                                : json(nullptr)},
           {"utility", r->utility},
           {"values", values},
           {"converged", r->converged},
           {"exact", r->exact},
           {"nodes_expanded", r->nodes_expanded},
           {"store_version", late_store_->version}}};
}

ApiResponse AdvisorService::Curve(const ApiRequest& request) {
  GameState s;
  if (!IntParam(request, "down", &s.down) ||
      !IntParam(request, "dist", &s.dist) ||
      !IntParam(request, "los", &s.los)) {
    return Error(400, "query needs integer down, dist and los");
  }
  if (!space_->IsValid(s)) {
    return Error(400, absl::StrCat("invalid state ", ToString(s)));
  }
  if (!artifacts_.utility) return NotLoaded("utility table");
  auto points = UtilityCurve(*space_, *artifacts_.utility, s);
  if (!points.ok()) return Error(400, std::string(points.status().message()));
  json series = json::array();
  for (const CurvePoint& p : *points) {
    series.push_back({{"resulting_los", p.resulting_los},
                      {"gain", p.gain},
                      {"successor", p.successor},
                      {"utility", p.utility}});
  }
  return ApiResponse{200, json{{"schema", kApiSchema},
                               {"state", StateJson(s)},
                               {"current_los", s.los},
                               {"first_down_los", s.los - s.dist},
                               {"points", series}}};
}

ApiResponse AdvisorService::WhatIf(const json& body) {
  GameState s;
  if (!body.contains("state")) return Error(400, "field 'state' is required");
  if (auto err = ParseState(body.at("state"), *space_, &s)) {
    return Error(400, *err);
  }
  if (!body.contains("action") || !body.at("action").is_string()) {
    return Error(400, "field 'action' must be an action name");
  }
  auto action = ParseAction(body.at("action").get<std::string>());
  if (!action.ok()) return Error(400, std::string(action.status().message()));
  int seed = 0;
  if (body.contains("seed") && !IntField(body, "seed", &seed)) {
    return Error(400, "field 'seed' must be an integer");
  }
  if (!artifacts_.utility) return NotLoaded("utility table");
  if (!rows_) return NotLoaded("transition table");
  const TransitionRow* row = rows_->Find(s, *action);
  if (row == nullptr) {
    return Error(400, absl::StrCat(std::string(ActionName(*action)),
                                   " is not available at ", ToString(s)));
  }
  const UtilityTable& table = *artifacts_.utility;
  std::map<std::string, double> summary = {
      {"touchdown", 0.0},           {"field_goal", 0.0}, {"safety", 0.0},
      {"defensive_touchdown", 0.0}, {"turnover", 0.0},   {"first_down", 0.0},
      {"short_of_line", 0.0}};
  std::vector<std::pair<double, const TransitionEntry*>> ranked;
  double value = 0.0;
  for (const TransitionEntry& e : row->entries) {
    value += e.probability * SuccessorUtility(*space_, table, e.successor);
    ranked.emplace_back(e.probability, &e);
    switch (e.successor.kind) {
      case Successor::Kind::kOffense:
        summary[e.successor.state.down == 1 ? "first_down" : "short_of_line"] +=
            e.probability;
        break;
      case Successor::Kind::kDefense:
        summary["turnover"] += e.probability;
        break;
      case Successor::Kind::kTerminal:
        switch (e.successor.terminal) {
          case TerminalKind::kOffTouchdown:
            summary["touchdown"] += e.probability;
            break;
          case TerminalKind::kOffFieldGoal:
            summary["field_goal"] += e.probability;
            break;
          case TerminalKind::kSafety:
            summary["safety"] += e.probability;
            break;
          case TerminalKind::kDefTouchdown:
            summary["defensive_touchdown"] += e.probability;
            break;
        }
        break;
    }
  }
  std::stable_sort(
      ranked.begin(), ranked.end(),
      [](const auto& a, const auto& b) { return a.first > b.first; });
  json top = json::array();
  for (int k = 0; k < std::min<int>(kTopOutcomes, ranked.size()); ++k) {
    const Successor& succ = ranked[k].second->successor;
    top.push_back({{"successor", ToString(succ)},
                   {"probability", ranked[k].first},
                   {"utility", SuccessorUtility(*space_, table, succ)}});
  }
  std::mt19937_64 rng(static_cast<uint64_t>(seed));
  const Successor& sampled = SampleEntry(*row, rng).successor;
  json next = {{"successor", ToString(sampled)},
               {"utility", SuccessorUtility(*space_, table, sampled)}};
  if (sampled.kind != Successor::Kind::kTerminal) {
    auto rec = Recommend(*space_, table, sampled.state);
    if (rec.ok()) {
      next["possession"] =
          sampled.kind == Successor::Kind::kOffense ? "offense" : "defense";
      next["state"] = StateJson(sampled.state);
      next["action"] = ActionJson(rec->action);
      next["state_utility"] = rec->utility;
      next["values"] = ValuesJson(rec->values);
    }
  } else {
    next["points"] = TerminalReward(sampled.terminal);
  }
  return ApiResponse{200, json{{"schema", kApiSchema},
                               {"state", StateJson(s)},
                               {"action", ActionName(*action)},
                               {"value", value},
                               {"summary", summary},
                               {"top_outcomes", top},
                               {"sampled", next},
                               {"seed", seed}}};
}

ApiResponse AdvisorService::SimulateDrive(const json& body) {
  GameState s;
  if (!body.contains("state")) return Error(400, "field 'state' is required");
  if (auto err = ParseState(body.at("state"), *space_, &s)) {
    return Error(400, *err);
  }
  std::vector<Action> choices;
  if (body.contains("choices")) {
    if (!body.at("choices").is_array()) {
      return Error(400, "field 'choices' must be an array of action names");
    }
    for (const json& c : body.at("choices")) {
      auto a = c.is_string() ? ParseAction(c.get<std::string>())
                             : absl::StatusOr<Action>(
                                   absl::InvalidArgumentError("not a string"));
      if (!a.ok()) return Error(400, "unknown action in 'choices'");
      choices.push_back(*a);
    }
  }
  int seed = 0;
  if (body.contains("seed") && !IntField(body, "seed", &seed)) {
    return Error(400, "field 'seed' must be an integer");
  }
  if (!artifacts_.utility) return NotLoaded("utility table");
  if (!rows_) return NotLoaded("transition table");
  const UtilityTable& table = *artifacts_.utility;
  std::mt19937_64 rng(static_cast<uint64_t>(seed));
  json steps = json::array();
  json result = nullptr;
  for (int i = 0; i < kMaxDriveSteps; ++i) {
    auto rec = Recommend(*space_, table, s);
    if (!rec.ok()) return Error(500, std::string(rec.status().message()));
    const Action chosen = i < static_cast<int>(choices.size())
                              ? choices[i]
                              : rec->action.value_or(Action::kRun);
    const TransitionRow* row = rows_->Find(s, chosen);
    if (row == nullptr) {
      return Error(
          400, absl::StrCat("step ", i, ": ", std::string(ActionName(chosen)),
                            " is not available at ", ToString(s)));
    }
    const Successor& next = SampleEntry(*row, rng).successor;
    steps.push_back(
        {{"state", StateJson(s)},
         {"recommended", ActionJson(rec->action)},
         {"utility", rec->utility},
         {"values", ValuesJson(rec->values)},
         {"chosen", ActionName(chosen)},
         {"outcome", ToString(next)},
         {"outcome_utility", SuccessorUtility(*space_, table, next)}});
    if (next.kind == Successor::Kind::kOffense) {
      s = next.state;
      continue;
    }
    if (next.kind == Successor::Kind::kDefense) {
      result = {{"end", "turnover"},
                {"points", 0},
                {"defense_state", StateJson(next.state)}};
    } else {
      result = {{"end", TerminalName(next.terminal)},
                {"points", TerminalReward(next.terminal)}};
    }
    break;
  }
  if (result.is_null()) result = {{"end", "step_limit"}, {"points", 0}};
  return ApiResponse{200, json{{"schema", kApiSchema},
                               {"seed", seed},
                               {"steps", steps},
                               {"result", result}}};
}

ApiResponse AdvisorService::Policy(const ApiRequest& request) {
  int down = 0, dist = 0;
  if (!IntParam(request, "down", &down) || !IntParam(request, "dist", &dist)) {
    return Error(400, "query needs integer down and dist");
  }
  if (down < 1 || down > 4 || dist < 1 || dist > space_->max_dist()) {
    return Error(400, absl::StrCat("invalid down ", down, " or dist ", dist));
  }
  if (!artifacts_.utility) return NotLoaded("utility table");
  const UtilityTable& table = *artifacts_.utility;
  json entries = json::array();
  for (int los = kMinLos; los <= kMaxLos; ++los) {
    const GameState s{down, std::min(dist, los), los};
    const int i = space_->IndexOf(s);
    const int pi = table.policy[i];
    entries.push_back(
        {{"los", los},
         {"dist", s.dist},
         {"action", pi >= 0
                        ? json(std::string(ActionName(static_cast<Action>(pi))))
                        : json(nullptr)},
         {"utility", table.utility[i]}});
  }
  return ApiResponse{200, json{{"schema", kApiSchema},
                               {"down", down},
                               {"dist", dist},
                               {"entries", entries}}};
}

void AdvisorService::Mount(httplib::Server* server) {
  server->set_default_headers(
      {{"Access-Control-Allow-Origin", "*"},
       {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
       {"Access-Control-Allow-Headers", "Content-Type"}});
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.params[k] = v;
    r.body = req.body;
    ApiResponse out = Handle(r);
    res.status = out.status;
    if (!out.body.is_null()) {
      res.set_content(out.body.dump(), "application/json");
    }
  };
  server->Get(".*", handler);
  server->Post(".*", handler);
  server->Options(".*", handler);
}

}  // namespace driveopt
