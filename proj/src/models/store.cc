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

#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "driveopt/models.h"

namespace driveopt {
namespace {

using nlohmann::json;

json MassJson(const IntMass& m) {
  return json{{"lo", m.empty() ? 0 : m.lo()}, {"p", m.probabilities()}};
}

IntMass MassFrom(const json& j) {
  return IntMass(j.at("lo").get<int>(), j.at("p").get<std::vector<double>>());
}

json DrawJson(const MixtureDraw& d) {
  return json{{"w", d.weights}, {"mu", d.means}, {"var", d.variance}};
}

MixtureDraw DrawFrom(const json& j) {
  MixtureDraw d;
  d.weights = j.at("w").get<std::vector<double>>();
  d.means = j.at("mu").get<std::vector<double>>();
  d.variance = j.at("var").get<double>();
  return d;
}

json StateJson(const GameState& s) {
  return json::array({s.down, s.dist, s.los});
}

GameState StateFrom(const json& j) {
  return GameState{j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>()};
}

json TimeFitJson(const TimeFit& t) {
  return json{
      {"n", t.n}, {"summary", DrawJson(t.summary)}, {"mass", MassJson(t.mass)}};
}

TimeFit TimeFitFrom(const json& j) {
  TimeFit t;
  t.n = j.at("n").get<int>();
  t.summary = DrawFrom(j.at("summary"));
  t.mass = MassFrom(j.at("mass"));
  return t;
}

absl::StatusOr<TimeFamily> FamilyFrom(const std::string& name) {
  for (TimeFamily f : {TimeFamily::kRun, TimeFamily::kPass, TimeFamily::kPunt,
                       TimeFamily::kFieldGoal, TimeFamily::kKickoff}) {
    if (TimeFamilyName(f) == name) return f;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown time family: ", name));
}

}  // namespace

std::string ModelStore::Serialize() const {
  std::ostringstream out;
  json rho_rows = json::array();
  for (int los = kMinLos; los <= kMaxLos; ++los)
    rho_rows.push_back(rho.at(los));
  json header = {
      {"schema", kModelSchema},
      {"max_dist", max_dist},
      {"seed", seed},
      {"config_hash", config_hash},
      {"muff_rate", muff_rate},
      {"global_interception_rate", global_interception_rate},
      {"turnover",
       {{"fumble_rate_run", turnover.fumble_rate_run},
        {"fumble_rate_pass", turnover.fumble_rate_pass},
        {"fumble_sd", turnover.fumble_sd},
        {"interception_sd", turnover.interception_sd}}},
      {"rho", rho_rows},
      {"tau", tau.tau},
      {"warnings", warnings},
  };
  out << header.dump() << '\n';
  for (const auto& r : run) {
    if (!r.has_value()) continue;
    out << json{{"kind", "run"},
                {"state", StateJson(r->state)},
                {"n", r->n},
                {"shortfall", r->shortfall},
                {"degenerate", r->degenerate},
                {"summary", DrawJson(r->summary)},
                {"mass", MassJson(r->gain_mass)}}
               .dump()
        << '\n';
  }
  for (const auto& p : pass) {
    if (!p.has_value()) continue;
    out << json{{"kind", "pass"},
                {"state", StateJson(p->state)},
                {"n", p->n},
                {"shortfall", p->shortfall},
                {"counts", p->counts},
                {"dirichlet", p->dirichlet},
                {"probabilities", p->probabilities},
                {"pos_shape", p->pos_shape},
                {"pos_rate", p->pos_rate},
                {"gain_shape", p->gain_shape},
                {"neg_mass", p->neg_mass},
                {"interception_rate", p->interception_rate}}
               .dump()
        << '\n';
  }
  for (const PuntModel& p : punt) {
    out << json{{"kind", "punt"},
                {"los", p.los},
                {"source_los", p.source_los},
                {"n", p.n},
                {"available", p.available},
                {"summary", DrawJson(p.summary)},
                {"mass", MassJson(p.receive_mass)},
                {"mode", p.mode}}
               .dump()
        << '\n';
  }
  out << json{{"kind", "field_goal"},
              {"available", field_goal.available},
              {"intercept", field_goal.intercept},
              {"slope", field_goal.slope},
              {"zero_from_los", field_goal.zero_from_los},
              {"snap_offset", field_goal.snap_offset},
              {"n", field_goal.n}}
             .dump()
      << '\n';
  out << json{{"kind", "kickoff"},
              {"available", kickoff.available},
              {"n", kickoff.n},
              {"mass", MassJson(kickoff.receive_mass)}}
             .dump()
      << '\n';
  for (const auto& [key, fit] : time.keyed()) {
    json j = TimeFitJson(fit);
    j["kind"] = "time";
    j["family"] = std::string(TimeFamilyName(key.family));
    j["sd_sign"] = key.sd_sign;
    j["over_five_minutes"] = key.over_five_minutes;
    j["fourth_down"] = key.fourth_down;
    out << j.dump() << '\n';
  }
  for (const auto& [family, fit] : time.family()) {
    json j = TimeFitJson(fit);
    j["kind"] = "time_family";
    j["family"] = std::string(TimeFamilyName(family));
    out << j.dump() << '\n';
  }
  return out.str();
}

absl::StatusOr<ModelStore> ModelStore::Deserialize(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ModelStore store;
  int line_no = 0;
  std::optional<StateSpace> space;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = json::parse(line);
      if (line_no == 1) {
        if (j.value("schema", "") != kModelSchema) {
          return absl::InvalidArgumentError(absl::StrCat(
              "model store schema mismatch: expected ", kModelSchema));
        }
        store.max_dist = j.at("max_dist").get<int>();
        store.seed = j.at("seed").get<uint64_t>();
        store.config_hash = j.at("config_hash").get<std::string>();
        store.muff_rate = j.at("muff_rate").get<double>();
        store.global_interception_rate =
            j.at("global_interception_rate").get<double>();
        const json& t = j.at("turnover");
        store.turnover.fumble_rate_run = t.at("fumble_rate_run").get<double>();
        store.turnover.fumble_rate_pass =
            t.at("fumble_rate_pass").get<double>();
        store.turnover.fumble_sd = t.at("fumble_sd").get<double>();
        store.turnover.interception_sd = t.at("interception_sd").get<double>();
        const json& rho = j.at("rho");
        for (int los = kMinLos; los <= kMaxLos; ++los) {
          store.rho.Set(los, rho.at(los - 1).get<CategoryVector>());
        }
        store.tau.tau = j.at("tau").get<std::vector<double>>();
        store.warnings = j.at("warnings").get<std::vector<std::string>>();
        space.emplace(store.max_dist);
        store.run.assign(space->size(), std::nullopt);
        store.pass.assign(space->size(), std::nullopt);
        store.punt.resize(kMaxLos);
        continue;
      }
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "run" || kind == "pass") {
        const GameState s = StateFrom(j.at("state"));
        const int index = space->IndexOf(s);
        if (index < 0) {
          return absl::InvalidArgumentError(
              absl::StrCat("line ", line_no, ": state outside the space"));
        }
        if (kind == "run") {
          RunModel m;
          m.state = s;
          m.n = j.at("n").get<int>();
          m.shortfall = j.at("shortfall").get<bool>();
          m.degenerate = j.at("degenerate").get<bool>();
          m.summary = DrawFrom(j.at("summary"));
          m.gain_mass = MassFrom(j.at("mass"));
          store.run[index] = std::move(m);
        } else {
          PassModel m;
          m.state = s;
          m.n = j.at("n").get<int>();
          m.shortfall = j.at("shortfall").get<bool>();
          m.counts = j.at("counts").get<CategoryVector>();
          m.dirichlet = j.at("dirichlet").get<CategoryVector>();
          m.probabilities = j.at("probabilities").get<CategoryVector>();
          m.pos_shape = j.at("pos_shape").get<double>();
          m.pos_rate = j.at("pos_rate").get<double>();
          m.gain_shape = j.at("gain_shape").get<double>();
          m.neg_mass = j.at("neg_mass").get<std::vector<double>>();
          m.interception_rate = j.at("interception_rate").get<double>();
          store.pass[index] = std::move(m);
        }
      } else if (kind == "punt") {
        PuntModel p;
        p.los = j.at("los").get<int>();
        if (p.los < kMinLos || p.los > kMaxLos) {
          return absl::InvalidArgumentError(
              absl::StrCat("line ", line_no, ": punt los out of range"));
        }
        p.source_los = j.at("source_los").get<int>();
        p.n = j.at("n").get<int>();
        p.available = j.at("available").get<bool>();
        p.summary = DrawFrom(j.at("summary"));
        p.receive_mass = MassFrom(j.at("mass"));
        p.mode = j.at("mode").get<int>();
        store.punt[p.los - 1] = std::move(p);
      } else if (kind == "field_goal") {
        FieldGoalModel& f = store.field_goal;
        f.available = j.at("available").get<bool>();
        f.intercept = j.at("intercept").get<double>();
        f.slope = j.at("slope").get<double>();
        f.zero_from_los = j.at("zero_from_los").get<int>();
        f.snap_offset = j.at("snap_offset").get<int>();
        f.n = j.at("n").get<int>();
      } else if (kind == "kickoff") {
        store.kickoff.available = j.at("available").get<bool>();
        store.kickoff.n = j.at("n").get<int>();
        store.kickoff.receive_mass = MassFrom(j.at("mass"));
      } else if (kind == "time" || kind == "time_family") {
        auto family = FamilyFrom(j.at("family").get<std::string>());
        if (!family.ok()) return family.status();
        if (kind == "time") {
          TimeKey key;
          key.family = *family;
          key.sd_sign = j.at("sd_sign").get<int>();
          key.over_five_minutes = j.at("over_five_minutes").get<bool>();
          key.fourth_down = j.at("fourth_down").get<bool>();
          store.time.SetKeyed(key, TimeFitFrom(j));
        } else {
          store.time.SetFamily(*family, TimeFitFrom(j));
        }
      } else {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_no, ": unknown kind ", kind));
      }
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("model store line ", line_no, ": ", e.what()));
  }
  if (!space.has_value()) {
    return absl::InvalidArgumentError("model store is empty");
  }
  return store;
}

absl::Status ModelStore::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << Serialize();
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

absl::StatusOr<ModelStore> ModelStore::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return Deserialize(buf.str());
}

}  // namespace driveopt
