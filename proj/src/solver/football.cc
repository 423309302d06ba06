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

#include "driveopt/football.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "nlohmann/json.hpp"

namespace driveopt {
namespace {

std::string Shortest(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

bool ParseDouble(absl::string_view s, double* out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), *out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

std::string Fixed4(double x) {
  std::string s = absl::StrFormat("%.4f", x);
  return s == "-0.0000" ? "0.0000" : s;
}

absl::StatusOr<UtilityTable> SolveFootball(const StateSpace& space,
                                           const TransitionTable& table,
                                           const SolveOptions& options) {
  const MdpInstance mdp = ToMdp(space, table);
  if (auto s = mdp.Validate(); !s.ok()) return s;
  auto solved = SolveSemiOrdered(mdp, options);
  if (!solved.ok()) return solved.status();
  UtilityTable t;
  t.max_dist = space.max_dist();
  t.theta = solved->theta;
  t.sweeps = solved->sweeps;
  t.final_delta = solved->final_delta;
  t.converged = solved->converged;
  t.delta_trace = solved->delta_trace;
  t.utility = solved->utility;
  t.policy = solved->policy;
  t.semi_utility = solved->semi_utility;
  t.action_values.resize(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) {
    for (const MdpAction& a : mdp.actions[s]) {
      double v;
      if (ActionValue(mdp, s, a, t.utility, &t.semi_utility, &v)) {
        t.action_values[s][a.label] = v;
      }
    }
  }
  return t;
}

std::string UtilityTable::Serialize() const {
  nlohmann::json header = {{"schema", kUtilitySchema},
                           {"max_dist", max_dist},
                           {"theta", theta},
                           {"sweeps", sweeps},
                           {"final_delta", final_delta},
                           {"converged", converged},
                           {"delta_trace", delta_trace},
                           {"transitions_hash", transitions_hash},
                           {"semi_utility", semi_utility}};
  std::string out = header.dump();
  out += '\n';
  StateSpace space(max_dist);
  for (int i = 0; i < space.size(); ++i) {
    const GameState& s = space.StateAt(i);
    absl::StrAppend(
        &out, s.down, " ", s.dist, " ", s.los, " ", Shortest(utility[i]), " ",
        policy[i] < 0
            ? "NONE"
            : std::string(ActionName(static_cast<Action>(policy[i]))));
    for (const auto& v : action_values[i]) {
      absl::StrAppend(&out, " ", v.has_value() ? Shortest(*v) : "NA");
    }
    out += '\n';
  }
  return out;
}

absl::StatusOr<UtilityTable> UtilityTable::Deserialize(
    const std::string& text) {
  std::istringstream in(text);
  std::string line;
  UtilityTable t;
  if (!std::getline(in, line)) return absl::InvalidArgumentError("empty table");
  try {
    const auto h = nlohmann::json::parse(line);
    if (h.value("schema", "") != kUtilitySchema) {
      return absl::InvalidArgumentError(absl::StrCat(
          "utility table schema mismatch: expected ", kUtilitySchema));
    }
    t.max_dist = h.at("max_dist").get<int>();
    t.theta = h.at("theta").get<double>();
    t.sweeps = h.at("sweeps").get<int>();
    t.final_delta = h.at("final_delta").get<double>();
    t.converged = h.at("converged").get<bool>();
    t.delta_trace = h.at("delta_trace").get<std::vector<double>>();
    t.transitions_hash = h.at("transitions_hash").get<std::string>();
    t.semi_utility = h.at("semi_utility").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad utility header: ", e.what()));
  }
  StateSpace space(t.max_dist);
  t.utility.assign(space.size(), 0.0);
  t.policy.assign(space.size(), -1);
  t.action_values.resize(space.size());
  int line_no = 1;
  int seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto bad = [&](absl::string_view why) {
      return absl::InvalidArgumentError(
          absl::StrCat("utility line ", line_no, ": ", why));
    };
    std::vector<absl::string_view> f = absl::StrSplit(line, ' ');
    if (f.size() != 5 + kNumScrimmageActions) return bad("wrong field count");
    GameState s;
    if (!absl::SimpleAtoi(f[0], &s.down) || !absl::SimpleAtoi(f[1], &s.dist) ||
        !absl::SimpleAtoi(f[2], &s.los)) {
      return bad("bad state");
    }
    const int i = space.IndexOf(s);
    if (i < 0) return bad("state outside the space");
    if (!ParseDouble(f[3], &t.utility[i])) return bad("bad utility");
    if (f[4] != "NONE") {
      auto a = ParseAction(std::string(f[4]));
      if (!a.ok()) return bad(a.status().message());
      t.policy[i] = static_cast<int>(*a);
    }
    for (int a = 0; a < kNumScrimmageActions; ++a) {
      if (f[5 + a] == "NA") continue;
      double v;
      if (!ParseDouble(f[5 + a], &v)) return bad("bad action value");
      t.action_values[i][a] = v;
    }
    ++seen;
  }
  if (seen != space.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "utility table has ", seen, " states, expected ", space.size()));
  }
  return t;
}

absl::Status UtilityTable::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << Serialize();
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

absl::StatusOr<UtilityTable> UtilityTable::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return Deserialize(buf.str());
}

absl::StatusOr<Recommendation> Recommend(const StateSpace& space,
                                         const UtilityTable& table,
                                         const GameState& state) {
  const int i = space.IndexOf(state);
  if (i < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid state ", ToString(state)));
  }
  Recommendation r;
  r.state = state;
  r.utility = table.utility[i];
  if (table.policy[i] >= 0) r.action = static_cast<Action>(table.policy[i]);
  r.values = table.action_values[i];
  return r;
}

double SuccessorUtility(const StateSpace& space, const UtilityTable& table,
                        const Successor& successor) {
  switch (successor.kind) {
    case Successor::Kind::kTerminal:
      return TerminalReward(successor.terminal);
    case Successor::Kind::kOffense:
      return table.utility[space.IndexOf(successor.state)];
    case Successor::Kind::kDefense:
      return -table.semi_utility[successor.state.los - 1];
  }
  return 0.0;
}

absl::StatusOr<std::vector<CurvePoint>> UtilityCurve(const StateSpace& space,
                                                     const UtilityTable& table,
                                                     const GameState& state) {
  if (!space.IsValid(state)) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid state ", ToString(state)));
  }
  std::vector<CurvePoint> out;
  for (int g = state.los; g >= state.los - 100; --g) {
    auto next = space.Advance(state, g);
    if (!next.ok()) return next.status();
    out.push_back({state.los - g, g, ToString(*next),
                   SuccessorUtility(space, table, *next)});
  }
  return out;
}

}  // namespace driveopt
