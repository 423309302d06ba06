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

#include "driveopt/transitions.h"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <thread>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "nlohmann/json.hpp"

namespace driveopt {
namespace {

class Accumulator {
 public:
  void Add(const Successor& s, double w) {
    const int slot = s.Slot();
    if (!used_[slot]) {
      used_[slot] = true;
      successor_[slot] = s;
    }
    p_[slot] += w;
  }

  absl::StatusOr<std::vector<TransitionEntry>> Finish(double prune) const {
    double total = 0.0;
    for (int i = 0; i < kNumSuccessorSlots; ++i) {
      if (used_[i] && p_[i] >= prune) total += p_[i];
    }
    if (!(total > 0)) return absl::InternalError("row has no mass");
    std::vector<TransitionEntry> out;
    for (int i = 0; i < kNumSuccessorSlots; ++i) {
      if (used_[i] && p_[i] >= prune) {
        out.push_back({successor_[i], p_[i] / total});
      }
    }
    return out;
  }

 private:
  std::array<double, kNumSuccessorSlots> p_{};
  std::array<Successor, kNumSuccessorSlots> successor_{};
  std::array<bool, kNumSuccessorSlots> used_{};
};

absl::Status AddGains(const StateSpace& space, const GameState& state,
                      const IntMass& mass, double weight, Accumulator* acc) {
  for (int g = mass.lo(); g <= mass.hi(); ++g) {
    const double p = mass.at(g);
    if (p <= 0) continue;
    auto next = space.Advance(state, g);
    if (!next.ok()) return next.status();
    acc->Add(*next, weight * p);
  }
  return absl::OkStatus();
}

void AddTurnovers(int los, double rate, double sd, Accumulator* acc) {
  for (const TurnoverOutcome& t : TurnoverMass(los, rate, sd)) {
    acc->Add(t.successor, t.probability);
  }
}

absl::Status Unavailable(Action action, const GameState& state) {
  return absl::NotFoundError(absl::StrCat(std::string(ActionName(action)),
                                          " model unavailable at ",
                                          ToString(state)));
}

}  // namespace

double TransitionRow::Total() const {
  double total = 0.0;
  for (const auto& e : entries) total += e.probability;
  return total;
}

absl::StatusOr<TransitionRow> BuildRow(const StateSpace& space,
                                       const ModelStore& store,
                                       const GameState& state, Action action,
                                       const TransitionOptions& options) {
  const int index = space.IndexOf(state);
  if (index < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("state outside the space: ", ToString(state)));
  }
  const TurnoverConfig& to = store.turnover;
  Accumulator acc;
  switch (action) {
    case Action::kRun: {
      if (index >= static_cast<int>(store.run.size()) ||
          !store.run[index].has_value()) {
        return Unavailable(action, state);
      }
      const double keep = 1.0 - to.fumble_rate_run;
      if (auto s =
              AddGains(space, state, store.run[index]->gain_mass, keep, &acc);
          !s.ok()) {
        return s;
      }
      AddTurnovers(state.los, to.fumble_rate_run, to.fumble_sd, &acc);
      break;
    }
    case Action::kPass: {
      if (index >= static_cast<int>(store.pass.size()) ||
          !store.pass[index].has_value()) {
        return Unavailable(action, state);
      }
      const PassModel& m = *store.pass[index];
      const double keep = 1.0 - m.interception_rate - to.fumble_rate_pass;
      if (auto s = AddGains(space, state, m.GainMass(), keep, &acc); !s.ok()) {
        return s;
      }
      AddTurnovers(state.los, m.interception_rate, to.interception_sd, &acc);
      AddTurnovers(state.los, to.fumble_rate_pass, to.fumble_sd, &acc);
      break;
    }
    case Action::kFieldGoal: {
      if (!store.field_goal.available) return Unavailable(action, state);
      const double p = store.field_goal.MakeProbability(state.los);
      acc.Add(Successor::Terminal(TerminalKind::kOffFieldGoal), p);
      acc.Add(Successor::Defense(100 - state.los), 1.0 - p);
      break;
    }
    case Action::kPunt: {
      if (static_cast<int>(store.punt.size()) < state.los ||
          !store.punt[state.los - 1].available) {
        return Unavailable(action, state);
      }
      const PuntModel& m = store.punt[state.los - 1];
      const IntMass& r = m.receive_mass;
      const double kept = 1.0 - store.muff_rate;
      for (int k = r.lo(); k <= r.hi(); ++k) {
        const double p = r.at(k);
        if (p <= 0) continue;
        acc.Add(k == 0 ? Successor::Terminal(TerminalKind::kDefTouchdown)
                       : Successor::Defense(k),
                kept * p);
      }
      acc.Add(Successor::Offense(CanonicalFirstDown(100 - m.mode)),
              store.muff_rate);
      break;
    }
    default:
      return absl::InvalidArgumentError("not a scrimmage action");
  }
  auto entries = acc.Finish(options.prune);
  if (!entries.ok()) return entries.status();
  return TransitionRow{state, action, *std::move(entries)};
}

TransitionTable BuildAll(const StateSpace& space, const ModelStore& store,
                         const TransitionOptions& options, int jobs) {
  const int n = space.size();
  std::vector<std::vector<TransitionRow>> per_state(n);
  std::vector<std::vector<std::string>> notes(n);
  auto build = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      for (Action a : kScrimmageActions) {
        auto row = BuildRow(space, store, space.StateAt(i), a, options);
        if (row.ok()) {
          per_state[i].push_back(*std::move(row));
        } else {
          notes[i].push_back(std::string(row.status().message()));
        }
      }
    }
  };
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    build(0, n);
  } else {
    std::vector<std::thread> workers;
    const int chunk = (n + jobs - 1) / jobs;
    for (int b = 0; b < n; b += chunk) {
      workers.emplace_back(build, b, std::min(n, b + chunk));
    }
    for (auto& w : workers) w.join();
  }
  TransitionTable table;
  table.max_dist = space.max_dist();
  table.offsets.reserve(n + 1);
  for (int i = 0; i < n; ++i) {
    table.offsets.push_back(static_cast<int>(table.rows.size()));
    for (auto& r : per_state[i]) table.rows.push_back(std::move(r));
    for (auto& note : notes[i]) table.report.push_back(std::move(note));
  }
  table.offsets.push_back(static_cast<int>(table.rows.size()));
  return table;
}

absl::StatusOr<Successor> SuccessorForSlot(const StateSpace& space,
                                           const GameState& state,
                                           Action action, int slot) {
  if (slot < 0 || slot >= kNumSuccessorSlots) {
    return absl::OutOfRangeError(absl::StrCat("bad slot ", slot));
  }
  if (slot < kNumTerminals) {
    return Successor::Terminal(static_cast<TerminalKind>(slot));
  }
  if (slot < kNumTerminals + kMaxLos) {
    const int los = slot - kNumTerminals + 1;
    if (action == Action::kPunt) {
      return Successor::Offense(CanonicalFirstDown(los));
    }
    return space.Advance(state, state.los - los);
  }
  return Successor::Defense(slot - kNumTerminals - kMaxLos + 1);
}

std::string TransitionTable::Serialize() const {
  nlohmann::json header = {{"schema", kTransitionSchema},
                           {"max_dist", max_dist},
                           {"store_hash", store_hash},
                           {"rows", rows.size()},
                           {"report", report}};
  std::string out = header.dump();
  out += '\n';
  char buf[32];
  for (const TransitionRow& r : rows) {
    absl::StrAppend(&out, r.state.down, " ", r.state.dist, " ", r.state.los,
                    " ", std::string(ActionName(r.action)));
    for (const TransitionEntry& e : r.entries) {
      auto res = std::to_chars(buf, buf + sizeof(buf), e.probability);
      absl::StrAppend(&out, " ", e.successor.Slot(), ":",
                      absl::string_view(buf, res.ptr - buf));
    }
    out += '\n';
  }
  return out;
}

absl::StatusOr<TransitionTable> TransitionTable::Deserialize(
    const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) return absl::InvalidArgumentError("empty table");
  TransitionTable table;
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.value("schema", "") != kTransitionSchema) {
      return absl::InvalidArgumentError(absl::StrCat(
          "transition table schema mismatch: expected ", kTransitionSchema));
    }
    table.max_dist = header.at("max_dist").get<int>();
    table.store_hash = header.at("store_hash").get<std::string>();
    table.report = header.at("report").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad transition header: ", e.what()));
  }
  StateSpace space(table.max_dist);
  int line_no = 1;
  int last_index = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<absl::string_view> parts = absl::StrSplit(line, ' ');
    auto bad = [&](absl::string_view why) {
      return absl::InvalidArgumentError(
          absl::StrCat("transition line ", line_no, ": ", why));
    };
    if (parts.size() < 5) return bad("too few fields");
    GameState s;
    if (!absl::SimpleAtoi(parts[0], &s.down) ||
        !absl::SimpleAtoi(parts[1], &s.dist) ||
        !absl::SimpleAtoi(parts[2], &s.los)) {
      return bad("bad state");
    }
    const int index = space.IndexOf(s);
    if (index < 0 || index < last_index) return bad("state out of order");
    auto action = ParseAction(std::string(parts[3]));
    if (!action.ok()) return bad(action.status().message());
    while (static_cast<int>(table.offsets.size()) <= index) {
      table.offsets.push_back(static_cast<int>(table.rows.size()));
    }
    last_index = index;
    TransitionRow row{s, *action, {}};
    for (size_t i = 4; i < parts.size(); ++i) {
      const size_t colon = parts[i].find(':');
      int slot;
      double p;
      if (colon == absl::string_view::npos ||
          !absl::SimpleAtoi(parts[i].substr(0, colon), &slot)) {
        return bad("bad entry");
      }
      const absl::string_view num = parts[i].substr(colon + 1);
      auto res = std::from_chars(num.data(), num.data() + num.size(), p);
      if (res.ec != std::errc()) return bad("bad probability");
      auto succ = SuccessorForSlot(space, s, *action, slot);
      if (!succ.ok()) return bad(succ.status().message());
      row.entries.push_back({*succ, p});
    }
    table.rows.push_back(std::move(row));
  }
  while (static_cast<int>(table.offsets.size()) <= space.size()) {
    table.offsets.push_back(static_cast<int>(table.rows.size()));
  }
  return table;
}

absl::Status TransitionTable::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << Serialize();
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

absl::StatusOr<TransitionTable> TransitionTable::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return Deserialize(buf.str());
}

MdpInstance ToMdp(const StateSpace& space, const TransitionTable& table) {
  MdpInstance m;
  m.num_states = space.size();
  m.terminal_utility.resize(kNumTerminals);
  for (int t = 0; t < kNumTerminals; ++t) {
    m.terminal_utility[t] = TerminalReward(static_cast<TerminalKind>(t));
  }
  for (int los = kMinLos; los <= kMaxLos; ++los) {
    m.semi_mirror.push_back(space.IndexOf(CanonicalFirstDown(los)));
  }
  m.actions.resize(m.num_states);
  for (int i = 0; i < m.num_states; ++i) {
    for (int r = table.offsets[i]; r < table.offsets[i + 1]; ++r) {
      const TransitionRow& row = table.rows[r];
      MdpAction a;
      a.label = static_cast<int>(row.action);
      a.outcomes.reserve(row.entries.size());
      for (const TransitionEntry& e : row.entries) {
        Outcome o;
        o.probability = e.probability;
        switch (e.successor.kind) {
          case Successor::Kind::kTerminal:
            o.kind = Outcome::Kind::kTerminal;
            o.index = static_cast<int>(e.successor.terminal);
            break;
          case Successor::Kind::kOffense:
            o.kind = Outcome::Kind::kState;
            o.index = space.IndexOf(e.successor.state);
            break;
          case Successor::Kind::kDefense:
            o.kind = Outcome::Kind::kSemi;
            o.index = e.successor.state.los - 1;
            break;
        }
        a.outcomes.push_back(o);
      }
      m.actions[i].push_back(std::move(a));
    }
  }
  return m;
}

}  // namespace driveopt
