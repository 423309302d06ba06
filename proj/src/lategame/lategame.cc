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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "nlohmann/json.hpp"

namespace driveopt {
namespace {

constexpr int kSdBias = 64;
constexpr int kFallbackElapsed = 6;
constexpr int kFallbackKickoffLos = 75;

std::string Shortest(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

int SdSign(int sd) { return (sd > 0) - (sd < 0); }

LateGameState Scrimmage(const GameState& base, int sd, int time) {
  return LateGameState{base, sd, time, Phase::kScrimmage};
}

LateGameState Kick(int sd, int time) {
  return LateGameState{GameState{0, 0, 0}, sd, time, Phase::kKickoff};
}

}  // namespace

std::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kScrimmage:
      return "scrimmage";
    case Phase::kKickoff:
      return "kickoff";
    case Phase::kExtraPoint:
      return "extra-point";
  }
  return "?";
}

std::optional<Phase> ParsePhase(std::string_view name) {
  for (Phase p : {Phase::kScrimmage, Phase::kKickoff, Phase::kExtraPoint}) {
    if (PhaseName(p) == name) return p;
  }
  return std::nullopt;
}

std::string ToString(const LateGameState& s) {
  std::string out = std::string(PhaseName(s.phase));
  if (s.phase == Phase::kScrimmage) {
    absl::StrAppend(&out, " ", ToString(s.base));
  }
  absl::StrAppend(&out, " sd=", s.sd, " time=", s.time);
  return out;
}

std::string_view LateActionName(LateAction action) {
  switch (action) {
    case LateAction::kRun:
      return "RUN";
    case LateAction::kPass:
      return "PASS";
    case LateAction::kFieldGoal:
      return "FG";
    case LateAction::kPunt:
      return "PUNT";
    case LateAction::kExtraPoint:
      return "XP";
    case LateAction::kTwoPoint:
      return "TWO_POINT";
    case LateAction::kKickoff:
      return "KICKOFF";
  }
  return "?";
}

double TerminalWinUtility(int sd) {
  if (sd > 0) return 1.0;
  if (sd < 0) return 0.0;
  return 0.5;
}

// ---------------------------------------------------------------- store

uint64_t LateGameStore::Key(const LateGameState& s) {
  const bool scrimmage = s.phase == Phase::kScrimmage;
  uint64_t key = static_cast<uint64_t>(s.phase);
  key = (key << 3) | (scrimmage ? s.base.down : 0);
  key = (key << 7) | (scrimmage ? s.base.dist : 0);
  key = (key << 7) | (scrimmage ? s.base.los : 0);
  key = (key << 7) | static_cast<uint64_t>(s.sd + kSdBias);
  key = (key << 10) | static_cast<uint64_t>(s.time);
  return key;
}

LateGameState LateGameStore::Unpack(uint64_t key) {
  LateGameState s;
  s.time = static_cast<int>(key & 1023);
  key >>= 10;
  s.sd = static_cast<int>(key & 127) - kSdBias;
  key >>= 7;
  s.base.los = static_cast<int>(key & 127);
  key >>= 7;
  s.base.dist = static_cast<int>(key & 127);
  key >>= 7;
  s.base.down = static_cast<int>(key & 7);
  key >>= 3;
  s.phase = static_cast<Phase>(key);
  return s;
}

const LateEntry* LateGameStore::Find(const LateGameState& s) const {
  auto it = entries_.find(Key(s));
  return it == entries_.end() ? nullptr : &it->second;
}

void LateGameStore::Put(const LateGameState& s, const LateEntry& entry) {
  entries_[Key(s)] = entry;
}

std::string LateGameStore::Serialize() const {
  std::vector<uint64_t> keys;
  keys.reserve(entries_.size());
  for (const auto& [k, _] : entries_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  nlohmann::json header = {{"schema", kLateGameSchema},
                           {"version", version},
                           {"models_hash", models_hash},
                           {"transitions_hash", transitions_hash},
                           {"entries", keys.size()}};
  std::string out = header.dump() + "\n";
  for (uint64_t k : keys) {
    const LateGameState s = Unpack(k);
    const LateEntry& e = entries_.at(k);
    absl::StrAppend(&out, std::string(PhaseName(s.phase)), " ", s.base.down,
                    " ", s.base.dist, " ", s.base.los, " ", s.sd, " ", s.time,
                    " ", Shortest(e.utility), " ", static_cast<int>(e.action),
                    " ", e.exact ? 1 : 0, "\n");
  }
  return out;
}

absl::StatusOr<LateGameStore> LateGameStore::Deserialize(
    const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError("empty late-game store");
  }
  LateGameStore store;
  nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("schema", "") != kLateGameSchema) {
    return absl::InvalidArgumentError("not a late-game store");
  }
  store.version = header.value("version", int64_t{0});
  store.models_hash = header.value("models_hash", "");
  store.transitions_hash = header.value("transitions_hash", "");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = absl::StrSplit(line, ' ');
    auto bad = [&] {
      return absl::InvalidArgumentError(
          absl::StrCat("late-game store line ", line_no, " is malformed"));
    };
    if (f.size() != 9) return bad();
    auto phase = ParsePhase(f[0]);
    if (!phase) return bad();
    LateGameState s;
    s.phase = *phase;
    LateEntry e;
    int action = 0, exact = 0;
    auto parse_int = [](const std::string& t, int* v) {
      auto r = std::from_chars(t.data(), t.data() + t.size(), *v);
      return r.ec == std::errc() && r.ptr == t.data() + t.size();
    };
    auto r = std::from_chars(f[6].data(), f[6].data() + f[6].size(), e.utility);
    if (r.ec != std::errc() || !parse_int(f[1], &s.base.down) ||
        !parse_int(f[2], &s.base.dist) || !parse_int(f[3], &s.base.los) ||
        !parse_int(f[4], &s.sd) || !parse_int(f[5], &s.time) ||
        !parse_int(f[7], &action) || !parse_int(f[8], &exact)) {
      return bad();
    }
    if (s.time < 0 || s.time > 1023 || std::abs(s.sd) >= kSdBias) return bad();
    e.action = static_cast<int8_t>(action);
    e.exact = exact != 0;
    store.Put(s, e);
  }
  return store;
}

absl::Status LateGameStore::Save(const std::string& path) {
  ++version;
  // Readers never see a partial store.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", tmp));
    out << Serialize();
    if (!out) return absl::DataLossError(absl::StrCat("short write to ", tmp));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot rename ", tmp, ": ", ec.message()));
  }
  return absl::OkStatus();
}

absl::StatusOr<LateGameStore> LateGameStore::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return Deserialize(buf.str());
}

// ---------------------------------------------------------------- solver

struct LateGameSolver::Search {
  LateGameStore* store = nullptr;
  int budget = 0;
  int expanded = 0;
  bool exhausted = false;
  absl::flat_hash_map<uint64_t, LateEntry> visited;
};

LateGameSolver::LateGameSolver(const StateSpace& space,
                               const TransitionTable& transitions,
                               const ModelStore& models,
                               const LateGameConfig& config)
    : space_(space),
      transitions_(transitions),
      models_(models),
      config_(config) {
  const int n = std::max(1, config_.n_draws);
  for (TimeFamily family :
       {TimeFamily::kRun, TimeFamily::kPass, TimeFamily::kPunt,
        TimeFamily::kFieldGoal, TimeFamily::kKickoff}) {
    for (int sign : {-1, 0, 1}) {
      for (bool fourth : {false, true}) {
        const TimeKey key{family, sign, false, fourth};
        std::map<int, double> grouped;
        if (const TimeFit* fit = models_.time.Lookup(key);
            fit != nullptr && fit->mass.Total() > 0) {
          for (int k = 0; k < n; ++k) {
            grouped[fit->mass.Quantile((k + 0.5) / n)] += 1.0 / n;
          }
        } else {
          grouped[kFallbackElapsed] = 1.0;
        }
        draws_[key].assign(grouped.begin(), grouped.end());
      }
    }
  }
}

int LateGameSolver::ClampSd(int sd) const {
  return std::clamp(sd, -config_.sd_clamp, config_.sd_clamp);
}

const std::vector<std::pair<int, double>>& LateGameSolver::TimeDraws(
    TimeFamily family, int sd, bool fourth_down) const {
  return draws_.at(TimeKey{family, SdSign(sd), false, fourth_down});
}

absl::Status LateGameSolver::Validate(const LateGameState& s) const {
  if (s.time < 0 || s.time > config_.max_time) {
    return absl::InvalidArgumentError(
        absl::StrCat("time ", s.time, " outside [0, ", config_.max_time, "]"));
  }
  if (s.phase == Phase::kScrimmage && !space_.IsValid(s.base)) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid state ", ToString(s.base)));
  }
  return absl::OkStatus();
}

double LateGameSolver::Heuristic(const LateGameState& s) const {
  const double spread = 3.5 * std::sqrt(s.time / 60.0 + 0.1);
  return NormalCdf(s.sd / spread);
}

double LateGameSolver::Value(Search& search, const LateGameState& s, int depth,
                             bool* exact) {
  if (s.time == 0 && s.phase != Phase::kExtraPoint) {
    return TerminalWinUtility(s.sd);
  }
  const uint64_t key = LateGameStore::Key(s);
  if (auto it = search.visited.find(key); it != search.visited.end()) {
    *exact = *exact && it->second.exact;
    return it->second.utility;
  }
  const LateEntry* stored = search.store->Find(s);
  if (stored != nullptr && stored->exact) return stored->utility;
  if (depth <= 0 || search.budget <= 0) {
    if (depth > 0) search.exhausted = true;
    *exact = false;
    return stored != nullptr ? stored->utility : Heuristic(s);
  }
  bool sub_exact = true;
  LateEntry entry = Expand(search, s, depth, nullptr, &sub_exact);
  *exact = *exact && sub_exact;
  return entry.utility;
}

double LateGameSolver::SuccessorValue(Search& search,
                                      const Successor& successor, int sd,
                                      int time, int depth, bool* exact) {
  auto try_value = [&](int scorer_sd) {
    return Value(search,
                 LateGameState{GameState{0, 0, 0}, ClampSd(scorer_sd), time,
                               Phase::kExtraPoint},
                 depth, exact);
  };
  switch (successor.kind) {
    case Successor::Kind::kOffense:
      return Value(search, Scrimmage(successor.state, sd, time), depth, exact);
    case Successor::Kind::kDefense:
      return 1.0 - Value(search, Scrimmage(successor.state, ClampSd(-sd), time),
                         depth, exact);
    case Successor::Kind::kTerminal:
      break;
  }
  switch (successor.terminal) {
    case TerminalKind::kOffTouchdown:
      return try_value(sd + 6);
    case TerminalKind::kOffFieldGoal:
      return Value(search, Kick(ClampSd(sd + 3), time), depth, exact);
    case TerminalKind::kSafety:
      return Value(search, Kick(ClampSd(sd - 2), time), depth, exact);
    case TerminalKind::kDefTouchdown:
      return 1.0 - try_value(-sd + 6);
  }
  return 0.0;
}

LateEntry LateGameSolver::Expand(
    Search& search, const LateGameState& s, int depth,
    std::vector<std::pair<LateAction, double>>* values, bool* exact) {
  LateEntry entry;
  entry.utility = -1.0;
  auto consider = [&](LateAction a, double v) {
    v = std::clamp(v, 0.0, 1.0);
    if (values != nullptr) values->emplace_back(a, v);
    if (v > entry.utility) {
      entry.utility = v;
      entry.action = static_cast<int8_t>(a);
    }
  };

  if (s.phase == Phase::kExtraPoint) {
    // Tries are untimed; the kickoff follows at the same clock.
    auto after = [&](int sd) {
      return Value(search, Kick(ClampSd(sd), s.time), depth, exact);
    };
    const double stay = after(s.sd);
    consider(LateAction::kExtraPoint, config_.extra_point * after(s.sd + 1) +
                                          (1 - config_.extra_point) * stay);
    consider(LateAction::kTwoPoint, config_.two_point * after(s.sd + 2) +
                                        (1 - config_.two_point) * stay);
    search.visited[LateGameStore::Key(s)] =
        LateEntry{entry.utility, entry.action, *exact};
    return entry;
  }

  --search.budget;
  ++search.expanded;
  if (s.phase == Phase::kKickoff) {
    double v = 0.0;
    for (const auto& [elapsed, w] :
         TimeDraws(TimeFamily::kKickoff, s.sd, false)) {
      const int t = std::max(0, s.time - elapsed);
      const int receiver_sd = ClampSd(-s.sd);
      if (!models_.kickoff.available) {
        v += w * (1.0 - Value(search,
                              Scrimmage(CanonicalFirstDown(kFallbackKickoffLos),
                                        receiver_sd, t),
                              depth - 1, exact));
        continue;
      }
      const IntMass& mass = models_.kickoff.receive_mass;
      for (int r = mass.lo(); r <= mass.hi(); ++r) {
        const double p = mass.at(r);
        if (p <= 0) continue;
        double u;
        if (r == 0) {
          u = Value(search,
                    LateGameState{GameState{0, 0, 0}, ClampSd(receiver_sd + 6),
                                  t, Phase::kExtraPoint},
                    depth - 1, exact);
        } else {
          u = Value(search, Scrimmage(CanonicalFirstDown(r), receiver_sd, t),
                    depth - 1, exact);
        }
        v += w * p * (1.0 - u);
      }
    }
    consider(LateAction::kKickoff, v);
  } else {
    const int index = space_.IndexOf(s.base);
    for (int r = transitions_.offsets[index];
         r < transitions_.offsets[index + 1]; ++r) {
      const TransitionRow& row = transitions_.rows[r];
      double v = 0.0;
      for (const auto& [elapsed, w] :
           TimeDraws(TimeFamilyOf(row.action), s.sd, s.base.down == 4)) {
        const int t = std::max(0, s.time - elapsed);
        double sum = 0.0;
        for (const TransitionEntry& e : row.entries) {
          sum += e.probability *
                 SuccessorValue(search, e.successor, s.sd, t, depth - 1, exact);
        }
        v += w * sum;
      }
      consider(static_cast<LateAction>(row.action), v);
    }
    if (entry.action < 0) {
      entry.utility = Heuristic(s);
      *exact = false;
    }
  }
  entry.exact = *exact;
  search.visited[LateGameStore::Key(s)] = entry;
  search.store->Put(s, entry);
  return entry;
}

absl::StatusOr<LateGameResult> LateGameSolver::Solve(
    const LateGameState& query, LateGameStore* store,
    const LateSolveLimits& limits) {
  if (absl::Status st = Validate(query); !st.ok()) return st;
  LateGameState s = query;
  s.sd = ClampSd(s.sd);
  if (s.phase != Phase::kScrimmage) s.base = GameState{0, 0, 0};
  LateGameResult result;
  result.state = s;
  result.store_version = store->version;
  if (s.time == 0 && s.phase != Phase::kExtraPoint) {
    result.terminal = true;
    result.utility = TerminalWinUtility(s.sd);
    result.converged = true;
    result.exact = true;
    return result;
  }
  Search search;
  search.store = store;
  search.budget = std::max(1, limits.node_budget);
  bool exact = true;
  LateEntry entry =
      Expand(search, s, std::max(1, limits.depth), &result.values, &exact);
  if (s.phase == Phase::kExtraPoint) store->Put(s, entry);
  result.utility = entry.utility;
  if (entry.action >= 0) result.action = static_cast<LateAction>(entry.action);
  result.nodes_expanded = search.expanded;
  result.converged = !search.exhausted;
  result.exact = exact;
  return result;
}

}  // namespace driveopt
