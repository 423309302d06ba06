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

#include "driveopt/simeval.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "boost/math/statistics/bivariate_statistics.hpp"
#include "boost/math/statistics/univariate_statistics.hpp"
#include "nlohmann/json.hpp"

namespace driveopt {
namespace {

double UnitDraw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int ActionSlot(PlayType type) {
  switch (type) {
    case PlayType::kRun:
      return 0;
    case PlayType::kPass:
      return 1;
    case PlayType::kFieldGoal:
      return 2;
    case PlayType::kPunt:
      return 3;
    case PlayType::kKickoff:
      break;
  }
  return -1;
}

std::pair<double, double> MeanAndError(const std::vector<double>& x) {
  if (x.empty()) return {0.0, 0.0};
  if (x.size() == 1) return {x[0], 0.0};
  auto [mean, var] = boost::math::statistics::mean_and_sample_variance(x);
  return {mean, std::sqrt(var / x.size())};
}

}  // namespace

const TransitionEntry& SampleEntry(const TransitionRow& row,
                                   std::mt19937_64& rng) {
  const double u = UnitDraw(rng) * row.Total();
  double cumulative = 0.0;
  for (const TransitionEntry& e : row.entries) {
    cumulative += e.probability;
    if (u < cumulative) return e;
  }
  return row.entries.back();
}

// ---------------------------------------------------------------- callers

RowIndex::RowIndex(const StateSpace& space, const TransitionTable& table)
    : space_(space), rows_(space.size()) {
  for (auto& r : rows_) r.fill(nullptr);
  for (const TransitionRow& row : table.rows) {
    const int i = space.IndexOf(row.state);
    if (i >= 0) rows_[i][static_cast<int>(row.action)] = &row;
  }
}

const TransitionRow* RowIndex::Find(const GameState& s, Action a) const {
  const int i = space_.IndexOf(s);
  return i < 0 ? nullptr : rows_[i][static_cast<int>(a)];
}

Action OptimalCaller::Choose(const GameState& s, const RowIndex& rows,
                             std::mt19937_64&) const {
  const int i = space_.IndexOf(s);
  if (i >= 0 && table_.policy[i] >= 0) {
    const Action a = static_cast<Action>(table_.policy[i]);
    if (rows.Find(s, a) != nullptr) return a;
  }
  for (Action a : kScrimmageActions) {
    if (rows.Find(s, a) != nullptr) return a;
  }
  return Action::kRun;
}

int HistoricalCaller::DistBucket(int dist) const {
  for (int b = 0; b < 3; ++b) {
    if (dist <= config_.dist_bucket_upper[b]) return b;
  }
  return 3;
}

int HistoricalCaller::Zone(int los) const {
  for (int z = 0; z < 3; ++z) {
    if (los <= config_.zone_upper_los[z]) return z;
  }
  return 3;
}

int HistoricalCaller::Condition(const GameState& s) const {
  return ((s.down - 1) * kBuckets + DistBucket(s.dist)) * kZones + Zone(s.los);
}

HistoricalCaller HistoricalCaller::Fit(const std::vector<PlayRecord>& corpus,
                                       const std::vector<int>& seasons,
                                       const SimConfig& config) {
  HistoricalCaller caller;
  caller.config_ = config;
  const std::set<int> wanted(seasons.begin(), seasons.end());
  std::set<int> seen;
  for (const PlayRecord& r : corpus) {
    const int slot = ActionSlot(r.type);
    if (slot < 0 || r.down < 1 || r.down > 4 || r.los < kMinLos ||
        r.los > kMaxLos || r.dist < 1) {
      continue;
    }
    if (!wanted.empty() && !wanted.contains(r.season)) continue;
    seen.insert(r.season);
    ++caller.counts_[caller.Condition(r.state())][slot];
  }
  caller.seasons.assign(seen.begin(), seen.end());
  caller.Finish();
  return caller;
}

void HistoricalCaller::Finish() {
  std::array<std::array<int64_t, kNumScrimmageActions>, 4> by_down{};
  std::array<int64_t, kNumScrimmageActions> overall{};
  for (int c = 0; c < kConditions; ++c) {
    for (int a = 0; a < kNumScrimmageActions; ++a) {
      by_down[c / (kBuckets * kZones)][a] += counts_[c][a];
      overall[a] += counts_[c][a];
    }
  }
  auto normalize = [](const std::array<int64_t, kNumScrimmageActions>& n,
                      std::array<double, kNumScrimmageActions>* p) {
    int64_t total = 0;
    for (int64_t v : n) total += v;
    if (total == 0) return false;
    for (int a = 0; a < kNumScrimmageActions; ++a) {
      (*p)[a] = static_cast<double>(n[a]) / total;
    }
    return true;
  };
  for (int c = 0; c < kConditions; ++c) {
    auto& p = probabilities_[c];
    if (normalize(counts_[c], &p)) continue;
    if (normalize(by_down[c / (kBuckets * kZones)], &p)) continue;
    if (normalize(overall, &p)) continue;
    p = {0.5, 0.5, 0.0, 0.0};
  }
}

Action HistoricalCaller::Choose(const GameState& s, const RowIndex& rows,
                                std::mt19937_64& rng) const {
  const auto& p = probabilities_[Condition(s)];
  std::array<double, kNumScrimmageActions> w{};
  double total = 0.0;
  int available = 0;
  for (int a = 0; a < kNumScrimmageActions; ++a) {
    if (rows.Find(s, kScrimmageActions[a]) == nullptr) continue;
    ++available;
    w[a] = p[a];
    total += p[a];
  }
  if (total <= 0) {
    for (int a = 0; a < kNumScrimmageActions; ++a) {
      w[a] = rows.Find(s, kScrimmageActions[a]) != nullptr ? 1.0 : 0.0;
    }
    total = available;
  }
  const double u = UnitDraw(rng) * total;
  double cumulative = 0.0;
  int last = 0;
  for (int a = 0; a < kNumScrimmageActions; ++a) {
    if (w[a] <= 0) continue;
    cumulative += w[a];
    last = a;
    if (u < cumulative) return kScrimmageActions[a];
  }
  return kScrimmageActions[last];
}

std::string HistoricalCaller::Serialize() const {
  nlohmann::json j = {{"schema", kCallerSchema},
                      {"seasons", seasons},
                      {"dist_bucket_upper", config_.dist_bucket_upper},
                      {"zone_upper_los", config_.zone_upper_los},
                      {"counts", counts_}};
  return j.dump() + "\n";
}

absl::StatusOr<HistoricalCaller> HistoricalCaller::Deserialize(
    const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() ||
      j.value("schema", "") != kCallerSchema) {
    return absl::InvalidArgumentError("not a historical caller file");
  }
  HistoricalCaller caller;
  try {
    caller.seasons = j.at("seasons").get<std::vector<int>>();
    caller.config_.dist_bucket_upper =
        j.at("dist_bucket_upper").get<std::array<int, 3>>();
    caller.config_.zone_upper_los =
        j.at("zone_upper_los").get<std::array<int, 3>>();
    caller.counts_ = j.at("counts").get<decltype(caller.counts_)>();
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("historical caller: ", e.what()));
  }
  caller.Finish();
  return caller;
}

// ---------------------------------------------------------------- matchups

double SimulationReport::FirstMean() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const MatchupRow& r : rows) s += r.first_mean;
  return s / rows.size();
}

double SimulationReport::SecondMean() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const MatchupRow& r : rows) s += r.second_mean;
  return s / rows.size();
}

std::string SimulationReport::ToCsv() const {
  std::string out =
      "down,dist,los,utility,first_mean,first_se,second_mean,second_se\n";
  for (const MatchupRow& r : rows) {
    absl::StrAppend(&out, r.start.down, ",", r.start.dist, ",", r.start.los,
                    ",", Fixed4(r.utility), ",", Fixed4(r.first_mean), ",",
                    Fixed4(r.first_se), ",", Fixed4(r.second_mean), ",",
                    Fixed4(r.second_se), "\n");
  }
  return out;
}

std::string SimulationReport::ToJson() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const MatchupRow& r : rows) {
    rows_json.push_back({{"down", r.start.down},
                         {"dist", r.start.dist},
                         {"los", r.start.los},
                         {"utility", r.utility},
                         {"first_mean", r.first_mean},
                         {"first_se", r.first_se},
                         {"second_mean", r.second_mean},
                         {"second_se", r.second_se}});
  }
  nlohmann::json j = {{"schema", kSimulationSchema},
                      {"seed", seed},
                      {"reps", reps},
                      {"states", rows.size()},
                      {"capped", capped},
                      {"first_mean", FirstMean()},
                      {"second_mean", SecondMean()},
                      {"rows", rows_json}};
  return j.dump(1) + "\n";
}

std::vector<GameState> SampleStartStates(const StateSpace& space, int n,
                                         uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GameState> out;
  out.reserve(std::max(0, n));
  for (int i = 0; i < n; ++i) {
    GameState s;
    s.down = std::uniform_int_distribution<int>(1, 4)(rng);
    s.los = std::uniform_int_distribution<int>(kMinLos, kMaxLos)(rng);
    if (s.down == 1) {
      s.dist = std::min(10, s.los);
    } else {
      const int top = std::min({14, s.los, space.max_dist()});
      s.dist = std::uniform_int_distribution<int>(1, top)(rng);
    }
    out.push_back(s);
  }
  return out;
}

int PlayUntilScore(const GameState& start, const Caller& first,
                   const Caller& second, const RowIndex& rows,
                   int possession_cap, std::mt19937_64& rng, bool* capped) {
  *capped = false;
  GameState s = start;
  int side = 0;
  int possessions = 1;
  while (true) {
    const Caller& caller = side == 0 ? first : second;
    const TransitionRow* row = rows.Find(s, caller.Choose(s, rows, rng));
    if (row == nullptr || row->entries.empty()) {
      *capped = true;
      return 0;
    }
    const Successor& next = SampleEntry(*row, rng).successor;
    switch (next.kind) {
      case Successor::Kind::kOffense:
        s = next.state;
        break;
      case Successor::Kind::kDefense:
        s = next.state;
        side ^= 1;
        if (++possessions > possession_cap) {
          *capped = true;
          return 0;
        }
        break;
      case Successor::Kind::kTerminal: {
        const int points = TerminalReward(next.terminal);
        return side == 0 ? points : -points;
      }
    }
  }
}

SimulationReport SimulateMatchups(const StateSpace& space,
                                  const TransitionTable& table,
                                  const UtilityTable& utility, const Caller& a,
                                  const Caller& b, int n_states, int reps,
                                  uint64_t seed, const SimConfig& config,
                                  int jobs) {
  SimulationReport report;
  report.seed = seed;
  report.reps = reps;
  if (reps <= 0 || n_states <= 0) return report;
  const RowIndex rows(space, table);
  const std::vector<GameState> starts =
      SampleStartStates(space, n_states, seed);
  report.rows.resize(starts.size());
  std::atomic<int64_t> capped{0};
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < static_cast<int>(starts.size()); i = next++) {
      MatchupRow& row = report.rows[i];
      row.start = starts[i];
      row.utility = utility.utility[space.IndexOf(starts[i])];
      for (int side = 0; side < 2; ++side) {
        const Caller& first = side == 0 ? a : b;
        const Caller& second = side == 0 ? b : a;
        std::vector<double> points(reps);
        for (int r = 0; r < reps; ++r) {
          std::mt19937_64 rng(MixSeed(MixSeed(MixSeed(seed, i), side), r));
          bool hit = false;
          points[r] = PlayUntilScore(starts[i], first, second, rows,
                                     config.possession_cap, rng, &hit);
          if (hit) ++capped;
        }
        auto [mean, se] = MeanAndError(points);
        (side == 0 ? row.first_mean : row.second_mean) = mean;
        (side == 0 ? row.first_se : row.second_se) = se;
      }
    }
  };
  std::vector<std::thread> threads;
  for (int t = 1; t < std::max(1, jobs); ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  report.capped = capped;
  return report;
}

// ---------------------------------------------------------------- teams

std::string TeamReport::ToCsv() const {
  std::string out = "team,plays,agreed,fraction\n";
  for (const TeamScore& t : teams) {
    absl::StrAppend(&out, t.team, ",", t.plays, ",", t.agreed, ",",
                    Fixed4(t.fraction), "\n");
  }
  return out;
}

TeamReport ScoreTeamOptimality(const std::vector<PlayRecord>& eval,
                               const StateSpace& space,
                               const UtilityTable& table) {
  std::map<std::string, TeamScore> teams;
  int64_t outside = 0;
  for (const PlayRecord& r : eval) {
    TeamScore& t = teams[r.offense];
    t.team = r.offense;
    if (!r.is_scrimmage()) continue;
    const GameState s{r.down, std::min({r.dist, r.los, space.max_dist()}),
                      r.los};
    const int i = space.IndexOf(s);
    if (i < 0) {
      ++outside;
      continue;
    }
    ++t.plays;
    const Action called =
        r.type == PlayType::kRun ? Action::kRun : Action::kPass;
    if (table.policy[i] == static_cast<int>(called)) ++t.agreed;
  }
  TeamReport report;
  for (auto& [name, t] : teams) {
    if (t.plays == 0) {
      report.notes.push_back(
          absl::StrCat("team ", name, " excluded: no run or pass plays"));
      continue;
    }
    t.fraction = static_cast<double>(t.agreed) / t.plays;
    report.teams.push_back(t);
  }
  if (outside > 0) {
    report.notes.push_back(
        absl::StrCat(outside, " plays outside the state space skipped"));
  }
  return report;
}

// ---------------------------------------------------------------- calibration

std::string CalibrationReport::ToCsv() const {
  std::string out = "bin,lower,upper,n,mean_prediction,mean_outcome,gap\n";
  for (const CalibrationBin& b : bins) {
    absl::StrAppend(&out, b.index, ",", Fixed4(b.index / 100.0), ",",
                    Fixed4((b.index + 1) / 100.0), ",", b.n, ",",
                    Fixed4(b.mean_prediction), ",", Fixed4(b.mean_outcome), ",",
                    Fixed4(b.gap()), "\n");
  }
  return out;
}

absl::StatusOr<CalibrationReport> Calibrate(
    const std::vector<Prediction>& predictions) {
  std::array<CalibrationBin, 100> bins{};
  for (const Prediction& p : predictions) {
    if (!(p.utility >= 0.0 && p.utility <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("prediction ", p.utility, " outside [0, 1]"));
    }
    if (p.outcome != 0.0 && p.outcome != 0.5 && p.outcome != 1.0) {
      return absl::InvalidArgumentError(
          absl::StrCat("outcome ", p.outcome, " is not 0, 0.5 or 1"));
    }
    const int k = std::min(99, static_cast<int>(p.utility * 100));
    CalibrationBin& b = bins[k];
    ++b.n;
    b.mean_prediction += p.utility;
    b.mean_outcome += p.outcome;
  }
  CalibrationReport report;
  for (int k = 0; k < 100; ++k) {
    CalibrationBin b = bins[k];
    if (b.n == 0) continue;
    b.index = k;
    b.mean_prediction /= b.n;
    b.mean_outcome /= b.n;
    report.max_abs_gap = std::max(report.max_abs_gap, std::abs(b.gap()));
    report.bins.push_back(b);
  }
  return report;
}

std::vector<Prediction> CalibratedStream(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Prediction> out(std::max(n, 0));
  for (Prediction& p : out) {
    p.utility = unit(rng);
    p.outcome = unit(rng) < p.utility ? 1.0 : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------- EP

absl::StatusOr<std::vector<EpRow>> ParseEpCsv(const std::string& text) {
  std::vector<std::string> lines = absl::StrSplit(text, '\n');
  if (lines.empty()) return absl::InvalidArgumentError("empty EP file");
  std::map<std::string, int> column;
  std::vector<std::string> header =
      absl::StrSplit(absl::StripSuffix(lines[0], "\r"), ',');
  for (size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
  for (const char* name : {"down", "dist", "los", "ep"}) {
    if (!column.contains(name)) {
      return absl::InvalidArgumentError(
          absl::StrCat("EP file lacks column ", name));
    }
  }
  std::vector<EpRow> rows;
  for (size_t n = 1; n < lines.size(); ++n) {
    const absl::string_view line = absl::StripSuffix(lines[n], "\r");
    if (line.empty()) continue;
    std::vector<std::string> f = absl::StrSplit(line, ',');
    EpRow row;
    if (f.size() != header.size() ||
        !absl::SimpleAtoi(f[column["down"]], &row.state.down) ||
        !absl::SimpleAtoi(f[column["dist"]], &row.state.dist) ||
        !absl::SimpleAtoi(f[column["los"]], &row.state.los) ||
        !absl::SimpleAtod(f[column["ep"]], &row.ep)) {
      return absl::InvalidArgumentError(
          absl::StrCat("EP file line ", n + 1, " is malformed"));
    }
    rows.push_back(row);
  }
  return rows;
}

std::string EpComparison::ToCsv() const {
  std::string out = "down,dist,los,utility,ep\n";
  for (const EpPoint& p : points) {
    absl::StrAppend(&out, p.state.down, ",", p.state.dist, ",", p.state.los,
                    ",", Fixed4(p.utility), ",", Fixed4(p.ep), "\n");
  }
  return out;
}

absl::StatusOr<EpComparison> CompareExpectedPoints(
    const std::vector<EpRow>& rows, const StateSpace& space,
    const UtilityTable& table) {
  EpComparison c;
  c.rows = static_cast<int64_t>(rows.size());
  std::vector<double> u, ep;
  for (const EpRow& r : rows) {
    const int i = space.IndexOf(r.state);
    if (i < 0) continue;
    c.points.push_back(EpPoint{r.state, table.utility[i], r.ep});
    u.push_back(table.utility[i]);
    ep.push_back(r.ep);
  }
  c.matched = static_cast<int64_t>(c.points.size());
  c.coverage = static_cast<double>(c.matched) / space.size();
  if (c.matched < 2) {
    return absl::FailedPreconditionError(
        "fewer than two EP rows match the state space");
  }
  c.correlation = boost::math::statistics::correlation_coefficient(u, ep);
  if (!std::isfinite(c.correlation)) {
    return absl::FailedPreconditionError(
        "correlation undefined for constant utilities or EP values");
  }
  double diff = 0.0;
  for (size_t k = 0; k < u.size(); ++k) diff += u[k] - ep[k];
  c.mean_difference = diff / u.size();
  return c;
}

}  // namespace driveopt
