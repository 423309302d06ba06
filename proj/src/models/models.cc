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

#include "driveopt/models.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>

#include "absl/strings/str_cat.h"

namespace driveopt {
namespace {

MixturePrior CenteredPrior(const std::vector<double>& data) {
  MixturePrior prior;
  if (!data.empty()) {
    prior.mean_prior_mean =
        std::accumulate(data.begin(), data.end(), 0.0) / data.size();
  }
  return prior;
}

uint64_t HashDoubles(uint64_t h, const std::vector<double>& v) {
  for (double x : v) {
    uint64_t bits;
    std::memcpy(&bits, &x, sizeof(bits));
    h = MixSeed(h, bits);
  }
  return h;
}

// Deterministic subsample of at most `limit` values.
std::vector<double> Subsample(std::vector<double> values, int limit,
                              uint64_t seed) {
  if (static_cast<int>(values.size()) <= limit) return values;
  std::mt19937_64 rng(seed);
  std::shuffle(values.begin(), values.end(), rng);
  values.resize(limit);
  return values;
}

}  // namespace

uint64_t ScenarioSeed(uint64_t master, std::string_view family,
                      uint64_t content) {
  return MixSeed(MixSeed(master, Fnv1a64(family)), content);
}

// ---------------------------------------------------------------- run

RunModel FitRun(const GameState& state, const std::vector<double>& gains,
                const RunConfig& run, const GibbsSettings& gibbs,
                uint64_t seed) {
  RunModel model;
  model.state = state;
  model.n = static_cast<int>(gains.size());
  MixtureFit fit =
      FitNormalMixture(gains, MixturePrior::FromRunConfig(run), gibbs, seed);
  model.degenerate = fit.degenerate;
  model.summary = fit.PosteriorMean();
  model.gain_mass = PredictiveMass(fit, state.los - 100, state.los);
  return model;
}

// ---------------------------------------------------------------- pass

std::string_view PassCategoryName(int category) {
  static constexpr std::string_view kNames[] = {"INC", "TD", "POS", "NEG",
                                                "TO"};
  return kNames[category];
}

PassCategory CategorizePass(const PlayRecord& record, double gain, int los) {
  if (record.pass_result == PassResult::kInterception || record.fumble_lost) {
    return kTo;
  }
  if (record.pass_result == PassResult::kIncomplete) return kInc;
  const long g = std::lround(gain);
  if (g >= los) return kTd;
  if (g >= 1) return kPos;
  if (g <= -1) return kNeg;
  return kInc;
}

RhoTable RhoTable::Fit(const std::vector<PlayRecord>& corpus,
                       const PassConfig& config) {
  std::array<CategoryVector, kMaxLos + 1> by_los{};
  for (const PlayRecord& r : corpus) {
    if (r.type != PlayType::kPass) continue;
    by_los[r.los][CategorizePass(r, r.yards_gained, r.los)] += 1.0;
  }
  RhoTable table;
  for (int los = kMinLos; los <= kMaxLos; ++los) {
    CategoryVector sum{};
    double total = 0.0;
    for (int w = config.rho_window;; ++w) {
      sum = CategoryVector{};
      for (int l = std::max(kMinLos, los - w); l <= std::min(kMaxLos, los + w);
           ++l) {
        for (int c = 0; c < kNumPassCategories; ++c) sum[c] += by_los[l][c];
      }
      total = std::accumulate(sum.begin(), sum.end(), 0.0);
      if (total >= config.rho_min_count || w >= kMaxLos) break;
    }
    if (los == 1) sum[kPos] = 0.0;
    total = std::accumulate(sum.begin(), sum.end(), 0.0);
    CategoryVector rho{};
    if (total > 0) {
      for (int c = 0; c < kNumPassCategories; ++c) rho[c] = sum[c] / total;
    } else {
      const int feasible = los == 1 ? 4 : 5;
      for (int c = 0; c < kNumPassCategories; ++c) {
        rho[c] = (los == 1 && c == kPos) ? 0.0 : 1.0 / feasible;
      }
    }
    table.rho_[los - 1] = rho;
  }
  return table;
}

TauTable TauTable::Fit(const std::vector<PlayRecord>& corpus,
                       const PassConfig& config) {
  const int support = -config.neg_floor;
  std::vector<double> counts(support, 1.0);
  for (const PlayRecord& r : corpus) {
    if (r.type != PlayType::kPass) continue;
    if (CategorizePass(r, r.yards_gained, r.los) != kNeg) continue;
    const int loss = std::clamp(-r.yards_gained, 1, support);
    counts[loss - 1] += 1.0;
  }
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  TauTable t;
  t.tau.resize(support);
  for (int i = 0; i < support; ++i) t.tau[i] = counts[i] / total;
  return t;
}

PassSample SummarizePassSample(const std::vector<PlayRecord>& corpus,
                               const MatchedSample& sample,
                               const PassConfig& config) {
  PassSample s;
  const int support = -config.neg_floor;
  s.neg_counts.assign(support, 0);
  const int los = sample.target.los;
  for (const MatchedPlay& p : sample.plays) {
    const PlayRecord& r = corpus[p.record_index];
    const PassCategory c = CategorizePass(r, p.scaled_gain, los);
    s.counts[c] += 1.0;
    ++s.n;
    if (r.pass_result == PassResult::kInterception) ++s.interceptions;
    if (c == kPos) s.pos_gains.push_back(p.scaled_gain);
    if (c == kNeg) {
      const int loss =
          std::clamp(static_cast<int>(-std::lround(p.scaled_gain)), 1, support);
      ++s.neg_counts[loss - 1];
    }
  }
  return s;
}

double CompoundGammaCdf(double y, double shape, double rate_shape,
                        double rate_rate) {
  if (y <= 0) return 0.0;
  return boost::math::ibeta(shape, rate_shape, y / (y + rate_rate));
}

PassModel FitPass(const GameState& state, const PassSample& sample,
                  const CategoryVector& rho, const TauTable& tau,
                  double global_interception_rate, const PassConfig& config) {
  PassModel m;
  m.state = state;
  m.n = sample.n;
  m.counts = sample.counts;
  const double w = config.prior_weight;
  double total = 0.0;
  for (int c = 0; c < kNumPassCategories; ++c) {
    m.dirichlet[c] = w * rho[c] + sample.counts[c];
    total += m.dirichlet[c];
  }
  for (int c = 0; c < kNumPassCategories; ++c) {
    m.probabilities[c] = m.dirichlet[c] / total;
  }
  m.gain_shape = config.pos_shape;
  m.pos_shape = config.pos_prior_shape +
                config.pos_shape * static_cast<double>(sample.pos_gains.size());
  m.pos_rate =
      config.pos_prior_rate +
      std::accumulate(sample.pos_gains.begin(), sample.pos_gains.end(), 0.0);
  const int support = static_cast<int>(tau.tau.size());
  const double tau_total = std::accumulate(tau.tau.begin(), tau.tau.end(), 0.0);
  int neg_n = 0;
  for (int i = 0; i < support; ++i) {
    neg_n += i < static_cast<int>(sample.neg_counts.size())
                 ? sample.neg_counts[i]
                 : 0;
  }
  m.neg_mass.resize(support);
  for (int i = 0; i < support; ++i) {
    const int n_i = i < static_cast<int>(sample.neg_counts.size())
                        ? sample.neg_counts[i]
                        : 0;
    m.neg_mass[i] = (w * tau.tau[i] + n_i) / (w * tau_total + neg_n);
  }
  m.interception_rate = (sample.interceptions + config.interception_shrink *
                                                    global_interception_rate) /
                        (sample.n + config.interception_shrink);
  return m;
}

IntMass PassModel::PositiveMass() const {
  const int los = state.los;
  if (los < 2) return IntMass();
  IntMass mass(1, los - 1);
  double prev = CompoundGammaCdf(0.5, gain_shape, pos_shape, pos_rate);
  for (int k = 1; k <= los - 1; ++k) {
    const double next =
        CompoundGammaCdf(k + 0.5, gain_shape, pos_shape, pos_rate);
    mass.add(k, next - prev);
    prev = next;
  }
  mass.Normalize();
  return mass;
}

IntMass PassModel::GainMass() const {
  const int los = state.los;
  IntMass mass(los - 100, los);
  const double keep = 1.0 - probabilities[kTo];
  if (keep <= 0) return mass;
  mass.add(0, probabilities[kInc] / keep);
  mass.add(los, probabilities[kTd] / keep);
  const double pos = probabilities[kPos] / keep;
  if (pos > 0) {
    IntMass p = PositiveMass();
    for (int k = p.lo(); k <= p.hi(); ++k) mass.add(k, pos * p.at(k));
  }
  const double neg = probabilities[kNeg] / keep;
  for (size_t i = 0; i < neg_mass.size(); ++i) {
    const int g = std::max(-static_cast<int>(i) - 1, los - 100);
    mass.add(g, neg * neg_mass[i]);
  }
  return mass;
}

// ---------------------------------------------------------------- turnovers

std::vector<TurnoverOutcome> TurnoverMass(int los, double rate, double sd) {
  std::vector<TurnoverOutcome> out;
  if (rate <= 0) return out;
  const double mean = 100.0 - los;
  auto cdf = [&](double y) { return NormalCdf((y - mean) / sd); };
  double prev = cdf(0.5);
  out.push_back(
      {Successor::Terminal(TerminalKind::kDefTouchdown), rate * prev});
  double touchback = 0.0;
  for (int k = kMinLos; k <= kMaxLos; ++k) {
    const double next = cdf(k + 0.5);
    out.push_back({Successor::Defense(k), rate * (next - prev)});
    prev = next;
  }
  touchback = rate * (1.0 - prev);
  out[kTouchbackLos].probability += touchback;
  return out;
}

// ---------------------------------------------------------------- kicks

IntMass FoldReceivingMass(const IntMass& mass) {
  IntMass out(0, kMaxLos);
  for (int k = mass.lo(); k <= mass.hi(); ++k) {
    const double p = mass.at(k);
    if (k <= 0) {
      out.add(0, p);
    } else if (k > kMaxLos) {
      out.add(kTouchbackLos, p);
    } else {
      out.add(k, p);
    }
  }
  return out;
}

PuntModel FitPunt(const std::vector<double>& receive_los, int los,
                  int source_los, const GibbsSettings& gibbs, uint64_t seed) {
  PuntModel m;
  m.los = los;
  m.source_los = source_los;
  m.n = static_cast<int>(receive_los.size());
  if (receive_los.empty()) return m;
  m.available = true;
  MixtureFit fit =
      FitNormalMixture(receive_los, CenteredPrior(receive_los), gibbs, seed);
  m.summary = fit.PosteriorMean();
  m.receive_mass = FoldReceivingMass(PredictiveMass(fit, 0, kMaxLos + 1));
  IntMass interior(kMinLos, kMaxLos);
  for (int k = kMinLos; k <= kMaxLos; ++k) {
    interior.add(k, m.receive_mass.at(k));
  }
  m.mode = interior.Mode();
  return m;
}

double FieldGoalModel::MakeProbability(int los) const {
  if (!available || los >= zero_from_los) return 0.0;
  const double z = intercept + slope * (los + snap_offset);
  return 1.0 / (1.0 + std::exp(-z));
}

FieldGoalModel FitFieldGoal(const std::vector<PlayRecord>& corpus,
                            const KickConfig& config) {
  FieldGoalModel m;
  m.zero_from_los = config.fg_zero_from_los;
  m.snap_offset = config.fg_snap_offset;
  std::vector<double> x, y;
  for (const PlayRecord& r : corpus) {
    if (r.type != PlayType::kFieldGoal || !r.field_goal_made.has_value()) {
      continue;
    }
    x.push_back(r.los + config.fg_snap_offset);
    y.push_back(*r.field_goal_made ? 1.0 : 0.0);
  }
  m.n = static_cast<int>(x.size());
  if (x.empty()) return m;
  // Centre the distance so the ridge acts on a well-scaled slope.
  const double centre = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  Eigen::Vector2d beta = Eigen::Vector2d::Zero();
  for (int it = 0; it < 100; ++it) {
    Eigen::Matrix2d h = config.fg_ridge * Eigen::Matrix2d::Identity();
    Eigen::Vector2d g = -config.fg_ridge * beta;
    for (size_t i = 0; i < x.size(); ++i) {
      const Eigen::Vector2d f(1.0, x[i] - centre);
      const double p = 1.0 / (1.0 + std::exp(-beta.dot(f)));
      const double wgt = std::max(p * (1.0 - p), 1e-12);
      h += wgt * f * f.transpose();
      g += (y[i] - p) * f;
    }
    const Eigen::Vector2d step = h.ldlt().solve(g);
    beta += step;
    if (step.norm() < 1e-12) break;
  }
  m.available = true;
  m.slope = beta[1];
  m.intercept = beta[0] - beta[1] * centre;
  return m;
}

KickoffModel FitKickoff(const std::vector<PlayRecord>& corpus) {
  KickoffModel m;
  m.receive_mass = IntMass(0, kMaxLos);
  for (const PlayRecord& r : corpus) {
    if (r.type != PlayType::kKickoff || !r.result_los.has_value()) continue;
    m.receive_mass.add(*r.result_los, 1.0);
    ++m.n;
  }
  m.available = m.n > 0;
  m.receive_mass.Normalize();
  return m;
}

// ---------------------------------------------------------------- time

std::string_view TimeFamilyName(TimeFamily family) {
  switch (family) {
    case TimeFamily::kRun:
      return "run";
    case TimeFamily::kPass:
      return "pass";
    case TimeFamily::kPunt:
      return "punt";
    case TimeFamily::kFieldGoal:
      return "field_goal";
    case TimeFamily::kKickoff:
      return "kickoff";
  }
  return "?";
}

TimeFamily TimeFamilyOf(PlayType type) {
  switch (type) {
    case PlayType::kRun:
      return TimeFamily::kRun;
    case PlayType::kPass:
      return TimeFamily::kPass;
    case PlayType::kPunt:
      return TimeFamily::kPunt;
    case PlayType::kFieldGoal:
      return TimeFamily::kFieldGoal;
    case PlayType::kKickoff:
      return TimeFamily::kKickoff;
  }
  return TimeFamily::kRun;
}

TimeFamily TimeFamilyOf(Action action) {
  switch (action) {
    case Action::kRun:
      return TimeFamily::kRun;
    case Action::kPass:
    case Action::kTwoPoint:
      return TimeFamily::kPass;
    case Action::kPunt:
      return TimeFamily::kPunt;
    case Action::kFieldGoal:
    case Action::kExtraPoint:
      return TimeFamily::kFieldGoal;
  }
  return TimeFamily::kRun;
}

std::string TimeKey::ToString() const {
  return absl::StrCat(std::string(TimeFamilyName(family)), "/sd",
                      sd_sign < 0 ? "-" : (sd_sign > 0 ? "+" : "0"), "/",
                      over_five_minutes ? "early" : "late", "/",
                      fourth_down ? "4th" : "any");
}

TimeKey TimeKeyOf(const PlayRecord& r) {
  TimeKey key;
  key.family = TimeFamilyOf(r.type);
  key.sd_sign = (r.score_differential > 0) - (r.score_differential < 0);
  key.over_five_minutes = r.clock_seconds > 300;
  key.fourth_down = r.down == 4;
  return key;
}

int ClampElapsed(int raw) { return std::max(1, raw); }

TimeFit FitTimeSample(const std::vector<double>& seconds,
                      const GibbsSettings& gibbs, uint64_t seed) {
  TimeFit t;
  t.n = static_cast<int>(seconds.size());
  MixtureFit fit =
      FitNormalMixture(seconds, CenteredPrior(seconds), gibbs, seed);
  t.summary = fit.PosteriorMean();
  IntMass raw = PredictiveMass(fit, 0, kMaxElapsed);
  t.mass = IntMass(1, kMaxElapsed);
  for (int k = raw.lo(); k <= raw.hi(); ++k) {
    t.mass.add(ClampElapsed(k), raw.at(k));
  }
  return t;
}

TimeModel TimeModel::Fit(const std::vector<PlayRecord>& corpus,
                         const TimeConfig& config, const GibbsSettings& gibbs,
                         uint64_t seed) {
  std::map<TimeKey, std::vector<double>> keyed;
  std::map<TimeFamily, std::vector<double>> family;
  for (const PlayRecord& r : corpus) {
    if (!r.elapsed_seconds.has_value()) continue;
    const TimeKey key = TimeKeyOf(r);
    keyed[key].push_back(*r.elapsed_seconds);
    family[key.family].push_back(*r.elapsed_seconds);
  }
  TimeModel model;
  for (auto& [key, values] : keyed) {
    if (static_cast<int>(values.size()) < config.min_key_count) continue;
    const uint64_t s = ScenarioSeed(seed, "time", Fnv1a64(key.ToString()));
    model.keyed_[key] =
        FitTimeSample(Subsample(values, config.max_points, s), gibbs, s);
  }
  for (auto& [fam, values] : family) {
    const uint64_t s =
        ScenarioSeed(seed, "time-family", Fnv1a64(TimeFamilyName(fam)));
    model.family_[fam] =
        FitTimeSample(Subsample(values, config.max_points, s), gibbs, s);
  }
  return model;
}

const TimeFit* TimeModel::Lookup(const TimeKey& key) const {
  auto it = keyed_.find(key);
  if (it != keyed_.end()) return &it->second;
  auto f = family_.find(key.family);
  return f == family_.end() ? nullptr : &f->second;
}

int TimeModel::Sample(const TimeKey& key, std::mt19937_64& rng) const {
  const TimeFit* fit = Lookup(key);
  if (fit == nullptr || fit->mass.empty()) return 1;
  return ClampElapsed(fit->mass.Sample(rng));
}

// ---------------------------------------------------------------- fitting

absl::StatusOr<ModelStore> FitModels(const std::vector<PlayRecord>& corpus,
                                     const Config& config) {
  ModelStore store;
  store.max_dist = config.max_dist;
  store.seed = config.seed;
  store.config_hash = config.Hash();
  store.turnover = config.turnover;
  StateSpace space(config.max_dist);

  auto matcher = PlayMatcher::Create(corpus, config.match);
  if (!matcher.ok()) return matcher.status();
  store.rho = RhoTable::Fit(corpus, config.pass);
  store.tau = TauTable::Fit(corpus, config.pass);

  int passes = 0, interceptions = 0, punts = 0, muffs = 0;
  for (const PlayRecord& r : corpus) {
    if (r.type == PlayType::kPass) {
      ++passes;
      if (r.pass_result == PassResult::kInterception) ++interceptions;
    }
    if (r.type == PlayType::kPunt) {
      ++punts;
      if (r.fumble_lost) ++muffs;
    }
  }
  store.global_interception_rate =
      passes > 0 ? static_cast<double>(interceptions) / passes : 0.0;
  store.muff_rate = punts > 0 ? static_cast<double>(muffs) / punts
                              : config.kick.default_muff_rate;

  const int n = space.size();
  store.run.assign(n, std::nullopt);
  store.pass.assign(n, std::nullopt);
  auto fit_range = [&](int begin, int end) {
    // Equal samples (up to order) share one posterior; only the predictive
    // range differs by los.
    std::map<std::vector<double>, MixtureFit> fits;
    const MixturePrior prior = MixturePrior::FromRunConfig(config.run);
    for (int i = begin; i < end; ++i) {
      const GameState& s = space.StateAt(i);
      auto run_sample = matcher->Match(s, Action::kRun, config.match.k);
      if (run_sample.ok()) {
        std::vector<double> gains;
        gains.reserve(run_sample->plays.size());
        for (const MatchedPlay& p : run_sample->plays) {
          gains.push_back(p.scaled_gain);
        }
        std::sort(gains.begin(), gains.end());
        auto it = fits.find(gains);
        if (it == fits.end()) {
          // Bounded: duplicates are nearly always close in state order.
          if (fits.size() >= 256) fits.clear();
          const uint64_t seed =
              ScenarioSeed(config.seed, "run", HashDoubles(0, gains));
          it = fits.emplace(gains,
                            FitNormalMixture(gains, prior, config.gibbs, seed))
                   .first;
        }
        RunModel m;
        m.state = s;
        m.n = static_cast<int>(gains.size());
        m.shortfall = run_sample->shortfall;
        m.degenerate = it->second.degenerate;
        m.summary = it->second.PosteriorMean();
        m.gain_mass = PredictiveMass(it->second, s.los - 100, s.los);
        store.run[i] = std::move(m);
      }
      auto pass_sample = matcher->Match(s, Action::kPass, config.match.k);
      if (pass_sample.ok()) {
        PassSample summary =
            SummarizePassSample(corpus, *pass_sample, config.pass);
        PassModel m = FitPass(s, summary, store.rho.at(s.los), store.tau,
                              store.global_interception_rate, config.pass);
        m.shortfall = pass_sample->shortfall;
        store.pass[i] = std::move(m);
      }
    }
  };
  const int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    fit_range(0, n);
  } else {
    std::vector<std::thread> workers;
    const int chunk = (n + jobs - 1) / jobs;
    for (int j = 0; j < jobs; ++j) {
      const int begin = j * chunk;
      const int end = std::min(n, begin + chunk);
      if (begin < end) workers.emplace_back(fit_range, begin, end);
    }
    for (auto& w : workers) w.join();
  }

  // Punts: pooled within a window around los, widened when thin.
  std::vector<std::pair<int, double>> punt_results;
  for (const PlayRecord& r : corpus) {
    if (r.type == PlayType::kPunt && r.result_los.has_value() &&
        !r.fumble_lost) {
      punt_results.emplace_back(r.los, *r.result_los);
    }
  }
  store.punt.resize(kMaxLos);
  const int floor_los = config.kick.punt_floor_los;
  for (int los = floor_los; los <= kMaxLos; ++los) {
    std::vector<double> values;
    for (int window = config.kick.punt_window; window <= kMaxLos; ++window) {
      values.clear();
      for (const auto& [l, v] : punt_results) {
        if (std::abs(l - los) <= window) values.push_back(v);
      }
      if (static_cast<int>(values.size()) >= config.kick.punt_min_count ||
          values.size() == punt_results.size()) {
        break;
      }
    }
    const uint64_t seed =
        ScenarioSeed(config.seed, "punt", HashDoubles(los, values));
    store.punt[los - 1] = FitPunt(values, los, los, config.gibbs, seed);
  }
  for (int los = kMinLos; los < floor_los; ++los) {
    store.punt[los - 1] = store.punt[floor_los - 1];
    store.punt[los - 1].los = los;
  }

  store.field_goal = FitFieldGoal(corpus, config.kick);
  store.kickoff = FitKickoff(corpus);
  store.time = TimeModel::Fit(corpus, config.time, config.gibbs, config.seed);
  return store;
}

}  // namespace driveopt
