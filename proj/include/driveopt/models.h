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

// Outcome models for every play family, fitted from matched samples or
// pooled corpus subsets, and the store that holds them.

#ifndef DRIVEOPT_MODELS_H_
#define DRIVEOPT_MODELS_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "driveopt/config.h"
#include "driveopt/gibbs.h"
#include "driveopt/ingest.h"
#include "driveopt/mass.h"
#include "driveopt/statespace.h"
#include "nlohmann/json.hpp"

namespace driveopt {

// ---------------------------------------------------------------- run

struct RunModel {
  GameState state;
  int n = 0;
  bool shortfall = false;
  bool degenerate = false;
  // Posterior means of the mixture parameters.
  MixtureDraw summary;
  // Posterior predictive over integer gains [los - 100, los].
  IntMass gain_mass;
};

RunModel FitRun(const GameState& state, const std::vector<double>& gains,
                const RunConfig& run, const GibbsSettings& gibbs,
                uint64_t seed);

// ---------------------------------------------------------------- pass

enum PassCategory { kInc = 0, kTd, kPos, kNeg, kTo, kNumPassCategories };

std::string_view PassCategoryName(int category);

using CategoryVector = std::array<double, kNumPassCategories>;

// Empirical category frequencies by los, smoothed over a window that widens
// from +-rho_window until it holds rho_min_count plays.
class RhoTable {
 public:
  RhoTable() = default;
  static RhoTable Fit(const std::vector<PlayRecord>& corpus,
                      const PassConfig& config);
  const CategoryVector& at(int los) const { return rho_[los - 1]; }
  void Set(int los, const CategoryVector& rho) { rho_[los - 1] = rho; }

 private:
  std::array<CategoryVector, kMaxLos> rho_{};
};

// Corpus-wide loss frequencies over -1..-24 with add-one smoothing.
struct TauTable {
  // tau[i] is the weight of a loss of i + 1 yards.
  std::vector<double> tau;

  static TauTable Fit(const std::vector<PlayRecord>& corpus,
                      const PassConfig& config);
};

// Category of a pass outcome with the given (already scaled) gain.
PassCategory CategorizePass(const PlayRecord& record, double gain, int los);

struct PassSample {
  CategoryVector counts{};
  int n = 0;
  int interceptions = 0;
  // Positive gains and losses (as positive integers 1..24) for the
  // conditional distributions.
  std::vector<double> pos_gains;
  std::vector<int> neg_counts;
};

PassSample SummarizePassSample(const std::vector<PlayRecord>& corpus,
                               const MatchedSample& sample,
                               const PassConfig& config);

struct PassModel {
  GameState state;
  int n = 0;
  bool shortfall = false;
  CategoryVector counts{};
  // Dirichlet posterior parameters prior_weight * rho + counts.
  CategoryVector dirichlet{};
  // Posterior-mean category probabilities.
  CategoryVector probabilities{};
  // Gamma posterior for the rate of positive gains.
  double pos_shape = 0.0;
  double pos_rate = 0.0;
  double gain_shape = 1.3;
  // Posterior predictive over losses 1..24 (index i = loss of i + 1).
  std::vector<double> neg_mass;
  double interception_rate = 0.0;

  // Predictive mass of a positive gain over 1..los-1, renormalized.
  IntMass PositiveMass() const;
  // Non-turnover outcome mass over [los - 100, los]: incompletions at 0,
  // touchdowns at los, and the two conditional gain distributions, with
  // losses past the end zone folded to the safety bin.
  IntMass GainMass() const;
};

PassModel FitPass(const GameState& state, const PassSample& sample,
                  const CategoryVector& rho, const TauTable& tau,
                  double global_interception_rate, const PassConfig& config);

// Beta-prime CDF of a gamma variable with known shape whose rate has a
// Gamma(rate_shape, rate_rate) distribution.
double CompoundGammaCdf(double y, double shape, double rate_shape,
                        double rate_rate);

// ---------------------------------------------------------------- turnovers

struct TurnoverOutcome {
  Successor successor;
  double probability = 0.0;
};

// Defensive return spot ~ Normal(100 - los, sd^2) in the defense's
// coordinates; spots short of its goal line score, spots at or beyond its
// own goal line are touchbacks. Total mass equals `rate`.
std::vector<TurnoverOutcome> TurnoverMass(int los, double rate, double sd);

// ---------------------------------------------------------------- kicks

struct PuntModel {
  int los = 0;
  // los the pooled sample was drawn for (40 for los < 40).
  int source_los = 0;
  int n = 0;
  bool available = false;
  MixtureDraw summary;
  // Receiving team's los 0..99; 0 is a return touchdown.
  IntMass receive_mass;
  int mode = 0;
};

PuntModel FitPunt(const std::vector<double>& receive_los, int los,
                  int source_los, const GibbsSettings& gibbs, uint64_t seed);

// Receiving los mass with the touchback spot for the upper tail.
IntMass FoldReceivingMass(const IntMass& mass);

struct FieldGoalModel {
  bool available = false;
  double intercept = 0.0;
  double slope = 0.0;
  int zero_from_los = 59;
  int snap_offset = 17;
  int n = 0;

  double MakeProbability(int los) const;
};

// Ridge-regularized logistic regression on kick distance by IRLS.
FieldGoalModel FitFieldGoal(const std::vector<PlayRecord>& corpus,
                            const KickConfig& config);

struct KickoffModel {
  bool available = false;
  int n = 0;
  // Receiving team's los 0..99; 0 is a return touchdown.
  IntMass receive_mass;
};

KickoffModel FitKickoff(const std::vector<PlayRecord>& corpus);

// ---------------------------------------------------------------- time

enum class TimeFamily : uint8_t { kRun, kPass, kPunt, kFieldGoal, kKickoff };

std::string_view TimeFamilyName(TimeFamily family);
TimeFamily TimeFamilyOf(PlayType type);
TimeFamily TimeFamilyOf(Action action);

struct TimeKey {
  TimeFamily family = TimeFamily::kRun;
  // -1, 0, +1.
  int sd_sign = 0;
  bool over_five_minutes = false;
  bool fourth_down = false;

  std::string ToString() const;
  friend auto operator<=>(const TimeKey&, const TimeKey&) = default;
};

TimeKey TimeKeyOf(const PlayRecord& record);

inline constexpr int kMaxElapsed = 90;

// Clamps a raw elapsed-seconds draw to at least one second.
int ClampElapsed(int raw);

struct TimeFit {
  int n = 0;
  MixtureDraw summary;
  // Seconds 1..kMaxElapsed.
  IntMass mass;
};

class TimeModel {
 public:
  static TimeModel Fit(const std::vector<PlayRecord>& corpus,
                       const TimeConfig& config, const GibbsSettings& gibbs,
                       uint64_t seed);

  bool Has(const TimeKey& key) const { return keyed_.contains(key); }
  bool HasFamily(TimeFamily family) const { return family_.contains(family); }
  // Keyed fit, or the family-only fit when the key was not fitted.
  const TimeFit* Lookup(const TimeKey& key) const;
  int Sample(const TimeKey& key, std::mt19937_64& rng) const;

  const std::map<TimeKey, TimeFit>& keyed() const { return keyed_; }
  const std::map<TimeFamily, TimeFit>& family() const { return family_; }
  void SetKeyed(const TimeKey& key, TimeFit fit) { keyed_[key] = fit; }
  void SetFamily(TimeFamily family, TimeFit fit) { family_[family] = fit; }

 private:
  std::map<TimeKey, TimeFit> keyed_;
  std::map<TimeFamily, TimeFit> family_;
};

TimeFit FitTimeSample(const std::vector<double>& seconds,
                      const GibbsSettings& gibbs, uint64_t seed);

// ---------------------------------------------------------------- store

inline constexpr char kModelSchema[] = "driveopt.models/1";

struct ModelStore {
  int max_dist = kDefaultMaxDist;
  uint64_t seed = 0;
  std::string config_hash;
  // Indexed by StateSpace index; empty optionals are unavailable fits.
  std::vector<std::optional<RunModel>> run;
  std::vector<std::optional<PassModel>> pass;
  // Indexed by los - 1.
  std::vector<PuntModel> punt;
  FieldGoalModel field_goal;
  KickoffModel kickoff;
  TimeModel time;
  RhoTable rho;
  TauTable tau;
  double muff_rate = 0.01;
  double global_interception_rate = 0.0;
  TurnoverConfig turnover;
  std::vector<std::string> warnings;

  // One JSON document per line: a header, then one per scenario.
  absl::Status Save(const std::string& path) const;
  static absl::StatusOr<ModelStore> Load(const std::string& path);
  std::string Serialize() const;
  static absl::StatusOr<ModelStore> Deserialize(const std::string& text);
};

// Fits every model family. Matched samples use config.match.k neighbours.
absl::StatusOr<ModelStore> FitModels(const std::vector<PlayRecord>& corpus,
                                     const Config& config);

// Seed for one scenario: master seed, family tag and a content hash.
uint64_t ScenarioSeed(uint64_t master, std::string_view family,
                      uint64_t content);

}  // namespace driveopt

#endif  // DRIVEOPT_MODELS_H_
