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

#include "driveopt/synthetic.h"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/math/special_functions/gamma.hpp>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace driveopt {
namespace {

constexpr int kMaxLoss = 24;
constexpr int kGameSeconds = 3600;
constexpr int kHalfSeconds = 1800;

double Uniform(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

int Round(double x) { return static_cast<int>(std::lround(x)); }

int SignOf(int x) { return (x > 0) - (x < 0); }

}  // namespace

IntMass NormalMixture::Mass(int lo, int hi) const {
  IntMass m(lo, hi);
  for (size_t c = 0; c < weights.size(); ++c) {
    AddDiscretizedNormal(weights[c], means[c], sds[c], &m);
  }
  return m;
}

double NormalMixture::Sample(std::mt19937_64& rng) const {
  double u = Uniform(rng);
  size_t c = 0;
  while (c + 1 < weights.size() && u >= weights[c]) u -= weights[c++];
  return std::normal_distribution<double>(means[c], sds[c])(rng);
}

IntMass SyntheticTruth::RunGainMass(int los) const {
  return run_gain.Mass(los - 100, los);
}

double SyntheticTruth::CompletionGain(int k) const {
  const double scale = pass_gain_mean / pass_gain_shape;
  auto cdf = [&](double y) {
    return y <= 0 ? 0.0 : boost::math::gamma_p(pass_gain_shape, y / scale);
  };
  if (k < 0) return 0.0;
  return cdf(k + 0.5) - cdf(k - 0.5);
}

double SyntheticTruth::SackLoss(int loss) const {
  if (loss < 1 || loss > kMaxLoss) return 0.0;
  return std::pow(sack_ratio, loss - 1) * (1 - sack_ratio) /
         (1 - std::pow(sack_ratio, kMaxLoss));
}

IntMass SyntheticTruth::PassGainMass(int los) const {
  IntMass m(los - 100, los);
  const double complete =
      1 - pass_incomplete - pass_sack - pass_interception - pass_fumble;
  const double keep = 1 - pass_interception - pass_fumble;
  m.add(0, (pass_incomplete + complete * CompletionGain(0)) / keep);
  double below = CompletionGain(0);
  for (int k = 1; k < los; ++k) {
    const double p = CompletionGain(k);
    below += p;
    m.add(k, complete * p / keep);
  }
  m.add(los, complete * (1 - below) / keep);
  for (int loss = 1; loss <= kMaxLoss; ++loss) {
    m.add(std::max(-loss, los - 100), pass_sack * SackLoss(loss) / keep);
  }
  return m;
}

std::pair<double, double> SyntheticTruth::PuntLanding(int los) const {
  const double mean = std::min(100 - los + punt_net_mean, punt_aim_los);
  return {mean, std::min(punt_net_sd, (99.5 - mean) / 2)};
}

IntMass SyntheticTruth::PuntReceiveMass(int los) const {
  IntMass spread(1, 100);
  const auto [mean, sd] = PuntLanding(los);
  AddDiscretizedNormal(1.0, mean, sd, &spread);
  IntMass m(0, kMaxLos);
  m.add(0, punt_return_td);
  for (int k = 1; k <= 100; ++k) {
    m.add(k == 100 ? kTouchbackLos : k, (1 - punt_return_td) * spread.at(k));
  }
  return m;
}

double SyntheticTruth::FieldGoalMake(int los) const {
  return 1 / (1 + std::exp(-(fg_intercept + fg_slope * (los + 17))));
}

IntMass SyntheticTruth::KickoffMass() const {
  IntMass spread(1, kMaxLos);
  AddDiscretizedNormal(1.0, kickoff_mean, kickoff_sd, &spread);
  IntMass m(0, kMaxLos);
  m.add(0, kickoff_return_td);
  m.add(kickoff_touchback_los, kickoff_touchback);
  const double rest = 1 - kickoff_return_td - kickoff_touchback;
  for (int k = 1; k <= kMaxLos; ++k) m.add(k, rest * spread.at(k));
  return m;
}

NormalMixture SyntheticTruth::TimeMixture(const TimeKey& key) const {
  const bool late = !key.over_five_minutes;
  switch (key.family) {
    case TimeFamily::kRun:
      if (late && key.sd_sign > 0) return {{0.9, 0.1}, {40, 7}, {3, 3}};
      if (late && key.sd_sign < 0) return {{0.5, 0.5}, {20, 7}, {3, 3}};
      return {{0.85, 0.15}, {37, 7}, {3, 3}};
    case TimeFamily::kPass:
      if (late && key.sd_sign > 0) return {{0.7, 0.3}, {35, 7}, {3, 3}};
      if (late && key.sd_sign < 0) return {{0.45, 0.55}, {15, 6}, {3, 3}};
      return {{0.62, 0.38}, {32, 7}, {3, 3}};
    case TimeFamily::kPunt:
      return {{1.0}, {11}, {2.5}};
    case TimeFamily::kFieldGoal:
      return {{1.0}, {6}, {1.5}};
    case TimeFamily::kKickoff:
      return {{1.0}, {6}, {2}};
  }
  return {{1.0}, {6}, {2}};
}

IntMass SyntheticTruth::TimeMass(const TimeKey& key) const {
  return TimeMixture(key).Mass(1, kMaxElapsed);
}

namespace {

struct Row {
  int team = 0;
  int down = 0;
  int dist = 0;
  int los = 0;
  std::string type;
  int yards = 0;
  bool complete = false;
  bool incomplete = false;
  bool interception = false;
  bool sack = false;
  bool fumble = false;
  int clock = 0;
  int sd = 0;
  std::string fg_result;
  int result_los = -1;
  std::string desc;
};

// Outcome of a run or pass drawn from the truth.
struct ScrimmageDraw {
  int gain = 0;
  bool complete = false;
  bool incomplete = false;
  bool interception = false;
  bool sack = false;
  bool fumble = false;
};

ScrimmageDraw DrawRun(const SyntheticTruth& t, int los, std::mt19937_64& rng) {
  ScrimmageDraw d;
  d.gain = std::clamp(Round(t.run_gain.Sample(rng)), los - 100, los);
  d.fumble = Uniform(rng) < t.run_fumble;
  return d;
}

ScrimmageDraw DrawPass(const SyntheticTruth& t, int los, std::mt19937_64& rng) {
  ScrimmageDraw d;
  double u = Uniform(rng);
  if ((u -= t.pass_interception) < 0) {
    d.interception = true;
    return d;
  }
  if ((u -= t.pass_incomplete) < 0) {
    d.incomplete = true;
    return d;
  }
  if ((u -= t.pass_sack) < 0) {
    d.sack = true;
    double v = Uniform(rng);
    int loss = 1;
    while (loss < kMaxLoss && (v -= t.SackLoss(loss)) >= 0) ++loss;
    d.gain = std::max(-loss, los - 100);
    return d;
  }
  d.complete = true;
  d.fumble = (u -= t.pass_fumble) < 0;
  const double scale = t.pass_gain_mean / t.pass_gain_shape;
  const double y =
      std::gamma_distribution<double>(t.pass_gain_shape, scale)(rng);
  d.gain = std::min(Round(y), los);
  return d;
}

// Receiving los of a punt that was not muffed: 0 for a return touchdown.
int DrawPuntReceive(const SyntheticTruth& t, int los, std::mt19937_64& rng) {
  if (Uniform(rng) < t.punt_return_td) return 0;
  const auto [mean, sd] = t.PuntLanding(los);
  const int r = Round(std::normal_distribution<double>(mean, sd)(rng));
  if (r >= 100) return kTouchbackLos;
  return std::max(1, r);
}

int DrawKickoff(const SyntheticTruth& t, std::mt19937_64& rng) {
  const double u = Uniform(rng);
  if (u < t.kickoff_return_td) return 0;
  if (u < t.kickoff_return_td + t.kickoff_touchback) {
    return t.kickoff_touchback_los;
  }
  const double r =
      std::normal_distribution<double>(t.kickoff_mean, t.kickoff_sd)(rng);
  return std::clamp(Round(r), 1, kMaxLos);
}

int DrawElapsed(const SyntheticTruth& t, const TimeKey& key,
                std::mt19937_64& rng) {
  return std::clamp(Round(t.TimeMixture(key).Sample(rng)), 1, kMaxElapsed);
}

class GameSimulator {
 public:
  GameSimulator(const SyntheticTruth& truth, std::mt19937_64& rng,
                std::array<double, 2> pass_bias, double no_play_rate)
      : t_(truth), rng_(rng), bias_(pass_bias), no_play_rate_(no_play_rate) {}

  std::vector<Row> Play() {
    const int opening = Uniform(rng_) < 0.5 ? 0 : 1;
    Kickoff(opening);
    while (!over_) {
      if (half_over_) {
        half_over_ = false;
        Kickoff(1 - opening);
        continue;
      }
      Snap();
    }
    return std::move(rows_);
  }

  int score(int team) const { return score_[team]; }

 private:
  int Sd(int team) const { return score_[team] - score_[1 - team]; }

  TimeKey Key(TimeFamily family, int team, bool fourth) const {
    return TimeKey{family, SignOf(Sd(team)), clock_ > 300, fourth};
  }

  void Tick(const TimeKey& key) {
    const int next = clock_ - DrawElapsed(t_, key, rng_);
    if (clock_ > kHalfSeconds && next <= kHalfSeconds) {
      clock_ = kHalfSeconds;
      half_over_ = true;
    } else {
      clock_ = std::max(0, next);
    }
    if (clock_ == 0) over_ = true;
  }

  Row Base(int team, std::string type) const {
    Row r;
    r.team = team;
    r.type = std::move(type);
    r.clock = clock_;
    r.sd = Sd(team);
    return r;
  }

  void Possess(int team, int los) {
    offense_ = team;
    down_ = 1;
    los_ = los;
    dist_ = std::min(10, los);
  }

  void Touchdown(int team) {
    score_[team] += 7;
    Row xp = Base(team, "extra_point");
    xp.desc = "extra point, good";
    rows_.push_back(xp);
    Kickoff(1 - team);
  }

  void Kickoff(int receiver) {
    if (over_ || half_over_) return;
    Row r = Base(receiver, "kickoff");
    r.los = 65;
    const int result = DrawKickoff(t_, rng_);
    r.result_los = result;
    r.desc = absl::StrCat("kickoff, received at ", result);
    rows_.push_back(r);
    Tick(Key(TimeFamily::kKickoff, receiver, false));
    if (result == 0) {
      Touchdown(receiver);
    } else {
      Possess(receiver, result);
    }
  }

  double PassProbability() const {
    double p = down_ == 1 ? 0.5 : down_ == 2 ? 0.55 : (dist_ >= 5 ? 0.8 : 0.45);
    if (clock_ <= 300 && Sd(offense_) < 0) p = 0.75;
    return std::clamp(p + bias_[offense_], 0.05, 0.95);
  }

  void Snap() {
    const int team = offense_;
    if (Uniform(rng_) < no_play_rate_) {
      Row r = Base(team, "no_play");
      r.down = down_;
      r.dist = dist_;
      r.los = los_;
      r.desc = "penalty, no play";
      rows_.push_back(r);
    }
    if (down_ == 4) {
      const bool desperate = clock_ <= 300 && Sd(team) < 0;
      const bool go =
          desperate || (dist_ <= 1 && los_ <= 60 && Uniform(rng_) < 0.5);
      if (!go && los_ <= 38) {
        FieldGoal();
        return;
      }
      if (!go) {
        Punt();
        return;
      }
    }
    Scrimmage(Uniform(rng_) < PassProbability());
  }

  void Scrimmage(bool pass) {
    const int team = offense_;
    const ScrimmageDraw d =
        pass ? DrawPass(t_, los_, rng_) : DrawRun(t_, los_, rng_);
    Row r = Base(team, pass ? "pass" : "run");
    r.down = down_;
    r.dist = dist_;
    r.los = los_;
    r.yards = d.gain;
    r.complete = d.complete;
    r.incomplete = d.incomplete;
    r.interception = d.interception;
    r.sack = d.sack;
    r.fumble = d.fumble;
    r.desc = pass ? absl::StrCat("pass, ", d.gain, " yards")
                  : absl::StrCat("run up the middle, ", d.gain, " yards");
    rows_.push_back(r);
    Tick(Key(pass ? TimeFamily::kPass : TimeFamily::kRun, team, down_ == 4));
    if (d.interception) {
      const double spot =
          std::normal_distribution<double>(100 - los_ + 5, 15)(rng_);
      Possess(1 - team, std::clamp(Round(spot), 1, kMaxLos));
      return;
    }
    if (d.fumble) {
      Possess(1 - team, 100 - std::clamp(los_ - d.gain, 1, kMaxLos));
      return;
    }
    const int g = d.gain;
    if (g == los_) {
      Touchdown(team);
    } else if (g == los_ - 100) {
      score_[1 - team] += 2;
      Kickoff(1 - team);
    } else if (g >= dist_) {
      Possess(team, los_ - g);
    } else if (down_ < 4) {
      ++down_;
      dist_ -= g;
      los_ -= g;
    } else {
      Possess(1 - team, 100 - (los_ - g));
    }
  }

  void Punt() {
    const int team = offense_;
    Row r = Base(team, "punt");
    r.down = down_;
    r.dist = dist_;
    r.los = los_;
    const bool muff = Uniform(rng_) < t_.punt_muff;
    int receive = 0;
    if (muff) {
      const auto [mean, sd] = t_.PuntLanding(los_);
      const double net =
          std::normal_distribution<double>(mean, sd)(rng_) - (100 - los_);
      r.fumble = true;
      r.desc = "punt, muffed, recovered by kicking team";
      rows_.push_back(r);
      Tick(Key(TimeFamily::kPunt, team, true));
      Possess(team, std::clamp(los_ - Round(net), 1, kMaxLos));
      return;
    }
    receive = DrawPuntReceive(t_, los_, rng_);
    r.result_los = receive;
    r.desc = absl::StrCat("punt, returned to ", receive);
    rows_.push_back(r);
    Tick(Key(TimeFamily::kPunt, team, true));
    if (receive == 0) {
      Touchdown(1 - team);
    } else {
      Possess(1 - team, receive);
    }
  }

  void FieldGoal() {
    const int team = offense_;
    Row r = Base(team, "field_goal");
    r.down = down_;
    r.dist = dist_;
    r.los = los_;
    const bool made = Uniform(rng_) < t_.FieldGoalMake(los_);
    r.fg_result = made ? "made" : "missed";
    r.desc = absl::StrCat(los_ + 17, " yard field goal, ", r.fg_result);
    rows_.push_back(r);
    Tick(Key(TimeFamily::kFieldGoal, team, true));
    if (made) {
      score_[team] += 3;
      Kickoff(1 - team);
    } else {
      Possess(1 - team, 100 - los_);
    }
  }

  const SyntheticTruth& t_;
  std::mt19937_64& rng_;
  std::array<double, 2> bias_;
  double no_play_rate_;
  std::vector<Row> rows_;
  std::array<int, 2> score_ = {0, 0};
  int clock_ = kGameSeconds;
  bool half_over_ = false;
  bool over_ = false;
  int offense_ = 0;
  int down_ = 1;
  int dist_ = 10;
  int los_ = 75;
};

std::string Flag(bool b) { return b ? "1" : "0"; }

std::string IntOrNa(bool present, int v) {
  return present ? absl::StrCat(v) : "NA";
}

}  // namespace

std::string GenerateCorpusCsv(const SyntheticTruth& truth,
                              const SyntheticOptions& options) {
  std::mt19937_64 rng(options.seed);
  constexpr int kTeams = 32;
  std::vector<std::string> names;
  std::vector<double> bias;
  for (int i = 0; i < kTeams; ++i) {
    names.push_back(absl::StrFormat("T%02d", i));
    bias.push_back(-0.06 + 0.12 * Uniform(rng));
  }
  std::string out =
      "season,game_id,posteam,down,ydstogo,yardline_100,play_type,"
      "yards_gained,complete_pass,incomplete_pass,interception,sack,"
      "fumble_lost,game_seconds_remaining,score_differential,"
      "field_goal_result,result_yardline_100,final_score_differential,desc\n";
  const int per_season =
      std::max(1, (options.games + options.seasons - 1) / options.seasons);
  for (int g = 0; g < options.games; ++g) {
    const int season = options.first_season + g / per_season;
    const int home = static_cast<int>(rng() % kTeams);
    int away = static_cast<int>(rng() % (kTeams - 1));
    if (away >= home) ++away;
    const std::array<int, 2> team = {home, away};
    GameSimulator sim(truth, rng, {bias[home], bias[away]},
                      options.no_play_rate);
    const std::vector<Row> rows = sim.Play();
    const std::string game_id = absl::StrFormat("%d_%04d", season, g);
    for (const Row& r : rows) {
      const bool scrimmage_like = r.down > 0;
      const int final_sd = sim.score(r.team) - sim.score(1 - r.team);
      absl::StrAppend(
          &out, season, ",", game_id, ",", names[team[r.team]], ",",
          IntOrNa(scrimmage_like, r.down), ",", IntOrNa(scrimmage_like, r.dist),
          ",", IntOrNa(r.los > 0, r.los), ",", r.type, ",", r.yards, ",",
          Flag(r.complete), ",", Flag(r.incomplete), ",", Flag(r.interception),
          ",", Flag(r.sack), ",", Flag(r.fumble), ",", r.clock, ",", r.sd, ",",
          r.fg_result.empty() ? "NA" : r.fg_result, ",",
          IntOrNa(r.result_los >= 0, r.result_los), ",", final_sd, ",\"",
          r.desc, "\"\n");
    }
  }
  return out;
}

std::vector<PlayRecord> ScenarioPlays(const SyntheticTruth& truth,
                                      const GameState& state, PlayType type,
                                      int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<PlayRecord> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    PlayRecord r;
    r.game_id = "scenario";
    r.down = state.down;
    r.dist = state.dist;
    r.los = state.los;
    r.type = type;
    r.clock_seconds = 3000;
    r.fourth_down_attempt = state.down == 4;
    if (type == PlayType::kRun || type == PlayType::kPass) {
      const ScrimmageDraw d = type == PlayType::kRun
                                  ? DrawRun(truth, state.los, rng)
                                  : DrawPass(truth, state.los, rng);
      r.yards_gained = d.gain;
      r.fumble_lost = d.fumble;
      if (type == PlayType::kPass) {
        r.pass_result = d.interception ? PassResult::kInterception
                        : d.sack       ? PassResult::kSack
                        : d.complete   ? PassResult::kComplete
                                       : PassResult::kIncomplete;
      }
    } else if (type == PlayType::kFieldGoal) {
      r.field_goal_made = Uniform(rng) < truth.FieldGoalMake(state.los);
    } else if (type == PlayType::kPunt) {
      r.fumble_lost = Uniform(rng) < truth.punt_muff;
      if (!r.fumble_lost) r.result_los = DrawPuntReceive(truth, state.los, rng);
    } else {
      r.result_los = DrawKickoff(truth, rng);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PlayRecord> ScenarioPunts(const SyntheticTruth& truth, int lo,
                                      int hi, int n, uint64_t seed) {
  std::vector<PlayRecord> out;
  out.reserve(n);
  const int span = hi - lo + 1;
  for (int los = lo; los <= hi; ++los) {
    const int count = n / span + (los - lo < n % span ? 1 : 0);
    auto part = ScenarioPlays(truth, GameState{4, 10, los}, PlayType::kPunt,
                              count, MixSeed(seed, los));
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<PlayRecord> ScenarioTimes(const SyntheticTruth& truth,
                                      const TimeKey& key, int n,
                                      uint64_t seed) {
  static const std::map<TimeFamily, PlayType> kTypes = {
      {TimeFamily::kRun, PlayType::kRun},
      {TimeFamily::kPass, PlayType::kPass},
      {TimeFamily::kPunt, PlayType::kPunt},
      {TimeFamily::kFieldGoal, PlayType::kFieldGoal},
      {TimeFamily::kKickoff, PlayType::kKickoff}};
  std::mt19937_64 rng(seed);
  std::vector<PlayRecord> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    PlayRecord r;
    r.game_id = "scenario";
    r.type = kTypes.at(key.family);
    r.down = key.family == TimeFamily::kKickoff ? 0 : key.fourth_down ? 4 : 1;
    r.dist = 10;
    r.los = 50;
    r.clock_seconds = key.over_five_minutes ? 1000 : 200;
    r.score_differential = 3 * key.sd_sign;
    r.elapsed_seconds = DrawElapsed(truth, key, rng);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace driveopt
