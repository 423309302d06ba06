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

// Synthetic play-by-play corpora drawn from known distributions, so that
// fitted models can be checked against exact truth.

#ifndef DRIVEOPT_SYNTHETIC_H_
#define DRIVEOPT_SYNTHETIC_H_

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "driveopt/ingest.h"
#include "driveopt/mass.h"
#include "driveopt/models.h"

namespace driveopt {

// Normal mixture with per-component spread.
struct NormalMixture {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> sds;

  // Rounded draws over [lo, hi], tails folded.
  IntMass Mass(int lo, int hi) const;
  double Sample(std::mt19937_64& rng) const;
};

struct SyntheticTruth {
  NormalMixture run_gain{{0.8, 0.2}, {3.5, 12.0}, {3.5, 9.0}};
  double run_fumble = 0.0065;

  double pass_incomplete = 0.36;
  double pass_sack = 0.07;
  double pass_interception = 0.025;
  double pass_fumble = 0.0097;
  double pass_gain_shape = 1.3;
  double pass_gain_mean = 12.0;
  // Sack losses are geometric over 1..24 with this ratio.
  double sack_ratio = 0.85;

  double punt_net_mean = 44.0;
  double punt_net_sd = 9.0;
  // Punters aim no deeper than this receiving los and tighten their spread
  // near the goal line, so touchbacks stay rare.
  double punt_aim_los = 92.0;
  double punt_muff = 0.01;
  double punt_return_td = 0.002;

  double fg_intercept = 6.0;
  double fg_slope = -0.105;

  double kickoff_touchback = 0.6;
  int kickoff_touchback_los = 75;
  double kickoff_mean = 77.0;
  double kickoff_sd = 6.0;
  double kickoff_return_td = 0.003;

  // Integer gain mass of a run (fumbles excluded) over [los - 100, los].
  IntMass RunGainMass(int los) const;
  // Non-turnover pass outcome mass over [los - 100, los].
  IntMass PassGainMass(int los) const;
  // Probability that a completion's rounded gain is k.
  double CompletionGain(int k) const;
  double SackLoss(int loss) const;
  // Mean and spread of the receiving los of punts from `los`.
  std::pair<double, double> PuntLanding(int los) const;
  // Receiving los mass (0..99) of punts from `los`, muffs excluded.
  IntMass PuntReceiveMass(int los) const;
  double FieldGoalMake(int los) const;
  IntMass KickoffMass() const;
  // Elapsed-seconds mixture for a time key, and its mass over 1..90.
  NormalMixture TimeMixture(const TimeKey& key) const;
  IntMass TimeMass(const TimeKey& key) const;
};

struct SyntheticOptions {
  int games = 512;
  int first_season = 2017;
  int seasons = 2;
  double no_play_rate = 0.03;
  uint64_t seed = 1;
};

// Whole games as a CSV in the default column layout, including dropped row
// kinds (no_play, extra_point) and quoted descriptions.
std::string GenerateCorpusCsv(const SyntheticTruth& truth,
                              const SyntheticOptions& options);

// `n` plays of one type snapped from `state`.
std::vector<PlayRecord> ScenarioPlays(const SyntheticTruth& truth,
                                      const GameState& state, PlayType type,
                                      int n, uint64_t seed);

// `n` punts with los cycling over [lo, hi].
std::vector<PlayRecord> ScenarioPunts(const SyntheticTruth& truth, int lo,
                                      int hi, int n, uint64_t seed);

// `n` plays carrying elapsed times drawn for `key`.
std::vector<PlayRecord> ScenarioTimes(const SyntheticTruth& truth,
                                      const TimeKey& key, int n, uint64_t seed);

}  // namespace driveopt

#endif  // DRIVEOPT_SYNTHETIC_H_
