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

// Tunable settings for the whole pipeline. Every field has a default; a JSON
// config file may override any subset of them.

#ifndef DRIVEOPT_CONFIG_H_
#define DRIVEOPT_CONFIG_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"

namespace driveopt {

struct GibbsSettings {
  int iterations = 2000;
  int burn_in = 500;
  int thin = 5;
};

struct MatchConfig {
  int k = 100;
  double max_scale = 1.5;
  double ridge = 1e-6;
};

struct RunConfig {
  int components = 4;
  double mean_prior_mean = 0.0;
  double mean_prior_var = 100.0;
  double var_prior_shape = 1.0;
  double var_prior_scale = 1.0;
  double weight_concentration = 1.0;
};

struct PassConfig {
  double prior_weight = 10.0;
  double pos_shape = 1.3;
  double pos_prior_shape = 130.0;
  double pos_prior_rate = 1300.0;
  int neg_floor = -24;
  int rho_window = 3;
  int rho_min_count = 20;
  double interception_shrink = 10.0;
};

struct KickConfig {
  int punt_window = 2;
  int punt_floor_los = 40;
  // The punt window widens until it holds this many punts.
  int punt_min_count = 20;
  double default_muff_rate = 0.01;
  int fg_zero_from_los = 59;
  int fg_snap_offset = 17;
  double fg_ridge = 1e-3;
};

struct TurnoverConfig {
  double fumble_rate_run = 0.0065;
  double fumble_rate_pass = 0.0097;
  double fumble_sd = 10.0;
  double interception_sd = 25.0;
};

struct TimeConfig {
  int min_key_count = 30;
  int max_points = 2000;
};

struct SolverConfig {
  double theta = 1e-6;
  int max_sweeps = 500;
  double prune = 1e-12;
};

struct LateGameConfig {
  int n_draws = 10;
  double extra_point = 0.90;
  double two_point = 0.45;
  int sd_clamp = 30;
  int max_time = 300;
  int node_budget = 400;
  // Levels of successors refreshed below the queried state.
  int lookahead_depth = 2;
};

struct SimConfig {
  int possession_cap = 50;
  // Upper bounds of the dist buckets {1-2, 3-6, 7-10, 11+}.
  std::array<int, 3> dist_bucket_upper = {2, 6, 10};
  // Upper los bounds of the field zones {opp 20-1, opp 49-21, own 21-50,
  // own 1-20}, expressed in yards to the opponent goal.
  std::array<int, 3> zone_upper_los = {20, 49, 79};
  // Seasons the historical caller is estimated from; empty means all.
  std::vector<int> caller_seasons;
};

struct Config {
  int max_dist = 30;
  uint64_t seed = 20170907;
  int jobs = 1;
  MatchConfig match;
  GibbsSettings gibbs;
  RunConfig run;
  PassConfig pass;
  KickConfig kick;
  TurnoverConfig turnover;
  TimeConfig time;
  SolverConfig solver;
  LateGameConfig late;
  SimConfig sim;

  nlohmann::json ToJson() const;
  // Applies `overrides` on top of the defaults; unknown keys are an error.
  static absl::StatusOr<Config> FromJson(const nlohmann::json& overrides);
  static absl::StatusOr<Config> FromFile(const std::string& path);

  // Stable 64-bit FNV-1a hash of the canonical JSON form, hex encoded.
  std::string Hash() const;
};

// FNV-1a over bytes; used for config hashes and seed derivation.
uint64_t Fnv1a64(std::string_view bytes,
                 uint64_t basis = 14695981039346656037ULL);

// SplitMix64 finalizer: well-mixed 64-bit value from arbitrary inputs.
uint64_t MixSeed(uint64_t a, uint64_t b);

}  // namespace driveopt

#endif  // DRIVEOPT_CONFIG_H_
