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

#include "driveopt/config.h"

#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace driveopt {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GibbsSettings, iterations, burn_in, thin)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(MatchConfig, k, max_scale, ridge)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RunConfig, components, mean_prior_mean,
                                   mean_prior_var, var_prior_shape,
                                   var_prior_scale, weight_concentration)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PassConfig, prior_weight, pos_shape,
                                   pos_prior_shape, pos_prior_rate, neg_floor,
                                   rho_window, rho_min_count,
                                   interception_shrink)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(KickConfig, punt_window, punt_floor_los,
                                   punt_min_count, default_muff_rate,
                                   fg_zero_from_los, fg_snap_offset, fg_ridge)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TurnoverConfig, fumble_rate_run,
                                   fumble_rate_pass, fumble_sd, interception_sd)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TimeConfig, min_key_count, max_points)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SolverConfig, theta, max_sweeps, prune)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LateGameConfig, n_draws, extra_point,
                                   two_point, sd_clamp, max_time, node_budget,
                                   lookahead_depth)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimConfig, possession_cap, dist_bucket_upper,
                                   zone_upper_los, caller_seasons)

namespace {

// Reports the first key of `overrides` that has no counterpart in `base`.
absl::Status CheckKnownKeys(const nlohmann::json& base,
                            const nlohmann::json& overrides,
                            const std::string& prefix) {
  if (!overrides.is_object()) return absl::OkStatus();
  for (const auto& [key, value] : overrides.items()) {
    if (!base.contains(key)) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown config key: ", prefix, key));
    }
    if (base[key].is_object()) {
      if (!value.is_object()) {
        return absl::InvalidArgumentError(
            absl::StrCat("config key ", prefix, key, " must be an object"));
      }
      auto status = CheckKnownKeys(base[key], value, prefix + key + ".");
      if (!status.ok()) return status;
    }
  }
  return absl::OkStatus();
}

}  // namespace

nlohmann::json Config::ToJson() const {
  nlohmann::json j;
  j["max_dist"] = max_dist;
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["match"] = match;
  j["gibbs"] = gibbs;
  j["run"] = run;
  j["pass"] = pass;
  j["kick"] = kick;
  j["turnover"] = turnover;
  j["time"] = time;
  j["solver"] = solver;
  j["late"] = late;
  j["sim"] = sim;
  return j;
}

absl::StatusOr<Config> Config::FromJson(const nlohmann::json& overrides) {
  Config defaults;
  nlohmann::json merged = defaults.ToJson();
  auto status = CheckKnownKeys(merged, overrides, "");
  if (!status.ok()) return status;
  merged.merge_patch(overrides);
  Config c;
  try {
    c.max_dist = merged.at("max_dist").get<int>();
    c.seed = merged.at("seed").get<uint64_t>();
    c.jobs = merged.at("jobs").get<int>();
    c.match = merged.at("match").get<MatchConfig>();
    c.gibbs = merged.at("gibbs").get<GibbsSettings>();
    c.run = merged.at("run").get<RunConfig>();
    c.pass = merged.at("pass").get<PassConfig>();
    c.kick = merged.at("kick").get<KickConfig>();
    c.turnover = merged.at("turnover").get<TurnoverConfig>();
    c.time = merged.at("time").get<TimeConfig>();
    c.solver = merged.at("solver").get<SolverConfig>();
    c.late = merged.at("late").get<LateGameConfig>();
    c.sim = merged.at("sim").get<SimConfig>();
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bad config: ", e.what()));
  }
  if (c.max_dist < 10) {
    return absl::InvalidArgumentError("max_dist must be at least 10");
  }
  if (c.match.k < 1 || c.gibbs.iterations <= c.gibbs.burn_in ||
      c.gibbs.thin < 1 || c.solver.theta <= 0 || c.late.n_draws < 1 ||
      c.late.node_budget < 1 || c.late.lookahead_depth < 1 ||
      c.late.max_time < 1 || c.late.sd_clamp < 1 || c.jobs < 1 ||
      c.sim.possession_cap < 1) {
    return absl::InvalidArgumentError("config value out of range");
  }
  if (c.run.components < 1 || c.run.components > 16) {
    return absl::InvalidArgumentError("run.components must be in 1..16");
  }
  return c;
}

absl::StatusOr<Config> Config::FromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("config ", path, ": ", e.what()));
  }
  return FromJson(j);
}

std::string Config::Hash() const {
  return absl::StrFormat("%016x", Fnv1a64(ToJson().dump()));
}

uint64_t Fnv1a64(std::string_view bytes, uint64_t basis) {
  uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t MixSeed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace driveopt
