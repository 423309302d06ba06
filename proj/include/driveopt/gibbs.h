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

// Gibbs sampler for a finite mixture of normals with a shared variance.

#ifndef DRIVEOPT_GIBBS_H_
#define DRIVEOPT_GIBBS_H_

#include <cstdint>
#include <vector>

#include "driveopt/config.h"
#include "driveopt/mass.h"

namespace driveopt {

struct MixturePrior {
  int components = 4;
  double mean_prior_mean = 0.0;
  double mean_prior_var = 100.0;
  double var_prior_shape = 1.0;
  double var_prior_scale = 1.0;
  double weight_concentration = 1.0;

  static MixturePrior FromRunConfig(const RunConfig& c);
};

struct MixtureDraw {
  std::vector<double> weights;
  std::vector<double> means;
  double variance = 1.0;
};

struct MixtureFit {
  std::vector<MixtureDraw> draws;
  // All observations identical: the predictive is a point mass there.
  bool degenerate = false;
  double point = 0.0;

  // Posterior means of the draw parameters, components in draw order.
  MixtureDraw PosteriorMean() const;
};

// Component means start at evenly spaced data quantiles; the retained draws
// are every `thin`-th iteration after `burn_in`.
MixtureFit FitNormalMixture(const std::vector<double>& data,
                            const MixturePrior& prior,
                            const GibbsSettings& settings, uint64_t seed);

// Posterior predictive over [lo, hi], averaged over the retained draws, with
// both tails folded into the end bins.
IntMass PredictiveMass(const MixtureFit& fit, int lo, int hi);

// Mass of a single mixture (not averaged) over [lo, hi], tails folded.
IntMass MixtureMass(const MixtureDraw& draw, int lo, int hi);

}  // namespace driveopt

#endif  // DRIVEOPT_GIBBS_H_
