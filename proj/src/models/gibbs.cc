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

#include "driveopt/gibbs.h"

#include <algorithm>
#include <cmath>
#include <random>

namespace driveopt {
namespace {

constexpr int kMaxComponents = 16;

double UnitDraw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<double> DrawDirichlet(std::mt19937_64& rng,
                                  const std::vector<double>& alpha) {
  std::vector<double> x(alpha.size());
  double total = 0.0;
  for (size_t k = 0; k < alpha.size(); ++k) {
    std::gamma_distribution<double> g(alpha[k], 1.0);
    x[k] = g(rng);
    total += x[k];
  }
  if (total <= 0) {
    std::fill(x.begin(), x.end(), 1.0 / x.size());
  } else {
    for (double& v : x) v /= total;
  }
  return x;
}

double Quantile(std::vector<double> sorted, double q) {
  const double pos = q * (sorted.size() - 1);
  const size_t i = static_cast<size_t>(std::floor(pos));
  const size_t j = std::min(i + 1, sorted.size() - 1);
  return sorted[i] + (pos - i) * (sorted[j] - sorted[i]);
}

}  // namespace

MixturePrior MixturePrior::FromRunConfig(const RunConfig& c) {
  MixturePrior p;
  p.components = c.components;
  p.mean_prior_mean = c.mean_prior_mean;
  p.mean_prior_var = c.mean_prior_var;
  p.var_prior_shape = c.var_prior_shape;
  p.var_prior_scale = c.var_prior_scale;
  p.weight_concentration = c.weight_concentration;
  return p;
}

MixtureDraw MixtureFit::PosteriorMean() const {
  MixtureDraw mean;
  if (draws.empty()) {
    mean.weights = {1.0};
    mean.means = {point};
    mean.variance = 0.0;
    return mean;
  }
  const size_t k = draws[0].weights.size();
  mean.weights.assign(k, 0.0);
  mean.means.assign(k, 0.0);
  mean.variance = 0.0;
  for (const MixtureDraw& d : draws) {
    for (size_t c = 0; c < k; ++c) {
      mean.weights[c] += d.weights[c];
      mean.means[c] += d.means[c];
    }
    mean.variance += d.variance;
  }
  const double n = static_cast<double>(draws.size());
  for (size_t c = 0; c < k; ++c) {
    mean.weights[c] /= n;
    mean.means[c] /= n;
  }
  mean.variance /= n;
  return mean;
}

MixtureFit FitNormalMixture(const std::vector<double>& data,
                            const MixturePrior& prior,
                            const GibbsSettings& settings, uint64_t seed) {
  MixtureFit fit;
  if (data.empty()) {
    fit.degenerate = true;
    fit.point = prior.mean_prior_mean;
    return fit;
  }
  const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
  if (*lo_it == *hi_it) {
    fit.degenerate = true;
    fit.point = *lo_it;
    return fit;
  }
  const int k = std::clamp(prior.components, 1, kMaxComponents);
  const size_t n = data.size();
  std::mt19937_64 rng(seed);

  std::vector<double> sorted = data;
  std::sort(sorted.begin(), sorted.end());
  double mean = 0.0;
  for (double x : data) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : data) var += (x - mean) * (x - mean);
  var = std::max(var / n, 1e-6);

  std::vector<double> w(k, 1.0 / k);
  std::vector<double> mu(k);
  for (int c = 0; c < k; ++c) mu[c] = Quantile(sorted, (c + 1.0) / (k + 1.0));
  double sigma2 = var;

  // Observations share assignment weights with every equal value.
  std::vector<double> values = sorted;
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<int> group(n);
  for (size_t i = 0; i < n; ++i) {
    group[i] = static_cast<int>(
        std::lower_bound(values.begin(), values.end(), data[i]) -
        values.begin());
  }
  std::vector<double> cumulative(values.size() * k);

  std::vector<int> z(n);
  std::vector<double> count(k), sum(k), logp(k), slope(k), alpha(k);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (int it = 0; it < settings.iterations; ++it) {
    // Assignments. log w_c - (x - mu_c)^2 / 2s^2 up to a term in x alone.
    const double inv2s = 0.5 / sigma2;
    for (int c = 0; c < k; ++c) {
      logp[c] = (w[c] > 0 ? std::log(w[c]) : -1e300) - mu[c] * mu[c] * inv2s;
      slope[c] = 2.0 * mu[c] * inv2s;
    }
    for (size_t j = 0; j < values.size(); ++j) {
      double* cw = &cumulative[j * k];
      double best = -1e300;
      for (int c = 0; c < k; ++c) {
        cw[c] = logp[c] + slope[c] * values[j];
        best = std::max(best, cw[c]);
      }
      double total = 0.0;
      for (int c = 0; c < k; ++c) {
        total += std::exp(cw[c] - best);
        cw[c] = total;
      }
    }
    std::fill(count.begin(), count.end(), 0.0);
    std::fill(sum.begin(), sum.end(), 0.0);
    for (size_t i = 0; i < n; ++i) {
      const double* cw = &cumulative[group[i] * k];
      const double u = UnitDraw(rng) * cw[k - 1];
      int pick = k - 1;
      for (int c = 0; c < k; ++c) {
        if (u < cw[c]) {
          pick = c;
          break;
        }
      }
      z[i] = pick;
      count[pick] += 1.0;
      sum[pick] += data[i];
    }
    // Weights.
    for (int c = 0; c < k; ++c)
      alpha[c] = prior.weight_concentration + count[c];
    w = DrawDirichlet(rng, alpha);
    // Means.
    for (int c = 0; c < k; ++c) {
      const double prec = 1.0 / prior.mean_prior_var + count[c] / sigma2;
      const double m =
          (prior.mean_prior_mean / prior.mean_prior_var + sum[c] / sigma2) /
          prec;
      mu[c] = m + normal(rng) / std::sqrt(prec);
    }
    // Shared variance.
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double d = data[i] - mu[z[i]];
      ss += d * d;
    }
    std::gamma_distribution<double> g(prior.var_prior_shape + 0.5 * n, 1.0);
    sigma2 = (prior.var_prior_scale + 0.5 * ss) / g(rng);

    if (it >= settings.burn_in &&
        (it - settings.burn_in) % settings.thin == 0) {
      fit.draws.push_back(MixtureDraw{w, mu, sigma2});
    }
  }
  return fit;
}

IntMass MixtureMass(const MixtureDraw& draw, int lo, int hi) {
  IntMass mass(lo, hi);
  const double sd = std::sqrt(draw.variance);
  for (size_t c = 0; c < draw.weights.size(); ++c) {
    if (sd <= 0) {
      const int k = static_cast<int>(std::lround(draw.means[c]));
      mass.add(std::clamp(k, lo, hi), draw.weights[c]);
    } else {
      AddDiscretizedNormal(draw.weights[c], draw.means[c], sd, &mass);
    }
  }
  return mass;
}

IntMass PredictiveMass(const MixtureFit& fit, int lo, int hi) {
  IntMass mass(lo, hi);
  if (fit.degenerate || fit.draws.empty()) {
    const int k = static_cast<int>(std::lround(fit.point));
    mass.add(std::clamp(k, lo, hi), 1.0);
    return mass;
  }
  const double share = 1.0 / fit.draws.size();
  for (const MixtureDraw& d : fit.draws) {
    const double sd = std::sqrt(d.variance);
    for (size_t c = 0; c < d.weights.size(); ++c) {
      AddDiscretizedNormal(share * d.weights[c], d.means[c], sd, &mass);
    }
  }
  mass.Normalize();
  return mass;
}

}  // namespace driveopt
