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

#include "driveopt/mass.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace driveopt {

IntMass::IntMass(int lo, int hi) : lo_(lo), p_(std::max(0, hi - lo + 1), 0.0) {}

double IntMass::at(int k) const {
  if (k < lo_ || k > hi()) return 0.0;
  return p_[k - lo_];
}

void IntMass::add(int k, double w) {
  if (p_.empty()) {
    lo_ = k;
    p_.assign(1, 0.0);
  } else if (k < lo_) {
    p_.insert(p_.begin(), lo_ - k, 0.0);
    lo_ = k;
  } else if (k > hi()) {
    p_.resize(k - lo_ + 1, 0.0);
  }
  p_[k - lo_] += w;
}

double IntMass::Total() const {
  return std::accumulate(p_.begin(), p_.end(), 0.0);
}

double IntMass::Mean() const {
  double total = 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < p_.size(); ++i) {
    total += p_[i];
    sum += p_[i] * (lo_ + static_cast<int>(i));
  }
  return total > 0 ? sum / total : 0.0;
}

void IntMass::Normalize() {
  const double total = Total();
  if (total <= 0) return;
  for (double& x : p_) x /= total;
}

int IntMass::Mode() const {
  auto it = std::max_element(p_.begin(), p_.end());
  return lo_ + static_cast<int>(it - p_.begin());
}

int IntMass::Quantile(double u) const {
  const double target = u * Total();
  double cumulative = 0.0;
  for (size_t i = 0; i < p_.size(); ++i) {
    cumulative += p_[i];
    if (p_[i] > 0 && cumulative >= target) return lo_ + static_cast<int>(i);
  }
  for (size_t i = p_.size(); i-- > 0;) {
    if (p_[i] > 0) return lo_ + static_cast<int>(i);
  }
  return lo_;
}

int IntMass::Sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, Total());
  double target = u(rng);
  for (size_t i = 0; i < p_.size(); ++i) {
    target -= p_[i];
    if (target < 0) return lo_ + static_cast<int>(i);
  }
  for (size_t i = p_.size(); i-- > 0;) {
    if (p_[i] > 0) return lo_ + static_cast<int>(i);
  }
  return lo_;
}

double TotalVariation(const IntMass& a, const IntMass& b) {
  if (a.empty() && b.empty()) return 0.0;
  int lo, hi;
  if (a.empty()) {
    lo = b.lo();
    hi = b.hi();
  } else if (b.empty()) {
    lo = a.lo();
    hi = a.hi();
  } else {
    lo = std::min(a.lo(), b.lo());
    hi = std::max(a.hi(), b.hi());
  }
  double sum = 0.0;
  for (int k = lo; k <= hi; ++k) sum += std::abs(a.at(k) - b.at(k));
  return 0.5 * sum;
}

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

void AddDiscretizedNormal(double weight, double mean, double sd,
                          IntMass* mass) {
  const int lo = mass->lo();
  const int hi = mass->hi();
  if (hi < lo || weight == 0.0) return;
  // Beyond nine standard deviations the CDF is 0 or 1 in double precision.
  const double reach = 9.0 * sd;
  const int first = std::max(lo, static_cast<int>(std::floor(mean - reach)));
  const int last = std::min(hi, static_cast<int>(std::ceil(mean + reach)));
  if (first > last) {
    mass->add(mean < lo ? lo : hi, weight);
    return;
  }
  double prev = first == lo ? 0.0 : NormalCdf((first - 0.5 - mean) / sd);
  if (first > lo) mass->add(lo, weight * prev);
  for (int k = first; k <= last; ++k) {
    const double next = k == hi ? 1.0 : NormalCdf((k + 0.5 - mean) / sd);
    mass->add(k, weight * (next - prev));
    prev = next;
  }
  if (last < hi) mass->add(hi, weight * (1.0 - prev));
}

}  // namespace driveopt
