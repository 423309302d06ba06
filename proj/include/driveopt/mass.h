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

// Probability masses over contiguous integer supports.

#ifndef DRIVEOPT_MASS_H_
#define DRIVEOPT_MASS_H_

#include <random>
#include <vector>

namespace driveopt {

class IntMass {
 public:
  IntMass() = default;
  // Zero mass over [lo, hi].
  IntMass(int lo, int hi);
  IntMass(int lo, std::vector<double> p) : lo_(lo), p_(std::move(p)) {}

  int lo() const { return lo_; }
  int hi() const { return lo_ + static_cast<int>(p_.size()) - 1; }
  bool empty() const { return p_.empty(); }
  const std::vector<double>& probabilities() const { return p_; }

  double at(int k) const;
  void add(int k, double w);
  double Total() const;
  double Mean() const;
  // Scales to unit total; leaves an all-zero mass unchanged.
  void Normalize();
  // Index of the largest entry; the smallest such k on ties.
  int Mode() const;
  // Inverse-CDF draw.
  int Sample(std::mt19937_64& rng) const;
  // Smallest k whose cumulative share of the total reaches u.
  int Quantile(double u) const;

 private:
  int lo_ = 0;
  std::vector<double> p_;
};

// Half the L1 distance, with missing support treated as zero.
double TotalVariation(const IntMass& a, const IntMass& b);

double NormalCdf(double z);

// Adds `weight` times the mass of N(mean, sd^2) integrated over
// [k - 0.5, k + 0.5) for every k in [lo, hi]; mass below lo - 0.5 goes to lo
// and mass from hi + 0.5 upward goes to hi.
void AddDiscretizedNormal(double weight, double mean, double sd, IntMass* mass);

}  // namespace driveopt

#endif  // DRIVEOPT_MASS_H_
