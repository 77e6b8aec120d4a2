// Copyright 2026 The disttest Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exact discrete distributions over [n] = {0, ..., n-1} and the distances
// used as ground truth throughout the library.

#ifndef DISTTEST_DISTRIBUTION_H_
#define DISTTEST_DISTRIBUTION_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "disttest/rng.h"

namespace disttest {

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-negative mass vector with no normalization constraint.
class PseudoDistribution {
 public:
  PseudoDistribution() = default;
  explicit PseudoDistribution(std::vector<double> mass);

  std::size_t size() const { return mass_.size(); }
  double total() const { return total_; }
  double operator[](std::size_t i) const { return mass_[i]; }
  std::span<const double> mass() const { return mass_; }

  PseudoDistribution Scaled(double c) const;

 private:
  std::vector<double> mass_;
  double total_ = 0.0;
};

// A probability vector. The constructor rejects negative entries and sums
// outside [0.5, 2.0], then normalizes so the sum is 1 to within 1e-12.
class ExplicitDistribution {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit ExplicitDistribution(std::vector<double> probs);

  static ExplicitDistribution Uniform(std::size_t n);
  static ExplicitDistribution PointMass(std::size_t n, std::size_t bin);
  // Normalizes a pseudo-distribution with positive total.
  static ExplicitDistribution Normalized(const PseudoDistribution& mass);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }

  PseudoDistribution AsPseudo() const { return PseudoDistribution(probs_); }

 private:
  std::vector<double> probs_;
};

// Integer counts per bin.
struct CountVector {
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;

  CountVector() = default;
  explicit CountVector(std::size_t n) : counts(n, 0) {}
  explicit CountVector(std::vector<std::int64_t> c);

  std::size_t size() const { return counts.size(); }
  void Add(std::size_t bin, std::int64_t k = 1) {
    counts[bin] += k;
    total += k;
  }
};

// Probability array over [n_1] x ... x [n_d], stored row-major (last axis
// fastest).
class JointDistribution {
 public:
  JointDistribution(std::vector<std::size_t> dims, std::vector<double> probs);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return flat_.size(); }
  const ExplicitDistribution& flat() const { return flat_; }

  std::vector<std::size_t> Unflatten(std::size_t flat_index) const;
  std::size_t Flatten(std::span<const std::size_t> coords) const;

  ExplicitDistribution Marginal(std::size_t axis) const;
  // Product of all one-dimensional marginals.
  JointDistribution ProductOfMarginals() const;

 private:
  std::vector<std::size_t> dims_;
  ExplicitDistribution flat_;
};

// Walker/Vose alias table: O(n) build, O(1) per draw.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights);

  std::size_t size() const { return prob_.size(); }
  std::size_t Sample(Rng& rng) const;

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

std::size_t Sample(const ExplicitDistribution& dist, Rng& rng);

// Independent per-bin Poisson counts with means k * probs[i].
CountVector PoissonizedCounts(const ExplicitDistribution& dist, double k,
                              Rng& rng);

double L1Distance(std::span<const double> p, std::span<const double> q);
double L1Distance(const PseudoDistribution& p, const PseudoDistribution& q);
double L1Distance(const ExplicitDistribution& p, const ExplicitDistribution& q);
double L2Distance(std::span<const double> p, std::span<const double> q);
double L2Norm(std::span<const double> p);
double L2Norm(const PseudoDistribution& p);
// (sum q_i^{2/3})^{3/2}.
double L23Quasinorm(const ExplicitDistribution& q);
double HellingerSq(std::span<const double> p, std::span<const double> q);
double HellingerSq(const ExplicitDistribution& p, const ExplicitDistribution& q);
// sum (p_i - q_i)^2 / q_i; +infinity when q_i = 0 < p_i.
double ChiSq(std::span<const double> p, std::span<const double> q);
double ChiSq(const ExplicitDistribution& p, const ExplicitDistribution& q);

// Bin subsets are given as 0-based index lists.
PseudoDistribution Restrict(const ExplicitDistribution& p,
                            std::span<const std::size_t> subset);
// Conditional distribution on the subset, indexed in subset order.
ExplicitDistribution Condition(const ExplicitDistribution& p,
                               std::span<const std::size_t> subset);

// Text formats. Single: "n" then n probabilities, one per line. Joint:
// "d n_1 ... n_d" then the row-major probabilities. Written with 17
// significant digits so a read-back is bit-identical.
void WriteDistribution(std::ostream& os, const ExplicitDistribution& dist);
ExplicitDistribution ReadDistribution(std::istream& is);
void WriteJoint(std::ostream& os, const JointDistribution& joint);
JointDistribution ReadJoint(std::istream& is);
std::string FormatDouble(double x);

}  // namespace disttest

#endif  // DISTTEST_DISTRIBUTION_H_
