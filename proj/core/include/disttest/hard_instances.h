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

// Lower-bound instance families with exact farness certificates, and exact
// mutual-information oracles for their Poissonized sample counts.

#ifndef DISTTEST_HARD_INSTANCES_H_
#define DISTTEST_HARD_INSTANCES_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "disttest/distribution.h"
#include "disttest/rng.h"
#include "disttest/verdict.h"

namespace disttest {

struct HardInstancePair {
  std::string family;
  Answer label = Answer::kYes;
  PseudoDistribution measure;
  // Second measure of two-distribution families (hellinger_pair).
  std::optional<PseudoDistribution> second;
  double total_mass = 0.0;
  // Exact farness statistic of the normalized instance. Its meaning is per
  // family: product_distance for the 2D families, normalized H^2 for
  // hellinger_pair, nearest-flat l1 distance for histogram_hard_pair.
  std::optional<double> certified_farness;
  // NO draws: whether certified_farness reached the family threshold.
  bool certified = true;
  double certification_threshold = 0.0;
  std::vector<std::size_t> dims;
  std::map<std::string, double> params;

  ExplicitDistribution Normalized() const { return ExplicitDistribution::Normalized(measure); }
  ExplicitDistribution NormalizedSecond() const {
    return ExplicitDistribution::Normalized(*second);
  }
};

// (uniform[n], q) with q_i = (1 +- eps)/n, signs opposite within each pair
// (2t, 2t+1) and random per pair. For odd n the last bin is unperturbed.
std::pair<ExplicitDistribution, ExplicitDistribution> PaninskiPair(
    std::size_t n, double eps, Rng& rng);

// Uniform measure on [n] x [m] (YES) or i.i.d. (1 +- eps)/(nm) cells (NO).
HardInstancePair ProductYesNo2D(std::size_t n, std::size_t m, double eps,
                                Rng& rng, Answer which);

// Rows are heavy (c_i = 1/k) with probability k/n; heavy cells get
// 1/(km), light cells c_i/m (YES) or (1 +- eps)/(nm) (NO). Needs k <= n/2.
HardInstancePair HeavyLightYesNo2D(std::size_t n, std::size_t m, std::size_t k,
                                   double eps, Rng& rng, Answer which);

// Bins 0..n-2: with probability min(k/n, 1/2) p_i = q_i = 1/(2k); else
// p_i = q_i = eps/n (YES) or one of p_i, q_i is 2eps/n and the other 0
// (NO). Bin n-1 has mass 1/3 in both.
HardInstancePair HellingerPair(std::size_t n, std::size_t k, double eps,
                               Rng& rng, Answer which);

// ||nu - nu_1 x nu_2 / ||nu||_1||_1 for nu on [n] x [m]. A quarter of this
// value divided by ||nu||_1 lower-bounds the l1 distance of nu/||nu||_1 to
// the nearest product distribution.
double ProductDistance(std::span<const double> nu, std::size_t n, std::size_t m);

// sum_i sum_{b in I_i} |p_b - mean_{I_i} p| for the normalized measure:
// the distance to the flattening of p on the intervals of length n/k.
double NearestFlatDistance(std::span<const double> p, std::size_t k);

// The 2D construction on [k] x [n/k], flattened row-major so interval i is
// row i. YES draws are exact k-histograms. NO requires k < n; n % k == 0.
HardInstancePair HistogramHardPair(std::size_t n, std::size_t k, double eps,
                                   Rng& rng, Answer which);

// Sidecar JSON for a generated instance.
void WriteSidecar(std::ostream& os, const HardInstancePair& inst, std::uint64_t seed);

struct MIEstimate {
  double value = 0.0;  // nats
  std::string method;  // "exact-series" or "exact-enumeration"
  double truncation_error_bound = 0.0;
  std::int64_t terms = 0;
};

// Threshold on I(X : samples) below which no rule guesses a uniform bit X
// with probability 0.51.
inline constexpr double kMiDistinguishThreshold = 2e-4;

// I(X : a) for one cell count a ~ Poi(lambda) (X = 0) or an equal mixture
// of Poi(lambda (1 + eps)) and Poi(lambda (1 - eps)) (X = 1), with
// lambda = k / (n m) and X a uniform bit.
MIEstimate MiPerBin(double k, double n, double m, double eps,
                    std::int64_t max_terms = 100000);

inline constexpr int kMaxCountCap = 40;

// I(X : A) for the count row A = (a_1..a_m) of the heavy-light family under
// a Poi(k) process: with probability k/n all cells are Poi(1/m), otherwise
// i.i.d. as in MiPerBin. Exact enumeration over {0..count_cap}^m with a
// rigorous bound on the excluded rows. Needs m <= 4, 0 < k <= n/2.
// count_cap = 0 picks the smallest cap in 8, 12, ..., 40 whose bound is
// below max(1e-9 value, 1e-15).
MIEstimate MiHeavyLightRow(double k, std::size_t n, std::size_t m, double eps,
                           int count_cap = 0);

// I(X : (a_1..a_bins)) for `bins` cells of the uniform-vs-perturbed family,
// by enumeration. Needs bins <= 4, count_cap <= kMaxCountCap.
MIEstimate MiJointCells(double k, double n, double m, double eps,
                        std::size_t bins, int count_cap = 40);

}  // namespace disttest

#endif  // DISTTEST_HARD_INSTANCES_H_
