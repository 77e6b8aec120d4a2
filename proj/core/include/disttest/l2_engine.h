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

// The l2 closeness core. Every l1 tester in this library ends in a call to
// L2ClosenessTestMin on a pair of (split) oracles.
//
// Statistic: with X_i ~ Poi(m p_i), Y_i ~ Poi(m q_i) independent,
//   z = sum_i (X_i - Y_i)^2 - X_i - Y_i,   E[z] = m^2 ||p - q||_2^2.
// The robust tester draws m = c_sample * b * n / eps^2 and accepts iff
//   z <= c_thresh * (5/8) * m^2 * eps^2 / n,
// the midpoint of the squared radii eps^2/(4n) and eps^2/n.

#ifndef DISTTEST_L2_ENGINE_H_
#define DISTTEST_L2_ENGINE_H_

#include <cstddef>
#include <cstdint>
#include <functional>

#include "disttest/distribution.h"
#include "disttest/oracle.h"
#include "disttest/rng.h"
#include "disttest/verdict.h"

namespace disttest {

// Defaults for direct use of the l2 tester. The testers built on top of it
// take their constants from TesterConstants instead.
inline constexpr double kDefaultCSample = 20.0;
inline constexpr double kDefaultCNorm = 4.0;

struct L2Statistic {
  std::int64_t z = 0;
  double m = 0.0;
  std::size_t n_bins = 0;
};

struct L2TestConfig {
  double epsilon = 0.0;
  // Upper bound on the l2 norm (max norm for L2ClosenessTest, min norm for
  // L2ClosenessTestMin).
  double b = 0.0;
  double fail_prob = 1.0 / 3.0;
  double c_sample = kDefaultCSample;
  double c_thresh = 1.0;
  // Norm estimator draws c_norm * sqrt(n) samples per repetition.
  double c_norm = kDefaultCNorm;
  // Called with (m, repetitions) before any l2-stage draw; may throw to
  // abort the test.
  std::function<void(double, int)> on_plan;

  // Throws std::invalid_argument unless eps in (0, 2], b > 0 and
  // fail_prob in (0, 1/2).
  void Validate() const;
};

// Exact integer computation; iteration order does not matter.
L2Statistic ComputeL2Statistic(const CountVector& x, const CountVector& y,
                               double m = 0.0);

// sum x_i (x_i - 1) / m^2, the unbiased collision estimate of ||p||_2^2.
double CollisionStatistic(const CountVector& x, double m);

// Majority-vote repetitions to push a 1/3-error test to error delta:
// ceil(18 ln(1/delta)), made odd; 1 when delta >= 1/3.
int AmplificationRepetitions(double delta);

// Runs `trial` reps times and returns the majority answer. Ties go to NO.
Answer MajorityVote(int reps, const std::function<Answer()>& trial,
                    int* yes_votes = nullptr);

// Robust l2 closeness: YES when ||p-q||_2 <= eps/(2 sqrt n), NO when
// ||p-q||_2 >= eps/sqrt n, given b >= max(||p||_2, ||q||_2).
TestVerdict L2ClosenessTest(SampleOracle& p, SampleOracle& q, std::size_t n,
                            const L2TestConfig& cfg, Rng& rng);

// Factor-2 estimate of ||p||_2, never below 1/sqrt(n). Median of
// 2 ceil(ln(1/fail_prob)) + 1 collision estimates on Poi(c_norm sqrt n)
// draws.
double L2NormEstimate(SampleOracle& p, double fail_prob, Rng& rng,
                      double c_norm = kDefaultCNorm);

// p = q versus ||p-q||_1 > eps, given b >= min(||p||_2, ||q||_2). Returns NO
// outright when the norm estimates differ by more than a factor 8, then runs
// L2ClosenessTest with b = 4 * (smaller estimate).
TestVerdict L2ClosenessTestMin(SampleOracle& p, SampleOracle& q, std::size_t n,
                               const L2TestConfig& cfg, Rng& rng);

inline constexpr double kNormMismatchFactor = 8.0;

}  // namespace disttest

#endif  // DISTTEST_L2_ENGINE_H_
