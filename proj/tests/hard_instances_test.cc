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

#include "disttest/hard_instances.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

namespace disttest {
namespace {

// Direct two-mixture computation for a single cell, used as an independent
// cross-check of the enumeration. No cancellation tricks.
double DirectRowMi(double k, double n, double eps) {
  using R = long double;
  const R w = k / n, lambda = k / n, e = eps;
  auto pois = [](R mu, int l) { return std::exp(l * std::log(mu) - mu - std::lgamma(R(l) + 1)); };
  R s = 0;
  for (int l = 0; l < 60; ++l) {
    const R p0 = w * pois(1, l) + (1 - w) * pois(lambda, l);
    const R p1 = w * pois(1, l) + (1 - w) * (pois(lambda * (1 + e), l) + pois(lambda * (1 - e), l)) / 2;
    const R m = (p0 + p1) / 2;
    s += (p0 * std::log(p0 / m) + p1 * std::log(p1 / m)) / 2;
  }
  return static_cast<double>(s);
}

TEST(PaninskiPair, ExactDistances) {
  Rng rng(1);
  for (std::size_t n : {4u, 100u, 1000u}) {
    auto [u, q] = PaninskiPair(n, 0.3, rng);
    double sum = 0;
    for (double x : q.probs()) sum += x;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(L1Distance(u, q), 0.3, 1e-12);
    EXPECT_NEAR(L2Distance(u.probs(), q.probs()), 0.3 / std::sqrt(double(n)), 1e-12);
  }
  auto [a, b] = PaninskiPair(10, 0.0, rng);
  EXPECT_EQ(L1Distance(a, b), 0.0);
}

TEST(ProductDistance, WorkedExamples) {
  EXPECT_NEAR(ProductDistance(std::vector<double>{0.5, 0, 0, 0.5}, 2, 2), 1.0, 1e-15);
  const std::vector<double> prod{0.1 * 0.3, 0.1 * 0.7, 0.9 * 0.3, 0.9 * 0.7};
  EXPECT_NEAR(ProductDistance(prod, 2, 2), 0.0, 1e-15);
  Rng rng(2);
  const auto inst = ProductYesNo2D(8, 8, 0.5, rng, Answer::kNo);
  std::vector<double> scaled(inst.measure.mass().begin(), inst.measure.mass().end());
  for (auto& x : scaled) x *= 3.5;
  EXPECT_NEAR(ProductDistance(scaled, 8, 8),
              3.5 * ProductDistance(inst.measure.mass(), 8, 8), 1e-13);
}

TEST(ProductYesNo2D, YesIsUniformAndNoIsCertified) {
  Rng rng(3);
  const auto yes = ProductYesNo2D(32, 32, 0.5, rng, Answer::kYes);
  for (double x : yes.measure.mass()) EXPECT_EQ(x, 1.0 / 1024);
  EXPECT_NEAR(*yes.certified_farness, 0.0, 1e-15);
  int certified = 0, mass_ok = 0;
  for (int t = 0; t < 200; ++t) {
    const auto no = ProductYesNo2D(32, 32, 0.5, rng, Answer::kNo);
    certified += *no.certified_farness >= 0.5 / 16 ? 1 : 0;
    mass_ok += std::abs(no.total_mass - 1.0) <= 5 * 0.5 / 32 ? 1 : 0;
  }
  EXPECT_GE(certified, 190);
  EXPECT_GE(mass_ok, 190);
}

TEST(HeavyLightYesNo2D, YesIsProductNoIsFar) {
  Rng rng(4);
  const auto yes = HeavyLightYesNo2D(128, 8, 16, 0.5, rng, Answer::kYes);
  EXPECT_NEAR(ProductDistance(yes.measure.mass(), 128, 8), 0.0, 1e-14);
  int certified = 0;
  for (int t = 0; t < 200; ++t) {
    certified += HeavyLightYesNo2D(128, 8, 16, 0.5, rng, Answer::kNo).certified ? 1 : 0;
  }
  EXPECT_GE(certified, 190);
  EXPECT_THROW(HeavyLightYesNo2D(10, 2, 6, 0.5, rng, Answer::kNo), std::invalid_argument);
  // With eps = 0 the NO law is the YES law: product measures with cells
  // 1/(km) or 1/(nm).
  for (int t = 0; t < 20; ++t) {
    const auto b = HeavyLightYesNo2D(64, 4, 8, 0.0, rng, Answer::kNo);
    EXPECT_NEAR(ProductDistance(b.measure.mass(), 64, 4), 0.0, 1e-14);
    for (double x : b.measure.mass()) {
      EXPECT_TRUE(x == 1.0 / 32 || x == 1.0 / 256) << x;
    }
  }
}

TEST(HellingerPair, YesEqualNoFar) {
  Rng rng(5);
  const auto yes = HellingerPair(1000, 10, 0.1, rng, Answer::kYes);
  EXPECT_EQ(std::vector<double>(yes.measure.mass().begin(), yes.measure.mass().end()),
            std::vector<double>(yes.second->mass().begin(), yes.second->mass().end()));
  int far = 0, mass = 0;
  for (int t = 0; t < 100; ++t) {
    const auto no = HellingerPair(10000, 100, 0.1, rng, Answer::kNo);
    far += *no.certified_farness >= 0.1 / 4 ? 1 : 0;
    const double a = no.measure.total(), b = no.second->total();
    mass += (a >= 0.3 && a <= 3 && b >= 0.3 && b <= 3) ? 1 : 0;
  }
  EXPECT_GE(far, 95);
  EXPECT_GE(mass, 99);
}

TEST(HistogramHardPair, YesFlatNoFar) {
  Rng rng(6);
  const auto yes = HistogramHardPair(512, 8, 0.5, rng, Answer::kYes);
  EXPECT_NEAR(NearestFlatDistance(yes.measure.mass(), 8), 0.0, 1e-15);
  int certified = 0;
  for (int t = 0; t < 100; ++t) {
    certified += *HistogramHardPair(512, 8, 0.5, rng, Answer::kNo).certified_farness >= 0.5 / 8;
  }
  EXPECT_GE(certified, 95);
  EXPECT_THROW(HistogramHardPair(16, 16, 0.5, rng, Answer::kNo), std::invalid_argument);
  EXPECT_NO_THROW(HistogramHardPair(16, 16, 0.5, rng, Answer::kYes));
}

TEST(WriteSidecar, EmitsLabelAndFarness) {
  Rng rng(7);
  const auto no = ProductYesNo2D(4, 4, 0.5, rng, Answer::kNo);
  std::ostringstream os;
  WriteSidecar(os, no, 7);
  const std::string s = os.str();
  EXPECT_NE(s.find("\"label\": \"NO\""), std::string::npos);
  EXPECT_NE(s.find("\"certified_farness\""), std::string::npos);
  EXPECT_NE(s.find("\"seed\": 7"), std::string::npos);
}

TEST(MiPerBin, ZeroAtZeroEpsAndSymmetric) {
  EXPECT_EQ(MiPerBin(100, 100, 10, 0.0).value, 0.0);
  const auto a = MiPerBin(50, 100, 10, 0.2), b = MiPerBin(50, 100, 10, -0.2);
  EXPECT_NEAR(a.value, b.value, 1e-15 + 1e-12 * a.value);
  EXPECT_LT(a.truncation_error_bound, std::max(1e-9 * a.value, 1e-15));
}

TEST(MiPerBin, ScalesAsLambdaSquaredEpsFourth) {
  double lo = 1e300, hi = 0;
  for (double lambda : {0.01, 0.1, 0.5}) {
    for (double eps : {0.05, 0.1, 0.2}) {
      const auto est = MiPerBin(lambda * 1000, 100, 10, eps);
      const double r = est.value / (lambda * lambda * std::pow(eps, 4));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  EXPECT_LT(hi / lo, 3.0);
}

TEST(MiPerBin, MonotoneInEps) {
  double prev = 0.0;
  for (int i = 1; i <= 50; ++i) {
    const double v = MiPerBin(30, 10, 10, 0.01 * i).value;
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(MiHeavyLightRow, SingleCellMatchesDirectMixture) {
  for (double eps : {0.1, 0.3}) {
    for (double k : {4.0, 16.0, 32.0}) {
      const auto est = MiHeavyLightRow(k, 64, 1, eps);
      EXPECT_NEAR(est.value, DirectRowMi(k, 64, eps), 1e-10 * est.value);
    }
  }
  EXPECT_EQ(MiHeavyLightRow(8, 64, 2, 0.0).value, 0.0);
}

// Reference values from an independent 40-digit brute-force sum.
TEST(MiHeavyLightRow, MatchesHighPrecisionReference) {
  struct Case {
    double k, eps, value;
  };
  const Case cases[] = {{8, 0.1, 9.3599874189e-9},  {8, 0.2, 1.49540146977e-7},
                        {16, 0.1, 3.9459404249e-8}, {16, 0.2, 6.30643473102e-7},
                        {32, 0.1, 9.96671705213e-8}, {32, 0.2, 1.59339974467e-6}};
  for (const auto& c : cases) {
    const auto est = MiHeavyLightRow(c.k, 64, 2, c.eps);
    EXPECT_NEAR(est.value, c.value, 1e-10 * c.value) << c.k << " " << c.eps;
    EXPECT_LT(est.truncation_error_bound, std::max(1e-9 * est.value, 1e-15));
  }
}

TEST(MiJointCells, SubadditiveOverCells) {
  for (double k : {10.0, 100.0}) {
    const double one = MiPerBin(k, 10, 10, 0.3).value;
    const double two = MiJointCells(k, 10, 10, 0.3, 2).value;
    EXPECT_LE(two, 2 * one + 1e-12);
    EXPECT_GT(two, one);
  }
}

TEST(MiOracles, RejectOutOfRangeArguments) {
  EXPECT_THROW(MiPerBin(0, 10, 10, 0.1), std::invalid_argument);
  EXPECT_THROW(MiPerBin(1, 10, 10, 1.0), std::invalid_argument);
  EXPECT_THROW(MiHeavyLightRow(8, 64, 5, 0.1), std::invalid_argument);
  EXPECT_THROW(MiHeavyLightRow(8, 64, 2, 0.1, 41), std::invalid_argument);
  EXPECT_THROW(MiHeavyLightRow(40, 64, 2, 0.1), std::invalid_argument);
}

}  // namespace
}  // namespace disttest
