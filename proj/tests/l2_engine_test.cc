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

#include "disttest/l2_engine.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "disttest/distribution.h"
#include "disttest/oracle.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace disttest {
namespace {

TEST(L2StatisticTest, Examples) {
  EXPECT_EQ(ComputeL2Statistic(CountVector({1, 1}), CountVector({1, 1})).z, -4);
  EXPECT_EQ(ComputeL2Statistic(CountVector({3, 1}), CountVector({1, 2})).z, -2);
  EXPECT_EQ(ComputeL2Statistic(CountVector({0, 0, 0}), CountVector({0, 0, 0})).z, 0);
  EXPECT_THROW(ComputeL2Statistic(CountVector({1}), CountVector({1, 2})),
               DimensionMismatch);
}

TEST(L2StatisticTest, EqualCountsGiveMinusTwiceTotal) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::int64_t> c(1 + rng.UniformInt(20));
    for (auto& x : c) x = static_cast<std::int64_t>(rng.UniformInt(50));
    const CountVector v(c);
    EXPECT_EQ(ComputeL2Statistic(v, v).z, -2 * v.total);
  }
}

TEST(L2StatisticTest, OrderInvariant) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.UniformInt(30);
    std::vector<std::int64_t> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<std::int64_t>(rng.UniformInt(1000));
      y[i] = static_cast<std::int64_t>(rng.UniformInt(1000));
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.UniformInt(i)]);
    std::vector<std::int64_t> px(n), py(n);
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = x[perm[i]];
      py[i] = y[perm[i]];
    }
    EXPECT_EQ(ComputeL2Statistic(CountVector(x), CountVector(y)).z,
              ComputeL2Statistic(CountVector(px), CountVector(py)).z);
  }
}

TEST(L2StatisticTest, UnbiasedForScaledSquaredDistance) {
  // Brute Monte Carlo: mean(z)/m^2 against the exact ||p-q||_2^2.
  Rng rng(3);
  for (std::size_t n : {10u, 100u}) {
    const auto p = testutil::RandomDistribution(n, rng);
    const auto q = testutil::RandomDistribution(n, rng);
    const double m = 50;
    const int trials = 40000;
    double s = 0, s2 = 0;
    for (int t = 0; t < trials; ++t) {
      const double z = static_cast<double>(
          ComputeL2Statistic(PoissonizedCounts(p, m, rng), PoissonizedCounts(q, m, rng)).z);
      s += z / (m * m);
      s2 += (z / (m * m)) * (z / (m * m));
    }
    const double mean = s / trials;
    const double se = std::sqrt((s2 / trials - mean * mean) / trials);
    const double d = L2Distance(p.probs(), q.probs());
    EXPECT_NEAR(mean, d * d, 5 * se) << n;
  }
}

TEST(L2ClosenessTest, RejectsBadEpsilon) {
  Rng rng(4);
  ExplicitOracle p(ExplicitDistribution::Uniform(10)), q(ExplicitDistribution::Uniform(10));
  L2TestConfig cfg;
  cfg.epsilon = 0;
  cfg.b = 0.1;
  EXPECT_THROW(L2ClosenessTest(p, q, 10, cfg, rng), std::invalid_argument);
  cfg.epsilon = 2.5;
  EXPECT_THROW(L2ClosenessTest(p, q, 10, cfg, rng), std::invalid_argument);
  cfg.epsilon = 0.5;
  cfg.b = 0;
  EXPECT_THROW(L2ClosenessTest(p, q, 10, cfg, rng), std::invalid_argument);
}

TEST(L2ClosenessTest, AcceptsEqualUniform) {
  const auto u = ExplicitDistribution::Uniform(100);
  L2TestConfig cfg;
  cfg.epsilon = 0.5;
  cfg.b = 0.1;
  const double rate = testutil::Rate(500, 10, [&](Rng& rng) {
    ExplicitOracle p(u), q(u);
    return L2ClosenessTest(p, q, 100, cfg, rng).yes();
  });
  EXPECT_GE(rate, 0.9);
}

TEST(L2ClosenessTest, RejectsPerturbationAtSoundnessRadius) {
  const auto u = ExplicitDistribution::Uniform(100);
  const auto far = testutil::AlternatingPerturbation(100, 0.5);
  ASSERT_NEAR(L2Distance(u.probs(), far.probs()), 0.05, 1e-12);
  L2TestConfig cfg;
  cfg.epsilon = 0.5;
  cfg.b = 0.1;
  const double rate = testutil::Rate(500, 11, [&](Rng& rng) {
    ExplicitOracle p(far), q(u);
    return !L2ClosenessTest(p, q, 100, cfg, rng).yes();
  });
  EXPECT_GE(rate, 0.9);
}

TEST(L2ClosenessTest, RecordsSamplesAndTrace) {
  Rng rng(12);
  ExplicitOracle p(ExplicitDistribution::Uniform(50)), q(ExplicitDistribution::Uniform(50));
  L2TestConfig cfg;
  cfg.epsilon = 1.0;
  cfg.b = 0.2;
  const auto v = L2ClosenessTest(p, q, 50, cfg, rng);
  EXPECT_EQ(v.SamplesFrom("p"), p.samples_drawn());
  EXPECT_EQ(v.SamplesFrom("q"), q.samples_drawn());
  const auto* st = v.FindStage("l2");
  ASSERT_NE(st, nullptr);
  EXPECT_DOUBLE_EQ(st->Get("m"), 20 * 0.2 * 50 / 1.0);
  EXPECT_DOUBLE_EQ(st->Get("threshold"), 0.625 * 200 * 200 * 1.0 / 50);
}

TEST(L2ClosenessTest, MajorityVoteAmplifies) {
  EXPECT_EQ(AmplificationRepetitions(0.4), 1);
  EXPECT_EQ(AmplificationRepetitions(1.0 / 3.0), 1);
  // ceil(18 ln 10) = 42, made odd.
  EXPECT_EQ(AmplificationRepetitions(0.1), 43);
  int calls = 0;
  EXPECT_EQ(MajorityVote(5, [&] { return ++calls <= 3 ? Answer::kYes : Answer::kNo; }),
            Answer::kYes);
  EXPECT_EQ(calls, 3);
}

TEST(NormEstimateTest, CollisionStatistic) {
  EXPECT_DOUBLE_EQ(CollisionStatistic(CountVector({2, 0, 1}), 3), 2.0 / 9.0);
}

TEST(NormEstimateTest, PointMassWithinFactorTwo) {
  const auto pm = ExplicitDistribution::PointMass(64, 5);
  const double rate = testutil::Rate(400, 20, [&](Rng& rng) {
    ExplicitOracle o(pm);
    const double e = L2NormEstimate(o, 1.0 / 3, rng);
    return e >= 0.5 && e <= 2.0;
  });
  EXPECT_GE(rate, 0.95);
}

TEST(NormEstimateTest, UniformWithinFactorTwoAndFloored) {
  for (std::size_t n : {16u, 1000u}) {
    const auto u = ExplicitDistribution::Uniform(n);
    const double truth = 1.0 / std::sqrt(static_cast<double>(n));
    const double rate = testutil::Rate(400, 21 + n, [&](Rng& rng) {
      ExplicitOracle o(u);
      const double e = L2NormEstimate(o, 1.0 / 3, rng);
      EXPECT_GE(e, truth * (1 - 1e-12));
      return e >= truth / 2 && e <= truth * 2;
    });
    EXPECT_GE(rate, 0.95) << n;
  }
}

TEST(L2ClosenessTestMin, AcceptsEqualUniform) {
  const auto u = ExplicitDistribution::Uniform(64);
  L2TestConfig cfg;
  cfg.epsilon = 0.5;
  cfg.b = 1.0 / 8;
  const double rate = testutil::Rate(500, 30, [&](Rng& rng) {
    ExplicitOracle p(u), q(u);
    return L2ClosenessTestMin(p, q, 64, cfg, rng).yes();
  });
  EXPECT_GE(rate, 0.9);
}

TEST(L2ClosenessTestMin, NormRatioAtBoundaryStillRejects) {
  // Point mass vs uniform[64]: the norm ratio is exactly 8, so the shortcut
  // fires about half the time and the l2 stage has to catch the rest.
  const auto u = ExplicitDistribution::Uniform(64);
  const auto pm = ExplicitDistribution::PointMass(64, 0);
  L2TestConfig cfg;
  cfg.epsilon = 0.5;
  cfg.b = 1.0 / 8;
  const double rate = testutil::Rate(500, 31, [&](Rng& rng) {
    ExplicitOracle p(pm), q(u);
    return !L2ClosenessTestMin(p, q, 64, cfg, rng).yes();
  });
  EXPECT_GE(rate, 0.9);
}

TEST(L2ClosenessTestMin, LargeNormMismatchShortCircuits) {
  // Ratio 32: the norm check alone should reject.
  const auto u = ExplicitDistribution::Uniform(1024);
  const auto pm = ExplicitDistribution::PointMass(1024, 0);
  L2TestConfig cfg;
  cfg.epsilon = 0.5;
  cfg.b = 1.0 / 32;
  int mismatch = 0;
  const double rate = testutil::Rate(300, 34, [&](Rng& rng) {
    ExplicitOracle p(pm), q(u);
    const auto v = L2ClosenessTestMin(p, q, 1024, cfg, rng);
    if (v.FindStage("norm_check")->verdict == Answer::kNo) ++mismatch;
    return !v.yes();
  });
  EXPECT_GE(rate, 0.95);
  EXPECT_GE(mismatch, 285);
}

TEST(L2ClosenessTestMin, EqualArbitraryAcceptsRegardlessOfB) {
  Rng setup(32);
  const auto d = testutil::RandomDistribution(40, setup);
  L2TestConfig cfg;
  cfg.epsilon = 0.5;
  cfg.b = 1e-3;  // wrong on purpose; completeness must not depend on it
  const double rate = testutil::Rate(300, 33, [&](Rng& rng) {
    ExplicitOracle p(d), q(d);
    return L2ClosenessTestMin(p, q, 40, cfg, rng).yes();
  });
  EXPECT_GE(rate, 2.0 / 3);
}

}  // namespace
}  // namespace disttest
