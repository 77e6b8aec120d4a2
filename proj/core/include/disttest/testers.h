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

// l1, Hellinger, independence, collection and histogram testers. Each one
// reduces its problem to L2ClosenessTestMin on a pair of split oracles.
//
// All testers answer YES with probability >= 2/3 when the property holds
// and NO with probability >= 2/3 when the input is eps-far from it, report
// the number of draws taken from every base oracle, and are deterministic
// given their inputs and the rng state.

#ifndef DISTTEST_TESTERS_H_
#define DISTTEST_TESTERS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "disttest/constants.h"
#include "disttest/distribution.h"
#include "disttest/oracle.h"
#include "disttest/rng.h"
#include "disttest/verdict.h"

namespace disttest {

// p = q versus ||p - q||_1 >= eps for an explicit q, with O(sqrt(n)/eps^2)
// draws from p. Also accepts whenever chi^2(p, q) <= eps^2 / 10.
TestVerdict IdentityKnown(const ExplicitDistribution& q, SampleOracle& p,
                          double eps, Rng& rng,
                          const TesterConstants& c = DefaultConstants("identity_known"));

// k = min(n, ceil(n^{2/3} eps^{-4/3})), the split multiset size.
std::size_t ClosenessSplitSize(std::size_t n, double eps);

// p = q versus ||p - q||_1 >= eps for two unknown distributions on [n].
TestVerdict ClosenessEqual(SampleOracle& p, SampleOracle& q, std::size_t n,
                           double eps, Rng& rng,
                           const TesterConstants& c = DefaultConstants("closeness_equal"));

// As ClosenessEqual with split size min(n, m1) taken from q. The trace
// stage "unequal" reports the l2-stage draws per oracle as m2_p, m2_q.
TestVerdict ClosenessUnequal(SampleOracle& q, SampleOracle& p, std::size_t n,
                             double eps, double m1, Rng& rng,
                             const TesterConstants& c = DefaultConstants("closeness_unequal"));

// Level j of bin i: q_i in (2^{-j-1}, 2^{-j}], for j = 0..k_max with
// k_max = ceil(2 log2(10 n / eps)); everything smaller (including q_i = 0)
// is level kInfinity.
class BucketIndex {
 public:
  static constexpr int kInfinity = -1;

  BucketIndex(const ExplicitDistribution& q, double eps);

  static int LevelOf(double qi, int k_max);

  int k_max() const { return k_max_; }
  int level(std::size_t bin) const { return level_[bin]; }
  // Bins at `level`, in increasing order; level may be kInfinity.
  const std::vector<std::size_t>& bins(int level) const;
  // Levels holding at least one bin, finite levels first in increasing
  // order, then kInfinity.
  std::vector<int> NonemptyLevels() const;

 private:
  int k_max_;
  std::vector<int> level_;
  std::vector<std::vector<std::size_t>> by_level_;  // index k_max + 1 is infinity
};

// Identity testing against an explicit q with ~||q||_{2/3} / eps^2 draws.
TestVerdict IdentityInstanceOptimal(
    const ExplicitDistribution& q, SampleOracle& p, double eps, Rng& rng,
    const TesterConstants& c = DefaultConstants("identity_instance_optimal"));

// Closeness testing whose draw count adapts to the shape of q.
TestVerdict ClosenessAdaptive(
    SampleOracle& p, SampleOracle& q, std::size_t n, double eps, Rng& rng,
    const TesterConstants& c = DefaultConstants("closeness_adaptive"));

struct SmallMassProfile {
  std::size_t count = 0;  // nonzero bins with q_i < 1/m
  double l2norm = 0.0;    // l2 norm of those bins
};

SmallMassProfile QSmallMassProfile(const ExplicitDistribution& q, double m);

enum class HellingerBranch { kAuto, kDelegate, kCategorized };

// p = q versus H^2(p, q) >= eps. kAuto picks the l1 delegate when
// n^{2/3} eps^{-4/3} <= n^{3/4} / eps and the categorized algorithm
// otherwise; the other values force a branch.
TestVerdict HellingerCloseness(
    SampleOracle& p, SampleOracle& q, std::size_t n, double eps, Rng& rng,
    const TesterConstants& c = DefaultConstants("hellinger_closeness"),
    HellingerBranch branch = HellingerBranch::kAuto);

// True when the auto rule picks the categorized branch.
bool HellingerUsesCategorized(std::size_t n, double eps);

// Independence of the two coordinates of p on [n] x [m] (row-major, index
// i * m + j), n >= m.
TestVerdict Independence2D(
    SampleOracle& p, std::size_t n, std::size_t m, double eps, Rng& rng,
    const TesterConstants& c = DefaultConstants("independence_2d"));

// Output of the coordinate-shuffle sampler: coordinate t of the result (on
// the row-major product of group_sizes) is coordinate t of draws[t].
std::size_t CoordinateShuffle(std::span<const std::size_t> draws,
                              std::span<const std::size_t> group_sizes);

// Greedy three-way split of coordinate indices: grow the first group until
// its size product exceeds sqrt(prod dims), move the last coordinate added
// to the second group and the rest to the third. Groups may be empty.
std::array<std::vector<std::size_t>, 3> GreedyPartition(
    std::span<const std::size_t> dims);

// Full independence of p on the row-major product of dims.
TestVerdict IndependenceDD(
    SampleOracle& p, std::vector<std::size_t> dims, double eps, Rng& rng,
    const TesterConstants& c = DefaultConstants("independence_dd"));

// Independence on [n] x [m] given the exact marginal of the second
// coordinate.
TestVerdict CollectionSampling(
    SampleOracle& p, const ExplicitDistribution& known_marginal2,
    std::size_t n, std::size_t m, double eps, Rng& rng,
    const TesterConstants& c = DefaultConstants("collection_sampling"));

// Picks per level k = 0..ceil(log2 m): ceil(2^{5k/4} C).
std::vector<std::size_t> CollectionQuerySchedule(std::size_t m, double c_query);

// All q_i identical versus no q with mean_i ||q - q_i||_1 <= eps, with
// per-distribution sample access. samples_used is keyed "q1", "q2", ...
TestVerdict CollectionQuery(
    std::span<SampleOracle* const> oracles, std::size_t n, double eps,
    Rng& rng, const TesterConstants& c = DefaultConstants("collection_query"));

// A partition of [0, n) into contiguous nonempty intervals.
class IntervalPartition {
 public:
  // starts[0] must be 0 and starts strictly increasing below n.
  IntervalPartition(std::size_t n, std::vector<std::size_t> starts);
  static IntervalPartition Equal(std::size_t n, std::size_t k);

  std::size_t n() const { return n_; }
  std::size_t k() const { return starts_.size(); }
  std::size_t begin(std::size_t i) const { return starts_[i]; }
  std::size_t end(std::size_t i) const {
    return i + 1 < starts_.size() ? starts_[i + 1] : n_;
  }
  std::size_t length(std::size_t i) const { return end(i) - begin(i); }
  std::size_t IntervalOf(std::size_t bin) const;

 private:
  std::size_t n_;
  std::vector<std::size_t> starts_;
};

// ceil(n / (k |I_i|)) sub-bins per bin of interval i.
std::vector<std::int64_t> HistogramPreRefinement(const IntervalPartition& part);

// p flat on every interval of part versus eps-far from every such p.
TestVerdict KHistogram(SampleOracle& p, std::size_t n,
                       const IntervalPartition& part, double eps, Rng& rng,
                       const TesterConstants& c = DefaultConstants("k_histogram"));

}  // namespace disttest

#endif  // DISTTEST_TESTERS_H_
