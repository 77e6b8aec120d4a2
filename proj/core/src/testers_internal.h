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

// Pieces shared by the tester translation units.

#ifndef DISTTEST_SRC_TESTERS_INTERNAL_H_
#define DISTTEST_SRC_TESTERS_INTERNAL_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "disttest/constants.h"
#include "disttest/oracle.h"
#include "disttest/rng.h"
#include "disttest/split.h"
#include "disttest/verdict.h"

namespace disttest::internal {

void ValidateEps(double eps, const char* who);

// Records base-oracle counters at construction and reports the difference.
class SampleMeter {
 public:
  void Track(std::string name, const SampleOracle& oracle) {
    entries_.emplace_back(std::move(name), &oracle, oracle.samples_drawn());
  }
  void Fill(TestVerdict& v) const {
    v.samples_used.clear();
    for (const auto& [name, o, start] : entries_) {
      v.samples_used.emplace_back(name, o->samples_drawn() - start);
    }
  }
  std::uint64_t Total() const {
    std::uint64_t s = 0;
    for (const auto& [name, o, start] : entries_) s += o->samples_drawn() - start;
    return s;
  }

 private:
  std::vector<std::tuple<std::string, const SampleOracle*, std::uint64_t>> entries_;
};

// Split both oracles by Poi(k) draws from q and run the min-norm l2 test at
// l1 radius eps with the given failure probability. Trace stages: "split"
// and the l2 stages. The "split" stage also records stage_draws_p/q, the
// draws taken after the split was built.
TestVerdict SplitCloseness(SampleOracle& p, SampleOracle& q, std::size_t n,
                           double eps, double k, double fail_prob,
                           const TesterConstants& c, Rng& rng);

// ClosenessEqual with an explicit failure probability.
TestVerdict ClosenessWithFailure(SampleOracle& p, SampleOracle& q,
                                 std::size_t n, double eps, double fail_prob,
                                 const TesterConstants& c, Rng& rng);

// Test of p against the product of its group marginals. p lives on the
// row-major product of `group_sizes`; splits[t] subdivides group t. The
// q oracle takes coordinate t from the t-th of len(group_sizes) fresh draws
// of p.
TestVerdict ProductSplitTest(SampleOracle& p,
                             const std::vector<std::size_t>& group_sizes,
                             const std::vector<SplitMap>& splits, double eps,
                             double b, double fail_prob,
                             const TesterConstants& c, Rng& rng);

// Split of group t from Poi(k) draws of p projected onto that group.
SplitMap GroupSplitFromSamples(SampleOracle& p,
                               const std::vector<std::size_t>& group_sizes,
                               std::size_t group, double k, Rng& rng);

}  // namespace disttest::internal

#endif  // DISTTEST_SRC_TESTERS_INTERNAL_H_
