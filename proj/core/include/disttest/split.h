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

// Split distributions. Bin i is subdivided into a_i >= 1 equal sub-bins,
// where a_i is one plus the multiplicity of i in a multiset S. Splitting
// preserves l1 and chi-squared distances and shrinks the l2 norm.
//
// Sub-bin (i, j), 0 <= j < a_i, has flat index offsets[i] + j.

#ifndef DISTTEST_SPLIT_H_
#define DISTTEST_SPLIT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "disttest/distribution.h"
#include "disttest/oracle.h"
#include "disttest/rng.h"

namespace disttest {

class SplitMap {
 public:
  // a_i = 1 for every bin.
  static SplitMap Identity(std::size_t n);
  // a_i = 1 + multiplicity[i].
  static SplitMap FromMultiplicities(std::span<const std::int64_t> multiplicity);
  static SplitMap FromCounts(const CountVector& counts) {
    return FromMultiplicities(counts.counts);
  }
  // a_i = 1 + floor(n q_i).
  static SplitMap FromKnown(const ExplicitDistribution& q);
  // S = Poi(k) draws from q.
  static SplitMap FromSamples(SampleOracle& q, double k, Rng& rng);
  // Split of a product domain (row-major), a_{(i_1..i_d)} = prod_t a^t_{i_t}.
  static SplitMap Product(std::span<const SplitMap> factors);

  std::size_t n() const { return a_.size(); }
  std::size_t n_split() const { return offsets_.back(); }
  std::int64_t a(std::size_t i) const { return a_[i]; }
  std::span<const std::int64_t> a() const { return a_; }
  std::int64_t multiset_size() const {
    return static_cast<std::int64_t>(n_split()) - static_cast<std::int64_t>(n());
  }

  std::size_t Flat(std::size_t bin, std::size_t sub) const {
    return offsets_[bin] + sub;
  }
  // Inverse of Flat.
  std::pair<std::size_t, std::size_t> Locate(std::size_t flat) const;

 private:
  explicit SplitMap(std::vector<std::int64_t> a);

  std::vector<std::int64_t> a_;
  std::vector<std::size_t> offsets_;
};

// Maps one draw i from p to a draw from p_S: (i, j) with j uniform on [a_i].
std::size_t SplitSample(std::size_t bin, const SplitMap& sm, Rng& rng);

// Exact pmf of p_S; (i, j) has mass p_i / a_i.
ExplicitDistribution SplitExplicit(const ExplicitDistribution& p,
                                   const SplitMap& sm);

// ||p_S||_2^2 = sum_i p_i^2 / a_i.
double SplitNormSq(const ExplicitDistribution& p, const SplitMap& sm);

// Oracle for p_S built on an oracle for p. Holds references; both
// arguments must outlive it.
class SplitOracle final : public SampleOracle {
 public:
  SplitOracle(SampleOracle& base, const SplitMap& sm) : base_(base), sm_(sm) {}
  std::size_t domain_size() const override { return sm_.n_split(); }

 protected:
  std::size_t Draw(Rng& rng) override {
    return SplitSample(base_.NextSample(rng), sm_, rng);
  }

 private:
  SampleOracle& base_;
  const SplitMap& sm_;
};

}  // namespace disttest

#endif  // DISTTEST_SPLIT_H_
