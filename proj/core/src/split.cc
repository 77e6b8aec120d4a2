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

#include "disttest/split.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace disttest {

SplitMap::SplitMap(std::vector<std::int64_t> a)
    : a_(std::move(a)), offsets_(a_.size() + 1, 0) {
  if (a_.empty()) throw std::invalid_argument("SplitMap: empty domain");
  for (std::size_t i = 0; i < a_.size(); ++i) {
    if (a_[i] < 1) throw std::invalid_argument("SplitMap: a_i must be >= 1");
    offsets_[i + 1] = offsets_[i] + static_cast<std::size_t>(a_[i]);
  }
}

SplitMap SplitMap::Identity(std::size_t n) {
  return SplitMap(std::vector<std::int64_t>(n, 1));
}

SplitMap SplitMap::FromMultiplicities(
    std::span<const std::int64_t> multiplicity) {
  std::vector<std::int64_t> a(multiplicity.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (multiplicity[i] < 0) {
      throw std::invalid_argument("SplitMap: negative multiplicity");
    }
    a[i] = 1 + multiplicity[i];
  }
  return SplitMap(std::move(a));
}

SplitMap SplitMap::FromKnown(const ExplicitDistribution& q) {
  const double n = static_cast<double>(q.size());
  std::vector<std::int64_t> a(q.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = 1 + static_cast<std::int64_t>(std::floor(n * q[i]));
  }
  return SplitMap(std::move(a));
}

SplitMap SplitMap::FromSamples(SampleOracle& q, double k, Rng& rng) {
  if (!(k > 0.0)) throw std::invalid_argument("SplitMap: k must be > 0");
  return FromCounts(PoissonizedCounts(q, k, rng));
}

SplitMap SplitMap::Product(std::span<const SplitMap> factors) {
  if (factors.empty()) throw std::invalid_argument("SplitMap: no factors");
  std::vector<std::int64_t> a{1};
  for (const auto& f : factors) {
    std::vector<std::int64_t> next;
    next.reserve(a.size() * f.n());
    for (auto x : a) {
      for (auto y : f.a()) next.push_back(x * y);
    }
    a = std::move(next);
  }
  return SplitMap(std::move(a));
}

std::pair<std::size_t, std::size_t> SplitMap::Locate(std::size_t flat) const {
  if (flat >= n_split()) throw std::out_of_range("SplitMap::Locate");
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), flat);
  const auto bin = static_cast<std::size_t>(it - offsets_.begin()) - 1;
  return {bin, flat - offsets_[bin]};
}

std::size_t SplitSample(std::size_t bin, const SplitMap& sm, Rng& rng) {
  const auto a = static_cast<std::uint64_t>(sm.a(bin));
  return sm.Flat(bin, a == 1 ? 0 : static_cast<std::size_t>(rng.UniformInt(a)));
}

ExplicitDistribution SplitExplicit(const ExplicitDistribution& p,
                                   const SplitMap& sm) {
  if (p.size() != sm.n()) throw DimensionMismatch("SplitExplicit: size");
  std::vector<double> out(sm.n_split());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double v = p[i] / static_cast<double>(sm.a(i));
    for (std::int64_t j = 0; j < sm.a(i); ++j) {
      out[sm.Flat(i, static_cast<std::size_t>(j))] = v;
    }
  }
  return ExplicitDistribution(std::move(out));
}

double SplitNormSq(const ExplicitDistribution& p, const SplitMap& sm) {
  if (p.size() != sm.n()) throw DimensionMismatch("SplitNormSq: size");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += p[i] * p[i] / static_cast<double>(sm.a(i));
  }
  return s;
}

}  // namespace disttest
