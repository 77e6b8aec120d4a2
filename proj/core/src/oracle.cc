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

#include "disttest/oracle.h"

#include <string>

namespace disttest {

ReplayOracle::ReplayOracle(std::vector<std::size_t> samples, std::size_t domain)
    : samples_(std::move(samples)), domain_(domain) {
  for (auto s : samples_) {
    if (s >= domain_) {
      throw std::out_of_range("replay sample " + std::to_string(s) +
                              " outside domain of size " +
                              std::to_string(domain_));
    }
  }
}

std::size_t ReplayOracle::Draw(Rng& /*rng*/) {
  if (next_ >= samples_.size()) {
    throw InsufficientSamples("replay oracle exhausted after " +
                              std::to_string(samples_.size()) + " samples");
  }
  return samples_[next_++];
}

ConditionalOracle::ConditionalOracle(SampleOracle& base,
                                     const std::vector<std::size_t>& subset,
                                     std::uint64_t max_draws)
    : base_(base),
      position_(base.domain_size(), -1),
      subset_size_(subset.size()),
      max_draws_(max_draws) {
  if (subset.empty()) throw std::invalid_argument("ConditionalOracle: empty subset");
  for (std::size_t k = 0; k < subset.size(); ++k) {
    position_.at(subset[k]) = static_cast<std::int64_t>(k);
  }
}

std::size_t ConditionalOracle::Draw(Rng& rng) {
  for (std::uint64_t t = 0; t < max_draws_; ++t) {
    const auto pos = position_[base_.NextSample(rng)];
    if (pos >= 0) return static_cast<std::size_t>(pos);
  }
  throw BudgetExceeded("rejection sampler exceeded " +
                       std::to_string(max_draws_) + " draws");
}

CountVector PoissonizedCounts(SampleOracle& oracle, double m, Rng& rng) {
  CountVector out(oracle.domain_size());
  const std::int64_t draws = rng.Poisson(m);
  for (std::int64_t t = 0; t < draws; ++t) out.Add(oracle.NextSample(rng));
  return out;
}

}  // namespace disttest
