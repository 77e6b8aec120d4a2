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

// Sample access to unknown distributions. Testers only ever see a
// SampleOracle; derived oracles (splits, conditionals, swaps) draw from a
// base oracle, whose counter is the one reported as samples used.

#ifndef DISTTEST_ORACLE_H_
#define DISTTEST_ORACLE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "disttest/distribution.h"
#include "disttest/rng.h"

namespace disttest {

// Raised by a replay oracle when a tester asks for more samples than the
// file holds.
class InsufficientSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a rejection sampler exceeds its draw cap.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SampleOracle {
 public:
  virtual ~SampleOracle() = default;

  // Returns a 0-based bin index in [0, domain_size()).
  std::size_t NextSample(Rng& rng) {
    ++drawn_;
    return Draw(rng);
  }
  std::uint64_t samples_drawn() const { return drawn_; }
  virtual std::size_t domain_size() const = 0;

 protected:
  virtual std::size_t Draw(Rng& rng) = 0;

 private:
  std::uint64_t drawn_ = 0;
};

// i.i.d. draws from an explicit distribution via an alias table.
class ExplicitOracle final : public SampleOracle {
 public:
  explicit ExplicitOracle(const ExplicitDistribution& dist)
      : table_(dist.probs()) {}
  std::size_t domain_size() const override { return table_.size(); }

 protected:
  std::size_t Draw(Rng& rng) override { return table_.Sample(rng); }

 private:
  AliasTable table_;
};

// Serves a fixed sequence of pre-recorded samples in order.
class ReplayOracle final : public SampleOracle {
 public:
  ReplayOracle(std::vector<std::size_t> samples, std::size_t domain);
  std::size_t domain_size() const override { return domain_; }
  std::size_t remaining() const { return samples_.size() - next_; }

 protected:
  std::size_t Draw(Rng& rng) override;

 private:
  std::vector<std::size_t> samples_;
  std::size_t domain_;
  std::size_t next_ = 0;
};

// An oracle defined by a draw function, typically closing over base
// oracles.
class FunctionOracle final : public SampleOracle {
 public:
  using DrawFn = std::function<std::size_t(Rng&)>;
  FunctionOracle(std::size_t domain, DrawFn fn)
      : domain_(domain), fn_(std::move(fn)) {}
  std::size_t domain_size() const override { return domain_; }

 protected:
  std::size_t Draw(Rng& rng) override { return fn_(rng); }

 private:
  std::size_t domain_;
  DrawFn fn_;
};

// Rejection sampler for (p | S). Draws from base until a sample lands in
// the subset and returns its position within the subset. Throws
// BudgetExceeded after max_draws consecutive misses.
class ConditionalOracle final : public SampleOracle {
 public:
  ConditionalOracle(SampleOracle& base, const std::vector<std::size_t>& subset,
                    std::uint64_t max_draws);
  std::size_t domain_size() const override { return subset_size_; }

 protected:
  std::size_t Draw(Rng& rng) override;

 private:
  SampleOracle& base_;
  std::vector<std::int64_t> position_;  // -1 outside the subset
  std::size_t subset_size_;
  std::uint64_t max_draws_;
};

// Draws N ~ Poi(m) samples and bins them.
CountVector PoissonizedCounts(SampleOracle& oracle, double m, Rng& rng);

}  // namespace disttest

#endif  // DISTTEST_ORACLE_H_
