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

#ifndef DISTTEST_RNG_H_
#define DISTTEST_RNG_H_

#include <cstdint>
#include <random>

namespace disttest {

// SplitMix64 finalizer. Used to derive independent child seeds.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded random source. Every operation that needs randomness takes an
// Rng& explicitly; a whole run is replayable from the 64-bit master seed.
//
// Child streams are derived with Split(stream_id), which hashes the
// parent seed with the id and does not advance the parent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(Mix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  Rng Split(std::uint64_t stream_id) const {
    return Rng(Mix64(seed_ ^ Mix64(stream_id + 0x632be59bd9b4e019ULL)));
  }

  std::uint64_t NextU64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1].
  double UniformPositive() {
    return static_cast<double>((NextU64() >> 11) + 1) * 0x1.0p-53;
  }

  // Unbiased integer in [0, bound). bound must be positive.
  std::uint64_t UniformInt(std::uint64_t bound);

  bool Bernoulli(double p) { return Uniform() < p; }

  // Exact Poisson variate. Inversion for mean < 30, Hormann's transformed
  // rejection (PTRS) above that.
  std::int64_t Poisson(double mean);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace disttest

#endif  // DISTTEST_RNG_H_
