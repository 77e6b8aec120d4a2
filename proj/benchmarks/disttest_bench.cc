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

#include <benchmark/benchmark.h>

#include "disttest/distribution.h"
#include "disttest/hard_instances.h"
#include "disttest/harness.h"
#include "disttest/l2_engine.h"
#include "disttest/oracle.h"
#include "disttest/rng.h"
#include "disttest/split.h"
#include "disttest/testers.h"

namespace disttest {
namespace {

void BM_Poisson(benchmark::State& state) {
  Rng rng(1);
  const double mean = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rng.Poisson(mean));
}
BENCHMARK(BM_Poisson)->Arg(1)->Arg(20)->Arg(1000)->Arg(1000000);

void BM_AliasDraw(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng gen(2);
  const auto pair = PaninskiPair(n, 0.5, gen);
  ExplicitOracle oracle(pair.second);
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(oracle.NextSample(rng));
}
BENCHMARK(BM_AliasDraw)->Arg(100)->Arg(100000);

void BM_PoissonizedL2Statistic(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto u = ExplicitDistribution::Uniform(n);
  const double m = static_cast<double>(n);
  Rng rng(4);
  for (auto _ : state) {
    const auto z = ComputeL2Statistic(PoissonizedCounts(u, m, rng), PoissonizedCounts(u, m, rng));
    benchmark::DoNotOptimize(z.z);
  }
  state.SetItemsProcessed(state.iterations() * 2 * static_cast<std::int64_t>(m));
}
BENCHMARK(BM_PoissonizedL2Statistic)->Arg(1000)->Arg(100000);

void BM_SplitFromSamples(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto u = ExplicitDistribution::Uniform(n);
  ExplicitOracle oracle(u);
  Rng rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(SplitMap::FromSamples(oracle, static_cast<double>(n) / 2, rng));
  }
}
BENCHMARK(BM_SplitFromSamples)->Arg(1000)->Arg(100000);

void BM_IdentityKnown(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto u = ExplicitDistribution::Uniform(n);
  ExplicitOracle p(u);
  Rng rng(6);
  for (auto _ : state) benchmark::DoNotOptimize(IdentityKnown(u, p, 0.5, rng).answer);
}
BENCHMARK(BM_IdentityKnown)->Arg(100)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_ClosenessEqual(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto u = ExplicitDistribution::Uniform(n);
  ExplicitOracle p(u), q(u);
  Rng rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(ClosenessEqual(p, q, n, 0.5, rng).answer);
}
BENCHMARK(BM_ClosenessEqual)->Arg(100)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_Independence2D(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto u = ExplicitDistribution::Uniform(n * n);
  ExplicitOracle p(u);
  Rng rng(8);
  for (auto _ : state) benchmark::DoNotOptimize(Independence2D(p, n, n, 0.5, rng).answer);
}
BENCHMARK(BM_Independence2D)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_MiPerBin(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(MiPerBin(500, 100, 10, 0.2).value);
}
BENCHMARK(BM_MiPerBin);

void BM_MiHeavyLightRow(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(MiHeavyLightRow(16, 64, m, 0.2).value);
}
BENCHMARK(BM_MiHeavyLightRow)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_PowerSweepCell(benchmark::State& state) {
  ExperimentSpec spec;
  spec.tester = "closeness_equal";
  spec.family = "paninski";
  spec.n_values = {200};
  spec.eps_values = {0.5};
  spec.trials = 50;
  spec.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(RunPowerSweep(spec).front().mean_samples);
}
BENCHMARK(BM_PowerSweepCell)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace disttest

BENCHMARK_MAIN();
