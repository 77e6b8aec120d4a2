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

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "disttest/l2_engine.h"
#include "disttest/split.h"
#include "disttest/testers.h"
#include "testers_internal.h"

namespace disttest {
namespace internal {

void ValidateEps(double eps, const char* who) {
  if (!(eps > 0.0 && eps <= 2.0)) {
    throw std::invalid_argument(std::string(who) + ": eps must be in (0, 2]");
  }
}

TestVerdict SplitCloseness(SampleOracle& p, SampleOracle& q, std::size_t n,
                           double eps, double k, double fail_prob,
                           const TesterConstants& c, Rng& rng) {
  if (p.domain_size() != n || q.domain_size() != n) {
    throw DimensionMismatch("closeness: oracle domain differs from n");
  }
  const SplitMap sm = SplitMap::FromSamples(q, k, rng);
  const auto p0 = p.samples_drawn();
  const auto q0 = q.samples_drawn();
  SplitOracle ps(p, sm);
  SplitOracle qs(q, sm);
  const double b = 2.0 / std::sqrt(k);
  const TestVerdict inner =
      L2ClosenessTestMin(ps, qs, sm.n_split(), c.L2Config(eps, b, fail_prob), rng);

  TestVerdict v;
  v.answer = inner.answer;
  v.AddStage("split")
      .Set("k", k)
      .Set("n_split", static_cast<double>(sm.n_split()))
      .Set("multiset_size", static_cast<double>(sm.multiset_size()))
      .Set("stage_draws_p", static_cast<double>(p.samples_drawn() - p0))
      .Set("stage_draws_q", static_cast<double>(q.samples_drawn() - q0));
  v.AppendTrace(inner, "");
  return v;
}

TestVerdict ClosenessWithFailure(SampleOracle& p, SampleOracle& q,
                                 std::size_t n, double eps, double fail_prob,
                                 const TesterConstants& c, Rng& rng) {
  ValidateEps(eps, "closeness_equal");
  SampleMeter meter;
  meter.Track("p", p);
  meter.Track("q", q);
  const auto k = static_cast<double>(ClosenessSplitSize(n, eps));
  TestVerdict v = SplitCloseness(p, q, n, eps, k, fail_prob, c, rng);
  meter.Fill(v);
  return v;
}

}  // namespace internal

TestVerdict IdentityKnown(const ExplicitDistribution& q, SampleOracle& p,
                          double eps, Rng& rng, const TesterConstants& c) {
  internal::ValidateEps(eps, "identity_known");
  if (p.domain_size() != q.size()) {
    throw DimensionMismatch("identity_known: oracle domain differs from q");
  }
  internal::SampleMeter meter;
  meter.Track("p", p);
  const SplitMap sm = SplitMap::FromKnown(q);
  const std::size_t n_split = sm.n_split();
  ExplicitOracle qs(SplitExplicit(q, sm));
  SplitOracle ps(p, sm);
  const double b = 2.0 / std::sqrt(static_cast<double>(n_split));
  const TestVerdict inner =
      L2ClosenessTestMin(ps, qs, n_split, c.L2Config(eps, b), rng);

  TestVerdict v;
  v.answer = inner.answer;
  v.AddStage("split")
      .Set("n", static_cast<double>(q.size()))
      .Set("n_split", static_cast<double>(n_split))
      .Set("b", b);
  v.AppendTrace(inner, "");
  meter.Fill(v);
  return v;
}

std::size_t ClosenessSplitSize(std::size_t n, double eps) {
  const double nd = static_cast<double>(n);
  const double k = std::ceil(std::pow(nd, 2.0 / 3.0) * std::pow(eps, -4.0 / 3.0));
  return static_cast<std::size_t>(std::min(nd, k));
}

TestVerdict ClosenessEqual(SampleOracle& p, SampleOracle& q, std::size_t n,
                           double eps, Rng& rng, const TesterConstants& c) {
  return internal::ClosenessWithFailure(p, q, n, eps, 1.0 / 3.0, c, rng);
}

TestVerdict ClosenessUnequal(SampleOracle& q, SampleOracle& p, std::size_t n,
                             double eps, double m1, Rng& rng,
                             const TesterConstants& c) {
  internal::ValidateEps(eps, "closeness_unequal");
  if (!(m1 >= 1.0)) throw std::invalid_argument("closeness_unequal: m1 < 1");
  internal::SampleMeter meter;
  meter.Track("p", p);
  meter.Track("q", q);
  const double k = std::min(static_cast<double>(n), m1);
  TestVerdict v = internal::SplitCloseness(p, q, n, eps, k, 1.0 / 3.0, c, rng);
  const auto* split = v.FindStage("split");
  v.AddStage("unequal")
      .Set("m1", m1)
      .Set("k", k)
      .Set("m2_p", split->Get("stage_draws_p"))
      .Set("m2_q", split->Get("stage_draws_q"));
  meter.Fill(v);
  return v;
}

}  // namespace disttest
