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
#include <stdexcept>
#include <vector>

namespace disttest {

void L2TestConfig::Validate() const {
  if (!(epsilon > 0.0 && epsilon <= 2.0)) {
    throw std::invalid_argument("l2 test: epsilon must be in (0, 2]");
  }
  if (!(b > 0.0)) throw std::invalid_argument("l2 test: b must be > 0");
  if (!(fail_prob > 0.0 && fail_prob < 0.5)) {
    throw std::invalid_argument("l2 test: fail_prob must be in (0, 1/2)");
  }
  if (!(c_sample > 0.0) || !(c_thresh > 0.0) || !(c_norm > 0.0)) {
    throw std::invalid_argument("l2 test: constants must be > 0");
  }
}

L2Statistic ComputeL2Statistic(const CountVector& x, const CountVector& y,
                               double m) {
  if (x.size() != y.size()) throw DimensionMismatch("l2 statistic: sizes differ");
  std::int64_t z = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::int64_t d = x.counts[i] - y.counts[i];
    z += d * d - x.counts[i] - y.counts[i];
  }
  return L2Statistic{z, m, x.size()};
}

double CollisionStatistic(const CountVector& x, double m) {
  double s = 0.0;
  for (auto c : x.counts) s += static_cast<double>(c) * static_cast<double>(c - 1);
  return s / (m * m);
}

int AmplificationRepetitions(double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("amplification: delta <= 0");
  if (delta >= 1.0 / 3.0) return 1;
  int reps = static_cast<int>(std::ceil(18.0 * std::log(1.0 / delta)));
  if (reps % 2 == 0) ++reps;
  return reps;
}

Answer MajorityVote(int reps, const std::function<Answer()>& trial,
                    int* yes_votes) {
  int yes = 0;
  for (int r = 0; r < reps; ++r) {
    if (trial() == Answer::kYes) ++yes;
    // Stop once the outcome is decided.
    if (2 * yes > reps || 2 * (r + 1 - yes) >= reps) break;
  }
  if (yes_votes != nullptr) *yes_votes = yes;
  return 2 * yes > reps ? Answer::kYes : Answer::kNo;
}

namespace {

TestVerdict SingleL2Test(SampleOracle& p, SampleOracle& q, std::size_t n,
                         const L2TestConfig& cfg, Rng& rng) {
  const double nd = static_cast<double>(n);
  const double eps2 = cfg.epsilon * cfg.epsilon;
  const double m = cfg.c_sample * cfg.b * nd / eps2;
  const auto p0 = p.samples_drawn();
  const auto q0 = q.samples_drawn();
  const CountVector x = PoissonizedCounts(p, m, rng);
  const CountVector y = PoissonizedCounts(q, m, rng);
  const L2Statistic stat = ComputeL2Statistic(x, y, m);
  const double threshold = cfg.c_thresh * 0.625 * m * m * eps2 / nd;

  TestVerdict v;
  v.answer = static_cast<double>(stat.z) <= threshold ? Answer::kYes : Answer::kNo;
  v.samples_used = {{"p", p.samples_drawn() - p0}, {"q", q.samples_drawn() - q0}};
  v.AddStage("l2")
      .Set("m", m)
      .Set("b", cfg.b)
      .Set("n", nd)
      .Set("z", static_cast<double>(stat.z))
      .Set("threshold", threshold)
      .verdict = v.answer;
  return v;
}

}  // namespace

TestVerdict L2ClosenessTest(SampleOracle& p, SampleOracle& q, std::size_t n,
                            const L2TestConfig& cfg, Rng& rng) {
  cfg.Validate();
  if (p.domain_size() != n || q.domain_size() != n) {
    throw DimensionMismatch("l2 test: oracle domain differs from n");
  }
  const int reps = AmplificationRepetitions(cfg.fail_prob);
  if (cfg.on_plan) {
    cfg.on_plan(cfg.c_sample * cfg.b * static_cast<double>(n) /
                    (cfg.epsilon * cfg.epsilon),
                reps);
  }
  if (reps == 1) return SingleL2Test(p, q, n, cfg, rng);

  const auto p0 = p.samples_drawn();
  const auto q0 = q.samples_drawn();
  TestVerdict first;
  bool have_first = false;
  int yes = 0;
  const Answer a = MajorityVote(
      reps,
      [&] {
        TestVerdict v = SingleL2Test(p, q, n, cfg, rng);
        if (!have_first) {
          first = v;
          have_first = true;
        }
        return v.answer;
      },
      &yes);
  TestVerdict out;
  out.answer = a;
  out.samples_used = {{"p", p.samples_drawn() - p0}, {"q", q.samples_drawn() - q0}};
  out.trace = first.trace;
  out.AddStage("l2_majority")
      .Set("repetitions", reps)
      .Set("yes_votes", yes)
      .verdict = a;
  return out;
}

double L2NormEstimate(SampleOracle& p, double fail_prob, Rng& rng,
                      double c_norm) {
  if (!(fail_prob > 0.0 && fail_prob < 1.0)) {
    throw std::invalid_argument("norm estimate: fail_prob must be in (0, 1)");
  }
  const double n = static_cast<double>(p.domain_size());
  const double m = c_norm * std::sqrt(n);
  const int reps = 2 * static_cast<int>(std::ceil(std::log(1.0 / fail_prob))) + 1;
  std::vector<double> est(static_cast<std::size_t>(reps));
  for (auto& e : est) e = CollisionStatistic(PoissonizedCounts(p, m, rng), m);
  std::nth_element(est.begin(), est.begin() + reps / 2, est.end());
  const double sq = std::max(est[static_cast<std::size_t>(reps / 2)], 1.0 / n);
  return std::sqrt(sq);
}

TestVerdict L2ClosenessTestMin(SampleOracle& p, SampleOracle& q, std::size_t n,
                               const L2TestConfig& cfg, Rng& rng) {
  cfg.Validate();
  if (p.domain_size() != n || q.domain_size() != n) {
    throw DimensionMismatch("l2 test: oracle domain differs from n");
  }
  const auto p0 = p.samples_drawn();
  const auto q0 = q.samples_drawn();
  const double est_fail = cfg.fail_prob / 4.0;
  const double np = L2NormEstimate(p, est_fail, rng, cfg.c_norm);
  const double nq = L2NormEstimate(q, est_fail, rng, cfg.c_norm);
  const double lo = std::min(np, nq);
  const double hi = std::max(np, nq);

  TestVerdict out;
  auto& norms = out.AddStage("norm_check");
  norms.Set("norm_p", np).Set("norm_q", nq).Set("b_given", cfg.b);
  if (hi > kNormMismatchFactor * lo) {
    norms.verdict = Answer::kNo;
    out.answer = Answer::kNo;
  } else {
    norms.verdict = Answer::kYes;
    L2TestConfig inner = cfg;
    inner.b = 4.0 * lo;
    TestVerdict v = L2ClosenessTest(p, q, n, inner, rng);
    out.answer = v.answer;
    out.AppendTrace(v, "");
  }
  out.samples_used = {{"p", p.samples_drawn() - p0}, {"q", q.samples_drawn() - q0}};
  return out;
}

}  // namespace disttest
