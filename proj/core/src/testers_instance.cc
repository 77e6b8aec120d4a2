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

// Testers whose work depends on the shape of q: bucketed identity testing,
// adaptive closeness and Hellinger closeness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "disttest/l2_engine.h"
#include "disttest/testers.h"
#include "testers_internal.h"

namespace disttest {
namespace {

constexpr double kRejectionCap = 1e6;

std::uint64_t RejectionCap(double mass) {
  const double cap = std::ceil(kRejectionCap / std::max(mass, 1e-300));
  return cap >= 1.8e19 ? std::numeric_limits<std::uint64_t>::max()
                       : static_cast<std::uint64_t>(cap);
}

// Categories from bin counts: bins with at most `light_threshold` hits form
// the light category, the rest go to floor(log2(count)). Dense ids, light
// first when present.
struct Categories {
  static constexpr int kLight = -1;
  std::vector<int> label;                     // per category id
  std::vector<std::vector<std::size_t>> bins;  // per category id
  std::vector<std::size_t> of_bin;
  std::vector<double> hit_fraction;            // stage-1 share per category

  std::size_t size() const { return label.size(); }
};

Categories Categorize(const std::vector<std::int64_t>& counts, double light_threshold) {
  std::map<int, std::vector<std::size_t>> by_label;
  std::map<int, std::int64_t> hits;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto a = counts[i];
    const int lab = static_cast<double>(a) <= light_threshold
                        ? Categories::kLight
                        : static_cast<int>(std::floor(std::log2(static_cast<double>(a))));
    by_label[lab].push_back(i);
    hits[lab] += a;
    total += a;
  }
  Categories cat;
  cat.of_bin.assign(counts.size(), 0);
  for (auto& [lab, bins] : by_label) {
    const std::size_t id = cat.label.size();
    for (auto b : bins) cat.of_bin[b] = id;
    cat.label.push_back(lab);
    cat.hit_fraction.push_back(total > 0 ? static_cast<double>(hits[lab]) / total : 0.0);
    cat.bins.push_back(std::move(bins));
  }
  return cat;
}

// View of a base oracle that stops once the draws shared by all views of
// one round would pass the round's allowance.
class AllowanceOracle final : public SampleOracle {
 public:
  AllowanceOracle(SampleOracle& base, std::uint64_t& spent, std::uint64_t limit)
      : base_(base), spent_(spent), limit_(limit) {}
  std::size_t domain_size() const override { return base_.domain_size(); }

 protected:
  std::size_t Draw(Rng& rng) override {
    if (++spent_ > limit_) throw BudgetExceeded("round allowance exhausted");
    return base_.NextSample(rng);
  }

 private:
  SampleOracle& base_;
  std::uint64_t& spent_;
  std::uint64_t limit_;
};

// Draws from `o` until `hits` of them land in `member`, or `max_draws`
// draws were made. Returns the hit fraction and the draw count.
std::pair<double, std::uint64_t> HitRate(SampleOracle& o,
                                         const std::vector<char>& member,
                                         std::uint64_t hits,
                                         std::uint64_t max_draws, Rng& rng) {
  std::uint64_t h = 0, d = 0;
  while (h < hits && d < max_draws) {
    ++d;
    if (member[o.NextSample(rng)]) ++h;
  }
  return {d > 0 ? static_cast<double>(h) / static_cast<double>(d) : 0.0, d};
}

std::vector<char> Membership(std::size_t n, const std::vector<std::size_t>& bins) {
  std::vector<char> m(n, 0);
  for (auto b : bins) m[b] = 1;
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bucketed identity testing.

int BucketIndex::LevelOf(double qi, int k_max) {
  if (!(qi > 0.0)) return kInfinity;
  int e = 0;
  const double f = std::frexp(qi, &e);  // qi = f 2^e, f in [1/2, 1)
  const int j = f == 0.5 ? 1 - e : -e;
  return j > k_max ? kInfinity : j;
}

BucketIndex::BucketIndex(const ExplicitDistribution& q, double eps) {
  internal::ValidateEps(eps, "bucket index");
  k_max_ = static_cast<int>(
      std::ceil(2.0 * std::log2(10.0 * static_cast<double>(q.size()) / eps)));
  level_.resize(q.size());
  by_level_.resize(static_cast<std::size_t>(k_max_) + 2);
  for (std::size_t i = 0; i < q.size(); ++i) {
    level_[i] = LevelOf(q[i], k_max_);
    const auto slot = level_[i] == kInfinity ? static_cast<std::size_t>(k_max_) + 1
                                             : static_cast<std::size_t>(level_[i]);
    by_level_[slot].push_back(i);
  }
}

const std::vector<std::size_t>& BucketIndex::bins(int level) const {
  if (level == kInfinity) return by_level_.back();
  if (level < 0 || level > k_max_) throw std::out_of_range("BucketIndex::bins");
  return by_level_[static_cast<std::size_t>(level)];
}

std::vector<int> BucketIndex::NonemptyLevels() const {
  std::vector<int> out;
  for (int j = 0; j <= k_max_; ++j) {
    if (!by_level_[static_cast<std::size_t>(j)].empty()) out.push_back(j);
  }
  if (!by_level_.back().empty()) out.push_back(kInfinity);
  return out;
}

TestVerdict IdentityInstanceOptimal(const ExplicitDistribution& q,
                                    SampleOracle& p, double eps, Rng& rng,
                                    const TesterConstants& c) {
  internal::ValidateEps(eps, "identity_instance_optimal");
  if (p.domain_size() != q.size()) {
    throw DimensionMismatch("identity_instance_optimal: oracle domain differs from q");
  }
  internal::SampleMeter meter;
  meter.Track("p", p);
  const double n = static_cast<double>(q.size());
  const BucketIndex idx(q, eps);
  const std::vector<int> levels = idx.NonemptyLevels();
  const double num_levels = static_cast<double>(levels.size());
  const double log_factor = std::max(1.0, std::log2(n / eps));
  const double polylog = std::pow(log_factor, c.polylog_exponent);
  const double level_fail = std::min(1.0 / 3.0 - 1e-12, 1.0 / polylog);
  // Some level carries l1 discrepancy > eta when ||p - q||_1 > eps.
  const double eta = eps / num_levels;
  const double additive = eta / 6.0;

  TestVerdict v;
  v.answer = Answer::kYes;
  v.AddStage("buckets")
      .Set("k_max", idx.k_max())
      .Set("levels", num_levels)
      .Set("eta", eta)
      .Set("polylog", polylog)
      .Set("level_fail", level_fail);

  std::vector<double> qmass(levels.size(), 0.0);
  std::vector<int> slot_of_bin(q.size(), 0);
  for (std::size_t s = 0; s < levels.size(); ++s) {
    for (auto b : idx.bins(levels[s])) {
      qmass[s] += q[b];
      slot_of_bin[b] = static_cast<int>(s);
    }
  }

  // Mass check: estimate every p(S_j) from one batch of draws.
  if (levels.size() >= 2) {
    const auto draws = static_cast<std::int64_t>(std::ceil(
        c.c_mass * std::log(6.0 * num_levels) / (2.0 * additive * additive)));
    std::vector<std::int64_t> hits(levels.size(), 0);
    for (std::int64_t t = 0; t < draws; ++t) ++hits[slot_of_bin[p.NextSample(rng)]];
    double max_dev = 0.0;
    for (std::size_t s = 0; s < levels.size(); ++s) {
      const double est = static_cast<double>(hits[s]) / static_cast<double>(draws);
      max_dev = std::max(max_dev, std::abs(est - qmass[s]));
    }
    const Answer a = max_dev <= 2.0 * additive ? Answer::kYes : Answer::kNo;
    v.AddStage("mass_check")
        .Set("draws", static_cast<double>(draws))
        .Set("window", 2.0 * additive)
        .Set("max_dev", max_dev)
        .verdict = a;
    if (a == Answer::kNo) {
      v.answer = Answer::kNo;
      meter.Fill(v);
      return v;
    }
  }

  // Conditional l2 tests on levels that can carry the discrepancy.
  for (std::size_t s = 0; s < levels.size(); ++s) {
    const auto& bins = idx.bins(levels[s]);
    if (bins.size() < 2 || qmass[s] <= eta / 4.0) continue;
    const double radius = std::min(2.0, eta / (2.0 * qmass[s]));
    ConditionalOracle pc(p, bins, RejectionCap(qmass[s]));
    ExplicitOracle qc(Condition(q, bins));
    const double m = static_cast<double>(bins.size());
    const TestVerdict inner = L2ClosenessTestMin(
        pc, qc, bins.size(), c.L2Config(radius, 2.0 / std::sqrt(m), level_fail), rng);
    const std::string name = "level_" + std::to_string(levels[s]);
    v.AddStage(name)
        .Set("bins", m)
        .Set("q_mass", qmass[s])
        .Set("radius", radius)
        .verdict = inner.answer;
    v.AppendTrace(inner, name + "/");
    if (!inner.yes()) {
      v.answer = Answer::kNo;
      break;
    }
  }
  meter.Fill(v);
  return v;
}

// ---------------------------------------------------------------------------
// Adaptive closeness.

SmallMassProfile QSmallMassProfile(const ExplicitDistribution& q, double m) {
  if (!(m > 0.0)) throw std::invalid_argument("small mass profile: m <= 0");
  const double x = 1.0 / m;
  SmallMassProfile out;
  double sq = 0.0;
  for (double qi : q.probs()) {
    if (qi < x && qi > 0.0) {
      ++out.count;
      sq += qi * qi;
    }
  }
  out.l2norm = std::sqrt(sq);
  return out;
}

namespace {

// One pass of the fixed-m algorithm. `reserve(d)` throws BudgetExceeded
// when d more draws would not fit the round's allowance.
Answer AdaptiveRound(SampleOracle& p, SampleOracle& q, std::size_t n,
                     double eps, double m, const TesterConstants& c,
                     const std::function<void(double)>& reserve, Rng& rng,
                     TestVerdict& v, const std::string& prefix) {
  const double ln_n = std::log(std::max(2.0, static_cast<double>(n)));
  const double C = c.c_adaptive_eps;

  // Stage 1: categories from C m ln^2 n draws of q.
  const double s1 = std::ceil(c.c_adaptive * m * ln_n * ln_n);
  reserve(s1);
  std::vector<std::int64_t> counts(n, 0);
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(s1); ++t) ++counts[q.NextSample(rng)];
  const Categories cat = Categorize(counts, ln_n);
  const double B = static_cast<double>(cat.size());
  v.AddStage(prefix + "categories").Set("stage1_draws", s1).Set("B", B);

  // Category marginals.
  if (cat.size() >= 2) {
    FunctionOracle ps(cat.size(), [&](Rng& r) { return cat.of_bin[p.NextSample(r)]; });
    FunctionOracle qs(cat.size(), [&](Rng& r) { return cat.of_bin[q.NextSample(r)]; });
    const TestVerdict t =
        internal::ClosenessWithFailure(ps, qs, cat.size(), eps / C, 0.1, c, rng);
    v.AddStage(prefix + "category_l1").Set("radius", eps / C).verdict = t.answer;
    if (!t.yes()) return Answer::kNo;
  }

  // Light category mass to additive eps / C.
  bool skip_light = false;
  if (cat.label.front() == Categories::kLight) {
    const double draws = std::ceil(std::log(20.0) / (2.0 * (eps / C) * (eps / C)));
    reserve(draws);
    const auto member = Membership(n, cat.bins.front());
    const auto [est, used] =
        HitRate(q, member, std::numeric_limits<std::uint64_t>::max(),
                static_cast<std::uint64_t>(draws), rng);
    skip_light = est < 2.0 * eps / C;
    v.AddStage(prefix + "light_mass").Set("estimate", est).Set("ignored", skip_light);
  }

  const auto hits = static_cast<std::uint64_t>(std::ceil(12.0 * std::log(200.0 * B)));
  const double sub_fail = 1.0 / (100.0 * B);
  for (std::size_t a = 0; a < cat.size(); ++a) {
    if (a == 0 && skip_light) continue;
    const auto& bins = cat.bins[a];
    const auto member = Membership(n, bins);
    const std::string name = prefix + "cat_" +
                             (cat.label[a] == Categories::kLight
                                  ? std::string("light")
                                  : std::to_string(cat.label[a]));
    // (a) q(S_a) to a factor 2, (b) p(S_a) against it.
    const auto [qhat, qd] =
        HitRate(q, member, hits, std::numeric_limits<std::uint64_t>::max(), rng);
    const auto p_cap = static_cast<std::uint64_t>(std::ceil(8.0 * hits / qhat));
    const auto [phat, pd] = HitRate(p, member, hits, p_cap, rng);
    auto& st = v.AddStage(name);
    st.Set("bins", static_cast<double>(bins.size())).Set("q_mass", qhat).Set("p_mass", phat);
    if (phat > 4.0 * qhat || phat < qhat / 4.0) {
      st.verdict = Answer::kNo;
      return Answer::kNo;
    }
    if (bins.size() < 2) continue;
    // (c)-(e): norm estimates and the conditional l2 test.
    const double radius = std::min(2.0, eps / (C * B * qhat));
    ConditionalOracle pc(p, bins, RejectionCap(qhat));
    ConditionalOracle qc(q, bins, RejectionCap(qhat));
    L2TestConfig cfg = c.L2Config(radius, 1.0, sub_fail);
    cfg.on_plan = [&](double mm, int reps) {
      reserve(2.0 * mm * ((reps + 1) / 2) / qhat);
    };
    const TestVerdict t = L2ClosenessTestMin(pc, qc, bins.size(), cfg, rng);
    v.trace.back().Set("radius", radius).verdict = t.answer;
    v.AppendTrace(t, name + "/");
    if (!t.yes()) return Answer::kNo;
  }
  return Answer::kYes;
}

}  // namespace

TestVerdict ClosenessAdaptive(SampleOracle& p, SampleOracle& q, std::size_t n,
                              double eps, Rng& rng, const TesterConstants& c) {
  internal::ValidateEps(eps, "closeness_adaptive");
  if (p.domain_size() != n || q.domain_size() != n) {
    throw DimensionMismatch("closeness_adaptive: oracle domain differs from n");
  }
  internal::SampleMeter meter;
  meter.Track("p", p);
  meter.Track("q", q);
  const double nd = static_cast<double>(n);
  const double log_ne = std::log(std::max(2.0, nd / eps));
  const double m_max = std::max(1.0, nd / (eps * eps));

  TestVerdict v;
  for (double m = 1.0;; m *= 2.0) {
    const bool last = m >= m_max;
    const double allowance = c.c_allow * m * log_ne * log_ne * log_ne;
    const std::uint64_t limit = last ? std::numeric_limits<std::uint64_t>::max()
                                     : static_cast<std::uint64_t>(std::ceil(allowance));
    std::uint64_t spent = 0;
    AllowanceOracle pa(p, spent, limit);
    AllowanceOracle qa(q, spent, limit);
    const auto reserve = [&](double d) {
      if (static_cast<double>(spent) + d > static_cast<double>(limit)) {
        throw BudgetExceeded("round allowance would be exceeded");
      }
    };
    const std::string prefix = "m" + std::to_string(static_cast<std::uint64_t>(m)) + "/";
    const std::size_t mark = v.trace.size();
    try {
      const Answer a = AdaptiveRound(pa, qa, n, eps, m, c, reserve, rng, v, prefix);
      v.AddStage("round")
          .Set("m", m)
          .Set("allowance", last ? -1.0 : allowance)
          .Set("draws", static_cast<double>(spent))
          .Set("completed", 1)
          .verdict = a;
      v.answer = a;
      break;
    } catch (const BudgetExceeded&) {
      if (last) throw;
      v.trace.resize(mark);
      v.AddStage("round")
          .Set("m", m)
          .Set("allowance", allowance)
          .Set("draws", static_cast<double>(spent))
          .Set("completed", 0);
    }
  }
  meter.Fill(v);
  return v;
}

// ---------------------------------------------------------------------------
// Hellinger closeness.

bool HellingerUsesCategorized(std::size_t n, double eps) {
  const double nd = static_cast<double>(n);
  return std::pow(nd, 2.0 / 3.0) * std::pow(eps, -4.0 / 3.0) >
         std::pow(nd, 0.75) / eps;
}

namespace {

// Padding labels beyond the category live in a sparse map keyed by label.
struct PaddedCounts {
  std::vector<std::int64_t> in;
  std::unordered_map<std::uint64_t, std::int64_t> pad;
};

PaddedCounts DrawPadded(SampleOracle& o, const std::vector<std::int64_t>& pos,
                        std::size_t s, std::uint64_t pad_bins, double m, Rng& rng) {
  PaddedCounts out{std::vector<std::int64_t>(s, 0), {}};
  const std::int64_t draws = rng.Poisson(m);
  for (std::int64_t t = 0; t < draws; ++t) {
    const auto k = pos[o.NextSample(rng)];
    if (k >= 0) {
      ++out.in[static_cast<std::size_t>(k)];
    } else {
      ++out.pad[rng.UniformInt(pad_bins)];
    }
  }
  return out;
}

std::int64_t PaddedStatistic(const PaddedCounts& x, const PaddedCounts& y) {
  std::int64_t z = 0;
  for (std::size_t i = 0; i < x.in.size(); ++i) {
    const std::int64_t d = x.in[i] - y.in[i];
    z += d * d - x.in[i] - y.in[i];
  }
  for (const auto& [key, cx] : x.pad) {
    const auto it = y.pad.find(key);
    const std::int64_t cy = it == y.pad.end() ? 0 : it->second;
    z += (cx - cy) * (cx - cy) - cx - cy;
  }
  for (const auto& [key, cy] : y.pad) {
    if (!x.pad.count(key)) z += cy * cy - cy;
  }
  return z;
}

TestVerdict HellingerCategorized(SampleOracle& p, SampleOracle& q,
                                 std::size_t n, double eps,
                                 const TesterConstants& c, Rng& rng) {
  const double nd = static_cast<double>(n);
  const double m = std::max(2.0, std::pow(nd, 0.75) / eps);
  const double ln_m = std::log(m);
  const double s1 = std::ceil(m * ln_m);
  std::vector<std::int64_t> counts(n, 0);
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(s1); ++t) ++counts[q.NextSample(rng)];
  const Categories cat = Categorize(counts, ln_m);
  const double B = static_cast<double>(cat.size());
  const double sub_fail = 1.0 / (10.0 * (B + 1.0));
  const double share = eps / (c.c_hellinger * ln_m);
  const auto pad_bins = static_cast<std::uint64_t>(std::ceil(1e4 * nd));

  TestVerdict v;
  v.answer = Answer::kYes;
  v.AddStage("categories")
      .Set("m", m)
      .Set("stage1_draws", s1)
      .Set("B", B)
      .Set("share", share);

  if (cat.size() >= 2) {
    FunctionOracle ps(cat.size(), [&](Rng& r) { return cat.of_bin[p.NextSample(r)]; });
    FunctionOracle qs(cat.size(), [&](Rng& r) { return cat.of_bin[q.NextSample(r)]; });
    const TestVerdict t = internal::ClosenessWithFailure(
        ps, qs, cat.size(), eps / c.c_hell_cat, sub_fail, c, rng);
    v.AddStage("category_l1").Set("radius", eps / c.c_hell_cat).verdict = t.answer;
    if (!t.yes()) {
      v.answer = Answer::kNo;
      return v;
    }
  }

  for (std::size_t a = 0; a < cat.size(); ++a) {
    const auto& bins = cat.bins[a];
    if (cat.label[a] == Categories::kLight) {
      // l1 closeness of the conditionals, using ||.||_1 >= H^2.
      const double mass = cat.hit_fraction[a];
      const double radius = mass > 0.0 ? share / mass : 3.0;
      auto& st = v.AddStage("cat_light");
      st.Set("bins", static_cast<double>(bins.size())).Set("q_mass", mass).Set("radius", radius);
      if (bins.size() < 2 || radius > 2.0) continue;
      ConditionalOracle pc(p, bins, RejectionCap(mass));
      ConditionalOracle qc(q, bins, RejectionCap(mass));
      const TestVerdict t =
          internal::ClosenessWithFailure(pc, qc, bins.size(), radius, sub_fail, c, rng);
      v.trace.back().verdict = t.answer;
      if (!t.yes()) {
        v.answer = Answer::kNo;
        return v;
      }
      continue;
    }
    // Heavy category: every q_i here is at least x, so H^2 on the
    // category is at most ||p[S] - q[S]||_2^2 / (2x).
    const double x = std::ldexp(1.0, cat.label[a]) / (2.0 * s1);
    const double radius = std::sqrt(2.0 * x * share);
    double norm_sq = 0.0;
    std::vector<std::int64_t> pos(n, -1);
    for (std::size_t k = 0; k < bins.size(); ++k) {
      pos[bins[k]] = static_cast<std::int64_t>(k);
      const double qi = static_cast<double>(counts[bins[k]]) / s1;
      norm_sq += qi * qi;
    }
    const double b = 2.0 * std::sqrt(norm_sq);
    const double draws = c.EffectiveCSample() * b / (radius * radius);
    const double threshold = c.c_thresh * 0.625 * draws * draws * radius * radius;
    int yes = 0;
    const int reps = AmplificationRepetitions(sub_fail);
    const Answer ans = MajorityVote(
        reps,
        [&] {
          const auto xs = DrawPadded(p, pos, bins.size(), pad_bins, draws, rng);
          const auto ys = DrawPadded(q, pos, bins.size(), pad_bins, draws, rng);
          return static_cast<double>(PaddedStatistic(xs, ys)) <= threshold ? Answer::kYes
                                                                           : Answer::kNo;
        },
        &yes);
    v.AddStage("cat_" + std::to_string(cat.label[a]))
        .Set("bins", static_cast<double>(bins.size()))
        .Set("x", x)
        .Set("radius", radius)
        .Set("m", draws)
        .Set("threshold", threshold)
        .Set("yes_votes", yes)
        .verdict = ans;
    if (ans == Answer::kNo) {
      v.answer = Answer::kNo;
      return v;
    }
  }
  return v;
}

}  // namespace

TestVerdict HellingerCloseness(SampleOracle& p, SampleOracle& q, std::size_t n,
                               double eps, Rng& rng, const TesterConstants& c,
                               HellingerBranch branch) {
  internal::ValidateEps(eps, "hellinger_closeness");
  if (p.domain_size() != n || q.domain_size() != n) {
    throw DimensionMismatch("hellinger_closeness: oracle domain differs from n");
  }
  const bool categorized =
      branch == HellingerBranch::kCategorized ||
      (branch == HellingerBranch::kAuto && HellingerUsesCategorized(n, eps));
  internal::SampleMeter meter;
  meter.Track("p", p);
  meter.Track("q", q);
  TestVerdict v;
  v.AddStage("branch").Set("categorized", categorized ? 1.0 : 0.0);
  const TestVerdict inner = categorized
                                ? HellingerCategorized(p, q, n, eps, c, rng)
                                : internal::ClosenessWithFailure(p, q, n, eps,
                                                                 1.0 / 3.0, c, rng);
  v.answer = inner.answer;
  v.AppendTrace(inner, "");
  meter.Fill(v);
  return v;
}

}  // namespace disttest
