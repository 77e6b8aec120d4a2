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

// Independence, collection and histogram testers.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "disttest/l2_engine.h"
#include "disttest/split.h"
#include "disttest/testers.h"
#include "testers_internal.h"

namespace disttest {
namespace internal {
namespace {

std::vector<std::size_t> Strides(const std::vector<std::size_t>& sizes) {
  std::vector<std::size_t> s(sizes.size(), 1);
  for (std::size_t t = sizes.size(); t-- > 1;) s[t - 1] = s[t] * sizes[t];
  return s;
}

std::size_t Product(const std::vector<std::size_t>& sizes) {
  return std::accumulate(sizes.begin(), sizes.end(), std::size_t{1},
                         std::multiplies<>());
}

}  // namespace

SplitMap GroupSplitFromSamples(SampleOracle& p,
                               const std::vector<std::size_t>& group_sizes,
                               std::size_t group, double k, Rng& rng) {
  const auto strides = Strides(group_sizes);
  CountVector counts(group_sizes[group]);
  const std::int64_t draws = rng.Poisson(k);
  for (std::int64_t t = 0; t < draws; ++t) {
    counts.Add((p.NextSample(rng) / strides[group]) % group_sizes[group]);
  }
  return SplitMap::FromCounts(counts);
}

TestVerdict ProductSplitTest(SampleOracle& p,
                             const std::vector<std::size_t>& group_sizes,
                             const std::vector<SplitMap>& splits, double eps,
                             double b, double fail_prob,
                             const TesterConstants& c, Rng& rng) {
  const std::size_t total = Product(group_sizes);
  if (p.domain_size() != total) {
    throw DimensionMismatch("product test: oracle domain differs from product");
  }
  const SplitMap sm = SplitMap::Product(splits);
  std::vector<std::size_t> draws(group_sizes.size());
  FunctionOracle shuffled(total, [&](Rng& r) {
    for (auto& x : draws) x = p.NextSample(r);
    return CoordinateShuffle(draws, group_sizes);
  });
  SplitOracle ps(p, sm);
  SplitOracle qs(shuffled, sm);
  const TestVerdict inner =
      L2ClosenessTestMin(ps, qs, sm.n_split(), c.L2Config(eps, b, fail_prob), rng);
  TestVerdict v;
  v.answer = inner.answer;
  auto& st = v.AddStage("product");
  for (std::size_t t = 0; t < group_sizes.size(); ++t) {
    st.Set("group" + std::to_string(t), static_cast<double>(group_sizes[t]));
    st.Set("multiset" + std::to_string(t), static_cast<double>(splits[t].multiset_size()));
  }
  st.Set("n_split", static_cast<double>(sm.n_split())).Set("b", b);
  v.AppendTrace(inner, "");
  return v;
}

}  // namespace internal

namespace {

double SplitSize2D(double n, double m, double eps) {
  return std::min(n, std::ceil(std::pow(n, 2.0 / 3.0) * std::cbrt(m) *
                               std::pow(eps, -4.0 / 3.0)));
}

void Validate2D(SampleOracle& p, std::size_t n, std::size_t m, const char* who) {
  if (n == 0 || m == 0) throw std::invalid_argument(std::string(who) + ": empty axis");
  if (p.domain_size() != n * m) {
    throw DimensionMismatch(std::string(who) + ": oracle domain differs from n*m");
  }
}

// Oracle on the row-major product of `groups`, where group g is the
// row-major product of the listed coordinates of `dims`.
class RegroupOracle final : public SampleOracle {
 public:
  RegroupOracle(SampleOracle& base, std::vector<std::size_t> dims,
                std::vector<std::vector<std::size_t>> groups)
      : base_(base), dims_(std::move(dims)), groups_(std::move(groups)) {
    strides_.assign(dims_.size(), 1);
    for (std::size_t t = dims_.size(); t-- > 1;) strides_[t - 1] = strides_[t] * dims_[t];
    domain_ = 1;
    for (const auto& g : groups_) {
      std::size_t s = 1;
      for (auto j : g) s *= dims_[j];
      sizes_.push_back(s);
      domain_ *= s;
    }
  }
  std::size_t domain_size() const override { return domain_; }
  const std::vector<std::size_t>& group_sizes() const { return sizes_; }

 protected:
  std::size_t Draw(Rng& rng) override {
    const std::size_t x = base_.NextSample(rng);
    std::size_t out = 0;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      std::size_t v = 0;
      for (auto j : groups_[g]) v = v * dims_[j] + (x / strides_[j]) % dims_[j];
      out = out * sizes_[g] + v;
    }
    return out;
  }

 private:
  SampleOracle& base_;
  std::vector<std::size_t> dims_;
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::size_t> strides_;
  std::vector<std::size_t> sizes_;
  std::size_t domain_ = 1;
};

std::vector<std::size_t> SubDims(const std::vector<std::size_t>& dims,
                                 const std::vector<std::size_t>& idx) {
  std::vector<std::size_t> out;
  for (auto j : idx) out.push_back(dims[j]);
  return out;
}

Answer IndependenceRec(SampleOracle& p, std::vector<std::size_t> dims,
                       double eps, const TesterConstants& c, Rng& rng,
                       TestVerdict& v, const std::string& prefix) {
  // Unit axes do not change the row-major index.
  dims.erase(std::remove(dims.begin(), dims.end(), std::size_t{1}), dims.end());
  if (dims.size() <= 1) {
    v.AddStage(prefix + "trivial").verdict = Answer::kYes;
    return Answer::kYes;
  }
  if (dims.size() == 2) {
    TestVerdict t;
    if (dims[0] >= dims[1]) {
      t = Independence2D(p, dims[0], dims[1], eps, rng, c);
    } else {
      RegroupOracle swapped(p, dims, {{1}, {0}});
      t = Independence2D(swapped, dims[1], dims[0], eps, rng, c);
    }
    v.AppendTrace(t, prefix);
    return t.answer;
  }

  const double total = static_cast<double>(
      std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>()));
  const auto jmax = static_cast<std::size_t>(
      std::max_element(dims.begin(), dims.end()) - dims.begin());
  const double t1 = std::sqrt(total) / (eps * eps);
  const double t2 = std::cbrt(static_cast<double>(dims[jmax])) * std::cbrt(total) *
                    std::pow(eps, -4.0 / 3.0);

  if (t2 >= t1) {
    // Coordinate jmax against the rest, then the rest on its own.
    std::vector<std::size_t> rest;
    for (std::size_t j = 0; j < dims.size(); ++j) {
      if (j != jmax) rest.push_back(j);
    }
    const std::size_t nj = dims[jmax];
    const std::size_t nr = static_cast<std::size_t>(total) / nj;
    const bool j_first = nj >= nr;
    RegroupOracle pair(p, dims,
                       j_first ? std::vector<std::vector<std::size_t>>{{jmax}, rest}
                               : std::vector<std::vector<std::size_t>>{rest, {jmax}});
    v.AddStage(prefix + "branch").Set("two_way", 1).Set("t1", t1).Set("t2", t2).Set(
        "axis", static_cast<double>(jmax));
    const TestVerdict t = Independence2D(pair, std::max(nj, nr), std::min(nj, nr),
                                         eps / 2.0, rng, c);
    v.AppendTrace(t, prefix + "split/");
    if (!t.yes()) return Answer::kNo;
    RegroupOracle marginal(p, dims, {rest});
    return IndependenceRec(marginal, SubDims(dims, rest), eps / 2.0, c, rng, v,
                           prefix + "rest/");
  }

  // Three-way product test, then each part.
  const auto parts = GreedyPartition(dims);
  std::vector<std::vector<std::size_t>> groups;
  for (const auto& g : parts) {
    if (!g.empty()) groups.push_back(g);
  }
  RegroupOracle grouped(p, dims, groups);
  const auto& sizes = grouped.group_sizes();
  const double sub_eps = eps / 4.0;
  const double kcap = std::cbrt(static_cast<double>(dims[jmax])) * std::cbrt(total) *
                      std::pow(sub_eps, -4.0 / 3.0);
  std::vector<SplitMap> splits;
  double prod_k = 1.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double k = std::min(static_cast<double>(sizes[g]), std::ceil(kcap));
    prod_k *= k;
    splits.push_back(internal::GroupSplitFromSamples(grouped, sizes, g, k, rng));
  }
  v.AddStage(prefix + "branch").Set("two_way", 0).Set("t1", t1).Set("t2", t2).Set(
      "groups", static_cast<double>(groups.size()));
  const TestVerdict t = internal::ProductSplitTest(
      grouped, sizes, splits, sub_eps, 4.0 / std::sqrt(prod_k), 1.0 / 3.0, c, rng);
  v.AppendTrace(t, prefix + "split/");
  if (!t.yes()) return Answer::kNo;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() < 2) continue;
    RegroupOracle marginal(p, dims, {groups[g]});
    if (IndependenceRec(marginal, SubDims(dims, groups[g]), sub_eps, c, rng, v,
                        prefix + "part" + std::to_string(g) + "/") == Answer::kNo) {
      return Answer::kNo;
    }
  }
  return Answer::kYes;
}

}  // namespace

std::size_t CoordinateShuffle(std::span<const std::size_t> draws,
                              std::span<const std::size_t> group_sizes) {
  std::size_t out = 0, stride = 1;
  for (std::size_t t = group_sizes.size(); t-- > 0;) {
    out += ((draws[t] / stride) % group_sizes[t]) * stride;
    stride *= group_sizes[t];
  }
  return out;
}

TestVerdict Independence2D(SampleOracle& p, std::size_t n, std::size_t m,
                           double eps, Rng& rng, const TesterConstants& c) {
  internal::ValidateEps(eps, "independence_2d");
  Validate2D(p, n, m, "independence_2d");
  if (n < m) throw std::invalid_argument("independence_2d: requires n >= m");
  internal::SampleMeter meter;
  meter.Track("p", p);
  const std::vector<std::size_t> sizes{n, m};
  const double k = SplitSize2D(static_cast<double>(n), static_cast<double>(m), eps);
  std::vector<SplitMap> splits;
  splits.push_back(internal::GroupSplitFromSamples(p, sizes, 0, k, rng));
  splits.push_back(
      internal::GroupSplitFromSamples(p, sizes, 1, static_cast<double>(m), rng));
  const double b = 4.0 / std::sqrt(k * static_cast<double>(m));
  TestVerdict v = internal::ProductSplitTest(p, sizes, splits, eps, b, 1.0 / 3.0, c, rng);
  v.trace.front().Set("k", k);
  meter.Fill(v);
  return v;
}

std::array<std::vector<std::size_t>, 3> GreedyPartition(
    std::span<const std::size_t> dims) {
  double total = 1.0;
  for (auto d : dims) total *= static_cast<double>(d);
  const double root = std::sqrt(total);
  std::array<std::vector<std::size_t>, 3> out;
  double prod = 1.0;
  std::size_t i = 0;
  for (; i < dims.size(); ++i) {
    prod *= static_cast<double>(dims[i]);
    if (prod > root) break;
    out[0].push_back(i);
  }
  if (i < dims.size()) out[1].push_back(i++);
  for (; i < dims.size(); ++i) out[2].push_back(i);
  return out;
}

TestVerdict IndependenceDD(SampleOracle& p, std::vector<std::size_t> dims,
                           double eps, Rng& rng, const TesterConstants& c) {
  internal::ValidateEps(eps, "independence_dd");
  if (dims.size() < 2) throw std::invalid_argument("independence_dd: need d >= 2");
  std::size_t total = 1;
  for (auto d : dims) {
    if (d == 0) throw std::invalid_argument("independence_dd: zero dimension");
    total *= d;
  }
  if (p.domain_size() != total) {
    throw DimensionMismatch("independence_dd: oracle domain differs from product");
  }
  internal::SampleMeter meter;
  meter.Track("p", p);
  TestVerdict v;
  v.answer = IndependenceRec(p, std::move(dims), eps, c, rng, v, "");
  meter.Fill(v);
  return v;
}

TestVerdict CollectionSampling(SampleOracle& p,
                               const ExplicitDistribution& known_marginal2,
                               std::size_t n, std::size_t m, double eps,
                               Rng& rng, const TesterConstants& c) {
  internal::ValidateEps(eps, "collection_sampling");
  Validate2D(p, n, m, "collection_sampling");
  if (known_marginal2.size() != m) {
    throw DimensionMismatch("collection_sampling: marginal size differs from m");
  }
  internal::SampleMeter meter;
  meter.Track("p", p);
  const std::vector<std::size_t> sizes{n, m};
  const double k = SplitSize2D(static_cast<double>(n), static_cast<double>(m), eps);
  std::vector<SplitMap> splits;
  splits.push_back(internal::GroupSplitFromSamples(p, sizes, 0, k, rng));
  splits.push_back(SplitMap::FromKnown(known_marginal2));
  const double b = 4.0 / std::sqrt(k * static_cast<double>(m));
  TestVerdict v = internal::ProductSplitTest(p, sizes, splits, eps, b, 1.0 / 3.0, c, rng);
  v.trace.front().Set("k", k);
  meter.Fill(v);
  return v;
}

std::vector<std::size_t> CollectionQuerySchedule(std::size_t m, double c_query) {
  if (m == 0) throw std::invalid_argument("collection_query: empty family");
  const int levels = static_cast<int>(std::ceil(std::log2(static_cast<double>(m))));
  std::vector<std::size_t> out;
  for (int k = 0; k <= levels; ++k) {
    out.push_back(static_cast<std::size_t>(std::ceil(std::exp2(1.25 * k) * c_query)));
  }
  return out;
}

TestVerdict CollectionQuery(std::span<SampleOracle* const> oracles,
                            std::size_t n, double eps, Rng& rng,
                            const TesterConstants& c) {
  internal::ValidateEps(eps, "collection_query");
  if (oracles.empty()) throw std::invalid_argument("collection_query: empty family");
  internal::SampleMeter meter;
  for (std::size_t i = 0; i < oracles.size(); ++i) {
    if (oracles[i]->domain_size() != n) {
      throw DimensionMismatch("collection_query: oracle domain differs from n");
    }
    meter.Track("q" + std::to_string(i + 1), *oracles[i]);
  }
  const std::size_t m = oracles.size();
  // q_* samples a uniformly random member.
  FunctionOracle mixture(n, [&](Rng& r) { return oracles[r.UniformInt(m)]->NextSample(r); });
  const auto schedule = CollectionQuerySchedule(m, c.c_query);

  TestVerdict v;
  v.answer = Answer::kYes;
  for (std::size_t k = 0; k < schedule.size() && v.yes(); ++k) {
    const double radius = std::min(2.0, std::ldexp(eps, static_cast<int>(k) - 1));
    const double fail = std::min(1.0 / 3.0, std::pow(6.0, -static_cast<double>(k)) /
                                                (c.c_query * c.c_query));
    auto& st = v.AddStage("level_" + std::to_string(k));
    st.Set("picks", static_cast<double>(schedule[k])).Set("radius", radius).Set("fail", fail);
    const std::size_t stage_index = v.trace.size() - 1;
    for (std::size_t t = 0; t < schedule[k]; ++t) {
      const std::size_t i = rng.UniformInt(m);
      const TestVerdict sub =
          internal::ClosenessWithFailure(*oracles[i], mixture, n, radius, fail, c, rng);
      if (!sub.yes()) {
        v.trace[stage_index].Set("rejected_index", static_cast<double>(i + 1));
        v.trace[stage_index].verdict = Answer::kNo;
        v.answer = Answer::kNo;
        break;
      }
    }
    if (v.yes()) v.trace[stage_index].verdict = Answer::kYes;
  }
  meter.Fill(v);
  return v;
}

IntervalPartition::IntervalPartition(std::size_t n, std::vector<std::size_t> starts)
    : n_(n), starts_(std::move(starts)) {
  if (n_ == 0 || starts_.empty() || starts_[0] != 0) {
    throw std::invalid_argument("IntervalPartition: must start at 0");
  }
  for (std::size_t i = 1; i < starts_.size(); ++i) {
    if (starts_[i] <= starts_[i - 1]) {
      throw std::invalid_argument("IntervalPartition: starts must increase");
    }
  }
  if (starts_.back() >= n_) throw std::invalid_argument("IntervalPartition: empty interval");
}

IntervalPartition IntervalPartition::Equal(std::size_t n, std::size_t k) {
  if (k == 0 || k > n) throw std::invalid_argument("IntervalPartition: need 1 <= k <= n");
  std::vector<std::size_t> starts(k);
  for (std::size_t i = 0; i < k; ++i) starts[i] = i * n / k;
  return IntervalPartition(n, std::move(starts));
}

std::size_t IntervalPartition::IntervalOf(std::size_t bin) const {
  if (bin >= n_) throw std::out_of_range("IntervalPartition::IntervalOf");
  return static_cast<std::size_t>(
             std::upper_bound(starts_.begin(), starts_.end(), bin) - starts_.begin()) -
         1;
}

std::vector<std::int64_t> HistogramPreRefinement(const IntervalPartition& part) {
  std::vector<std::int64_t> r(part.k());
  const double n = static_cast<double>(part.n());
  const double k = static_cast<double>(part.k());
  for (std::size_t i = 0; i < part.k(); ++i) {
    r[i] = static_cast<std::int64_t>(std::ceil(n / (k * static_cast<double>(part.length(i)))));
  }
  return r;
}

TestVerdict KHistogram(SampleOracle& p, std::size_t n,
                       const IntervalPartition& part, double eps, Rng& rng,
                       const TesterConstants& c) {
  internal::ValidateEps(eps, "k_histogram");
  if (part.n() != n || p.domain_size() != n) {
    throw DimensionMismatch("k_histogram: partition or oracle size differs from n");
  }
  internal::SampleMeter meter;
  meter.Track("p", p);
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(part.k());
  const auto pre = HistogramPreRefinement(part);

  // Random refinement from Poi(m) draws: interval i gets
  // floor(n a_i / (k |I_i|)) + 1 sub-bins per pre-refined bin.
  const double m = std::min(kd, std::cbrt(nd) * std::cbrt(kd) * std::pow(eps, -4.0 / 3.0));
  std::vector<std::int64_t> hits(part.k(), 0);
  const std::int64_t draws = rng.Poisson(m);
  for (std::int64_t t = 0; t < draws; ++t) ++hits[part.IntervalOf(p.NextSample(rng))];
  std::vector<std::int64_t> multiplicity(n);
  std::vector<std::int64_t> per_bin(part.k());
  for (std::size_t i = 0; i < part.k(); ++i) {
    const double len = static_cast<double>(part.length(i) * static_cast<std::size_t>(pre[i]));
    const auto r2 = static_cast<std::int64_t>(
                        std::floor(nd * static_cast<double>(hits[i]) / (kd * len))) +
                    1;
    per_bin[i] = pre[i] * r2;
    for (std::size_t b = part.begin(i); b < part.end(i); ++b) multiplicity[b] = per_bin[i] - 1;
  }
  const SplitMap sm = SplitMap::FromMultiplicities(multiplicity);

  // Flattened q': one draw of p, then a uniform sub-bin of its interval.
  SplitOracle ps(p, sm);
  FunctionOracle flat(sm.n_split(), [&](Rng& r) {
    const std::size_t i = part.IntervalOf(p.NextSample(r));
    const auto width = static_cast<std::uint64_t>(part.length(i)) *
                       static_cast<std::uint64_t>(per_bin[i]);
    return sm.Flat(part.begin(i), 0) + static_cast<std::size_t>(r.UniformInt(width));
  });
  const double b = 2.0 * std::sqrt(kd / (nd * std::max(m, 1.0)));
  const TestVerdict inner =
      L2ClosenessTestMin(ps, flat, sm.n_split(), c.L2Config(eps, b), rng);

  TestVerdict v;
  v.answer = inner.answer;
  v.AddStage("refine")
      .Set("k", kd)
      .Set("m", m)
      .Set("n_split", static_cast<double>(sm.n_split()))
      .Set("b", b);
  v.AppendTrace(inner, "");
  meter.Fill(v);
  return v;
}

}  // namespace disttest
