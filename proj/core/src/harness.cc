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

#include "disttest/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include "disttest/distribution.h"
#include "disttest/hard_instances.h"
#include "disttest/oracle.h"
#include "disttest/testers.h"
#include "json.hpp"

#ifndef DISTTEST_VERSION
#define DISTTEST_VERSION "0.0.0"
#endif

namespace disttest {
namespace {

using json = nlohmann::json;

using Instance = FamilyInstance;

ExplicitDistribution Uniform(std::size_t n) { return ExplicitDistribution::Uniform(n); }

void Require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// Paired +-delta relative perturbation of bins [begin, end) of base.
ExplicitDistribution PairedPerturbation(const ExplicitDistribution& base,
                                        std::size_t begin, std::size_t end,
                                        double delta, Rng& rng) {
  std::vector<double> p(base.probs().begin(), base.probs().end());
  for (std::size_t i = begin; i + 1 < end; i += 2) {
    const double s = rng.Bernoulli(0.5) ? delta : -delta;
    p[i] *= 1.0 + s;
    p[i + 1] *= 1.0 - s;
  }
  return ExplicitDistribution(std::move(p));
}

Instance Paninski(const CellParams& c, Answer label, Rng& rng) {
  Require(c.n >= 2, "paninski: n >= 2");
  Require(c.eps > 0.0 && c.eps <= 1.0, "paninski: eps in (0, 1]");
  Instance inst;
  inst.q = Uniform(c.n);
  inst.p = label == Answer::kYes ? *inst.q : PaninskiPair(c.n, c.eps, rng).second;
  inst.dims = {c.n};
  return inst;
}

Instance Chi2Tilt(const CellParams& c, Answer label, Rng& rng) {
  if (label == Answer::kNo) return Paninski(c, label, rng);
  Require(c.n >= 2, "chi2_tilt: n >= 2");
  Instance inst;
  inst.q = Uniform(c.n);
  inst.p = SingleBinTilt(c.n, c.eps * c.eps / 20.0);
  inst.dims = {c.n};
  return inst;
}

Instance PointTail(const CellParams& c, Answer label, Rng&) {
  const double nd = static_cast<double>(c.n);
  Require(c.n >= 2 && c.eps / 2.0 <= 1.0 - 1.0 / nd, "point_tail: n >= 2, eps/2 <= 1 - 1/n");
  std::vector<double> q(c.n, 1.0 / (nd * (nd - 1.0)));
  q[0] = 1.0 - 1.0 / nd;
  Instance inst;
  inst.q = ExplicitDistribution(q);
  if (label == Answer::kNo) {
    q[0] -= c.eps / 2.0;
    for (std::size_t i = 1; i < c.n; ++i) q[i] += c.eps / (2.0 * (nd - 1.0));
  }
  inst.p = ExplicitDistribution(std::move(q));
  inst.dims = {c.n};
  return inst;
}

Instance TwoLevel(const CellParams& c, Answer label, Rng& rng) {
  const auto heavy = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(c.n))));
  Require(c.n >= 4 && heavy < c.n, "two_level: n >= 4");
  Require(c.eps > 0.0 && c.eps <= 0.5, "two_level: eps in (0, 1/2]");
  const std::size_t light = c.n - heavy;
  std::vector<double> q(c.n);
  for (std::size_t i = 0; i < c.n; ++i) {
    q[i] = i < heavy ? 0.5 / static_cast<double>(heavy) : 0.5 / static_cast<double>(light);
  }
  Instance inst;
  inst.q = ExplicitDistribution(std::move(q));
  // Light mass is 1/2, so a 2 eps relative tilt there is eps in l1.
  inst.p = label == Answer::kYes ? *inst.q
                                 : PairedPerturbation(*inst.q, heavy, c.n, 2.0 * c.eps, rng);
  inst.dims = {c.n};
  return inst;
}

Instance Hellinger(const CellParams& c, Answer label, Rng& rng) {
  const std::size_t k = c.k > 0 ? c.k
                                : static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(c.n))));
  const HardInstancePair h = HellingerPair(c.n, k, c.eps, rng, label);
  Instance inst;
  inst.p = h.Normalized();
  inst.q = label == Answer::kYes ? *inst.p : h.NormalizedSecond();
  inst.certified = h.certified;
  inst.dims = {c.n};
  return inst;
}

Instance Product2D(const CellParams& c, Answer label, Rng& rng) {
  const HardInstancePair h = ProductYesNo2D(c.n, c.m, c.eps, rng, label);
  Instance inst;
  inst.p = h.Normalized();
  inst.certified = h.certified;
  inst.dims = {c.n, c.m};
  return inst;
}

Instance HeavyLight2D(const CellParams& c, Answer label, Rng& rng) {
  const HardInstancePair h = HeavyLightYesNo2D(c.n, c.m, c.k, c.eps, rng, label);
  Instance inst;
  inst.p = h.Normalized();
  inst.certified = h.certified;
  inst.dims = {c.n, c.m};
  return inst;
}

// Side n per coordinate, d = m coordinates.
Instance ProductDD(const CellParams& c, Answer label, Rng& rng) {
  Require(c.n >= 2 && c.m >= 2 && c.m <= 6, "product_dd: n >= 2, 2 <= m <= 6");
  std::size_t rest = 1;
  for (std::size_t t = 1; t < c.m; ++t) rest *= c.n;
  const HardInstancePair h = ProductYesNo2D(rest, c.n, c.eps, rng, label);
  Instance inst;
  inst.p = h.Normalized();
  inst.certified = h.certified;
  inst.dims.assign(c.m, c.n);
  return inst;
}

// NO: within each column, rows (2t, 2t+1) get (1 +- eps) with a random sign,
// so the second marginal stays exactly uniform.
Instance ColumnPaired(const CellParams& c, Answer label, Rng& rng) {
  Require(c.n >= 2 && c.n % 2 == 0 && c.m >= 1, "column_paired: even n >= 2, m >= 1");
  Require(c.eps > 0.0 && c.eps <= 1.0, "column_paired: eps in (0, 1]");
  const double cell = 1.0 / static_cast<double>(c.n * c.m);
  std::vector<double> p(c.n * c.m, cell);
  Instance inst;
  inst.dims = {c.n, c.m};
  if (label == Answer::kNo) {
    for (std::size_t j = 0; j < c.m; ++j) {
      for (std::size_t i = 0; i < c.n; i += 2) {
        const double s = rng.Bernoulli(0.5) ? c.eps : -c.eps;
        p[i * c.m + j] = cell * (1.0 + s);
        p[(i + 1) * c.m + j] = cell * (1.0 - s);
      }
    }
    inst.certified = ProductDistance(p, c.n, c.m) >= c.eps / 16.0;
  }
  inst.p = ExplicitDistribution(std::move(p));
  return inst;
}

// m distributions on [n]. NO: the second half is a Paninski perturbation
// with gap min(1, 2 eps), so the mean distance to any q is >= eps.
Instance Collection(const CellParams& c, Answer label, Rng& rng) {
  Require(c.n >= 2 && c.m >= 2, "collection: n >= 2, m >= 2");
  Instance inst;
  const double gap = std::min(1.0, 2.0 * c.eps);
  for (std::size_t i = 0; i < c.m; ++i) {
    if (label == Answer::kNo && i >= c.m / 2) {
      inst.collection.push_back(PaninskiPair(c.n, gap, rng).second);
    } else {
      inst.collection.push_back(Uniform(c.n));
    }
  }
  if (label == Answer::kNo) inst.certified = gap >= 2.0 * c.eps;
  inst.dims = {c.n};
  return inst;
}

Instance Histogram(const CellParams& c, Answer label, Rng& rng) {
  const HardInstancePair h = HistogramHardPair(c.n, c.k, c.eps, rng, label);
  Instance inst;
  inst.p = h.Normalized();
  inst.certified = h.certified;
  inst.dims = {c.n};
  return inst;
}

// Bin 0 carries 0.4 (YES) or 0.6 (NO); used by the synthetic testers.
Instance Coin(const CellParams& c, Answer label, Rng&) {
  Require(c.n >= 2, "coin: n >= 2");
  const double head = label == Answer::kYes ? 0.4 : 0.6;
  std::vector<double> p(c.n, (1.0 - head) / static_cast<double>(c.n - 1));
  p[0] = head;
  Instance inst;
  inst.p = ExplicitDistribution(std::move(p));
  inst.dims = {c.n};
  return inst;
}

using FamilyFn = Instance (*)(const CellParams&, Answer, Rng&);

const std::map<std::string, FamilyFn>& Families() {
  static const auto* table = new std::map<std::string, FamilyFn>{
      {"paninski", &Paninski},         {"chi2_tilt", &Chi2Tilt},
      {"point_tail", &PointTail},      {"two_level", &TwoLevel},
      {"hellinger", &Hellinger},       {"product_2d", &Product2D},
      {"heavy_light_2d", &HeavyLight2D}, {"product_dd", &ProductDD},
      {"column_paired", &ColumnPaired}, {"collection", &Collection},
      {"histogram", &Histogram},       {"coin", &Coin},
  };
  return *table;
}

const ExplicitDistribution& NeedP(const Instance& inst, const std::string& tester) {
  Require(inst.p.has_value(), tester + ": family has no single sampled distribution");
  return *inst.p;
}
const ExplicitDistribution& NeedQ(const Instance& inst, const std::string& tester) {
  Require(inst.q.has_value(), tester + ": family has no reference distribution");
  return *inst.q;
}

TrialOutcome FromVerdict(const TestVerdict& v) {
  return TrialOutcome{v.answer, v.TotalSamples(), true};
}

using TesterFn = std::function<TrialOutcome(const Instance&, const CellParams&,
                                            const TesterConstants&, Rng&)>;

const std::map<std::string, TesterFn>& Testers() {
  static const auto* table = [] {
    auto* t = new std::map<std::string, TesterFn>;
    (*t)["identity_known"] = [](const Instance& in, const CellParams& c,
                                const TesterConstants& k, Rng& rng) {
      ExplicitOracle p(NeedP(in, "identity_known"));
      return FromVerdict(IdentityKnown(NeedQ(in, "identity_known"), p, c.eps, rng, k));
    };
    (*t)["closeness_equal"] = [](const Instance& in, const CellParams& c,
                                 const TesterConstants& k, Rng& rng) {
      ExplicitOracle p(NeedP(in, "closeness_equal")), q(NeedQ(in, "closeness_equal"));
      return FromVerdict(ClosenessEqual(p, q, p.domain_size(), c.eps, rng, k));
    };
    (*t)["closeness_unequal"] = [](const Instance& in, const CellParams& c,
                                   const TesterConstants& k, Rng& rng) {
      ExplicitOracle p(NeedP(in, "closeness_unequal")), q(NeedQ(in, "closeness_unequal"));
      const double m1 = c.m > 0 ? static_cast<double>(c.m)
                                : static_cast<double>(ClosenessSplitSize(p.domain_size(), c.eps));
      return FromVerdict(ClosenessUnequal(q, p, p.domain_size(), c.eps, m1, rng, k));
    };
    (*t)["identity_instance_optimal"] = [](const Instance& in, const CellParams& c,
                                           const TesterConstants& k, Rng& rng) {
      ExplicitOracle p(NeedP(in, "identity_instance_optimal"));
      return FromVerdict(IdentityInstanceOptimal(NeedQ(in, "identity_instance_optimal"), p,
                                                 c.eps, rng, k));
    };
    (*t)["closeness_adaptive"] = [](const Instance& in, const CellParams& c,
                                    const TesterConstants& k, Rng& rng) {
      ExplicitOracle p(NeedP(in, "closeness_adaptive")), q(NeedQ(in, "closeness_adaptive"));
      return FromVerdict(ClosenessAdaptive(p, q, p.domain_size(), c.eps, rng, k));
    };
    (*t)["hellinger_closeness"] = [](const Instance& in, const CellParams& c,
                                     const TesterConstants& k, Rng& rng) {
      ExplicitOracle p(NeedP(in, "hellinger_closeness")), q(NeedQ(in, "hellinger_closeness"));
      return FromVerdict(HellingerCloseness(p, q, p.domain_size(), c.eps, rng, k));
    };
    (*t)["independence_2d"] = [](const Instance& in, const CellParams& c,
                                 const TesterConstants& k, Rng& rng) {
      Require(in.dims.size() == 2 && in.dims[0] >= in.dims[1],
              "independence_2d: needs a 2D family with n >= m");
      ExplicitOracle p(NeedP(in, "independence_2d"));
      return FromVerdict(Independence2D(p, in.dims[0], in.dims[1], c.eps, rng, k));
    };
    (*t)["independence_dd"] = [](const Instance& in, const CellParams& c,
                                 const TesterConstants& k, Rng& rng) {
      Require(in.dims.size() >= 2, "independence_dd: needs a product-domain family");
      ExplicitOracle p(NeedP(in, "independence_dd"));
      return FromVerdict(IndependenceDD(p, in.dims, c.eps, rng, k));
    };
    (*t)["collection_sampling"] = [](const Instance& in, const CellParams& c,
                                     const TesterConstants& k, Rng& rng) {
      Require(in.dims.size() == 2, "collection_sampling: needs a 2D family");
      ExplicitOracle p(NeedP(in, "collection_sampling"));
      return FromVerdict(CollectionSampling(p, Uniform(in.dims[1]), in.dims[0], in.dims[1],
                                            c.eps, rng, k));
    };
    (*t)["collection_query"] = [](const Instance& in, const CellParams& c,
                                  const TesterConstants& k, Rng& rng) {
      Require(!in.collection.empty(), "collection_query: needs the collection family");
      std::vector<ExplicitOracle> oracles;
      oracles.reserve(in.collection.size());
      for (const auto& d : in.collection) oracles.emplace_back(d);
      std::vector<SampleOracle*> ptrs;
      for (auto& o : oracles) ptrs.push_back(&o);
      return FromVerdict(CollectionQuery(ptrs, in.collection.front().size(), c.eps, rng, k));
    };
    (*t)["k_histogram"] = [](const Instance& in, const CellParams& c,
                             const TesterConstants& k, Rng& rng) {
      Require(c.k >= 1, "k_histogram: k >= 1");
      ExplicitOracle p(NeedP(in, "k_histogram"));
      const std::size_t n = p.domain_size();
      return FromVerdict(KHistogram(p, n, IntervalPartition::Equal(n, c.k), c.eps, rng, k));
    };
    // Reads ceil(20 c) draws and says NO when bin 0 holds the majority;
    // its budget does not depend on n.
    (*t)["synthetic_constant"] = [](const Instance& in, const CellParams&,
                                    const TesterConstants& k, Rng& rng) {
      ExplicitOracle p(NeedP(in, "synthetic_constant"));
      const auto draws = static_cast<std::uint64_t>(std::ceil(20.0 * k.EffectiveCSample()));
      std::uint64_t heads = 0;
      for (std::uint64_t i = 0; i < draws; ++i) heads += p.NextSample(rng) == 0;
      return TrialOutcome{2 * heads > draws ? Answer::kNo : Answer::kYes, draws, true};
    };
    // A fair coin regardless of the input.
    (*t)["synthetic_coin"] = [](const Instance&, const CellParams&,
                                const TesterConstants&, Rng& rng) {
      return TrialOutcome{rng.Bernoulli(0.5) ? Answer::kYes : Answer::kNo, 0, true};
    };
    return t;
  }();
  return *table;
}

template <typename Map>
std::vector<std::string> Keys(const Map& m) {
  std::vector<std::string> out;
  for (const auto& [key, value] : m) out.push_back(key);
  return out;
}

// Runs fn(i) for i in [0, count) on `threads` workers; rethrows the first
// exception.
void ParallelFor(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

json SpecJson(const ExperimentSpec& spec) {
  return json{{"tester", spec.tester},
              {"family", spec.family},
              {"n_values", spec.n_values},
              {"m_values", spec.m_values},
              {"k_values", spec.k_values},
              {"eps_values", spec.eps_values},
              {"budget_multipliers", spec.budget_multipliers},
              {"trials", spec.trials},
              {"seed", spec.seed}};
}

}  // namespace

ExplicitDistribution SingleBinTilt(std::size_t n, double chi2) {
  Require(n >= 2 && chi2 >= 0.0, "SingleBinTilt: n >= 2, chi2 >= 0");
  const double nd = static_cast<double>(n);
  const double delta = std::sqrt(chi2 * (nd - 1.0) / (nd * nd));
  Require(delta <= (nd - 1.0) / nd, "SingleBinTilt: chi2 too large");
  std::vector<double> p(n, 1.0 / nd - delta / (nd - 1.0));
  p[0] = 1.0 / nd + delta;
  return ExplicitDistribution(std::move(p));
}

const std::vector<std::string>& HarnessTesterIds() {
  static const auto* ids = new std::vector<std::string>(Keys(Testers()));
  return *ids;
}

const std::vector<std::string>& FamilyIds() {
  static const auto* ids = new std::vector<std::string>(Keys(Families()));
  return *ids;
}

void ExperimentSpec::Validate() const {
  Require(trials >= 1, "trials must be >= 1");
  Require(!n_values.empty() && !m_values.empty() && !k_values.empty() &&
              !eps_values.empty() && !budget_multipliers.empty(),
          "parameter grids must be nonempty");
  Require(Testers().count(tester) == 1, "unknown tester id: " + tester);
  Require(Families().count(family) == 1, "unknown family id: " + family);
  for (double b : budget_multipliers) Require(b > 0.0, "budget multipliers must be > 0");
  ResolvedConstants().Validate();
}

std::vector<CellParams> ExperimentSpec::Cells() const {
  std::vector<CellParams> cells;
  for (auto n : n_values)
    for (auto m : m_values)
      for (auto k : k_values)
        for (double eps : eps_values)
          for (double b : budget_multipliers) cells.push_back(CellParams{n, m, k, eps, b});
  return cells;
}

TesterConstants ExperimentSpec::ResolvedConstants() const {
  if (constants) return *constants;
  const auto& ids = TesterIds();
  if (std::find(ids.begin(), ids.end(), tester) != ids.end()) return DefaultConstants(tester);
  return TesterConstants{};
}

RateEstimate WilsonInterval(int successes, int trials, double z) {
  Require(trials >= 1 && successes >= 0 && successes <= trials, "WilsonInterval: bad counts");
  const double n = trials;
  const double p = successes / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return RateEstimate{successes, trials, p, std::max(0.0, center - half),
                      std::min(1.0, center + half)};
}

FamilyInstance DrawInstance(const std::string& family, const CellParams& cell,
                           Answer label, Rng& rng) {
  const auto f = Families().find(family);
  Require(f != Families().end(), "unknown family id: " + family);
  return f->second(cell, label, rng);
}

TrialOutcome RunTrial(const std::string& tester, const std::string& family,
                      const CellParams& cell, Answer label,
                      const TesterConstants& constants, Rng& rng) {
  const auto t = Testers().find(tester);
  Require(t != Testers().end(), "unknown tester id: " + tester);
  const auto f = Families().find(family);
  Require(f != Families().end(), "unknown family id: " + family);
  TesterConstants c = constants;
  c.budget_scale *= cell.budget;
  const Instance inst = DrawInstance(family, cell, label, rng);
  TrialOutcome out = t->second(inst, cell, c, rng);
  out.certified = inst.certified;
  return out;
}

std::vector<PowerCell> RunPowerSweep(const ExperimentSpec& spec) {
  spec.Validate();
  const std::vector<CellParams> cells = spec.Cells();
  const TesterConstants constants = spec.ResolvedConstants();
  const std::size_t per_cell = 2 * static_cast<std::size_t>(spec.trials);
  std::vector<TrialOutcome> outcomes(cells.size() * per_cell);
  const Rng master(spec.seed);
  ParallelFor(outcomes.size(), spec.threads, [&](std::size_t idx) {
    const std::size_t c = idx / per_cell;
    const std::size_t within = idx % per_cell;
    const std::size_t label = within / spec.trials;
    const std::size_t trial = within % spec.trials;
    Rng rng = master.Split(c).Split(label).Split(trial);
    outcomes[idx] = RunTrial(spec.tester, spec.family, cells[c],
                             label == 0 ? Answer::kYes : Answer::kNo, constants, rng);
  });

  std::vector<PowerCell> table;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    int yes_ok = 0, no_ok = 0, uncertified = 0;
    std::vector<double> samples;
    double total = 0.0;
    for (std::size_t w = 0; w < per_cell; ++w) {
      const TrialOutcome& o = outcomes[c * per_cell + w];
      const bool is_yes = w < static_cast<std::size_t>(spec.trials);
      if (is_yes) {
        yes_ok += o.answer == Answer::kYes;
      } else {
        no_ok += o.answer == Answer::kNo;
        uncertified += !o.certified;
      }
      samples.push_back(static_cast<double>(o.samples));
      total += static_cast<double>(o.samples);
    }
    PowerCell cell;
    cell.params = cells[c];
    cell.trials = spec.trials;
    cell.yes_accept = WilsonInterval(yes_ok, spec.trials);
    cell.no_reject = WilsonInterval(no_ok, spec.trials);
    cell.mean_samples = total / static_cast<double>(per_cell);
    cell.median_samples = Median(std::move(samples));
    cell.uncertified = uncertified;
    table.push_back(cell);
  }
  return table;
}

std::string PowerCsvHeader() {
  return "tester,family,n,m,k,eps,budget,trials,"
         "yes_accept_rate,yes_ci_low,yes_ci_high,"
         "no_reject_rate,no_ci_low,no_ci_high,"
         "mean_samples,median_samples,uncertified";
}

void WritePowerCsv(std::ostream& os, const ExperimentSpec& spec,
                   const std::vector<PowerCell>& cells) {
  os << PowerCsvHeader() << '\n';
  for (const auto& c : cells) {
    os << spec.tester << ',' << spec.family << ',' << c.params.n << ',' << c.params.m << ','
       << c.params.k << ',' << FormatDouble(c.params.eps) << ',' << FormatDouble(c.params.budget)
       << ',' << c.trials << ',' << FormatDouble(c.yes_accept.rate) << ','
       << FormatDouble(c.yes_accept.low) << ',' << FormatDouble(c.yes_accept.high) << ','
       << FormatDouble(c.no_reject.rate) << ',' << FormatDouble(c.no_reject.low) << ','
       << FormatDouble(c.no_reject.high) << ',' << FormatDouble(c.mean_samples) << ','
       << FormatDouble(c.median_samples) << ',' << c.uncertified << '\n';
  }
}

std::string Fnv1aHex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string CodeVersion() { return DISTTEST_VERSION; }

void WriteManifest(std::ostream& os, const ExperimentSpec& spec) {
  const std::string constants = ConstantSetToJson({{spec.tester, spec.ResolvedConstants()}});
  json j{{"spec", SpecJson(spec)},
         {"seed", spec.seed},
         {"code_version", CodeVersion()},
         {"constants", json::parse(constants)},
         {"constants_hash", Fnv1aHex(constants)},
         {"csv_header", PowerCsvHeader()}};
  os << j.dump(2) << '\n';
}

ExponentFit FitLogLog(const std::vector<double>& x, const std::vector<double>& y) {
  Require(x.size() == y.size() && x.size() >= 2, "FitLogLog: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  Require(sxx > 0.0, "FitLogLog: x values must differ");
  ExponentFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.exponent * x[i];
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

ExponentFit FitComplexityExponent(const FitSpec& fs) {
  Require(fs.n_grid.size() >= 2, "FitComplexityExponent: n_grid needs >= 2 values");
  Require(fs.target_accuracy > 0.5 && fs.target_accuracy < 1.0,
          "FitComplexityExponent: target in (1/2, 1)");
  constexpr int kLo = -16, kHi = 32, kMaxEvals = 12;
  std::vector<FitPoint> points;
  for (std::size_t n : fs.n_grid) {
    const std::size_t m =
        fs.m_exponent > 0.0
            ? static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), fs.m_exponent)))
            : fs.m_fixed;
    ExperimentSpec spec;
    spec.tester = fs.tester;
    spec.family = fs.family;
    spec.n_values = {n};
    spec.m_values = {m};
    spec.k_values = {fs.k};
    spec.eps_values = {fs.eps};
    spec.trials = fs.trials;
    // Same streams for every multiplier at this n.
    spec.seed = Mix64(fs.seed ^ Mix64(n));
    spec.constants = fs.constants;
    spec.threads = fs.threads;
    std::map<int, PowerCell> cache;
    auto eval = [&](int j) -> const PowerCell& {
      auto it = cache.find(j);
      if (it == cache.end()) {
        spec.budget_multipliers = {std::exp2(j / 4.0)};
        it = cache.emplace(j, RunPowerSweep(spec).front()).first;
      }
      return it->second;
    };
    auto pass = [&](int j) { return eval(j).MinAccuracy() >= fs.target_accuracy; };
    FitPoint pt;
    pt.n = n;
    pt.m = m;
    // Bracket with factor-2 steps from multiplier 1, then bisect on the
    // 2^{1/4} grid. lo always fails (or is below the range), hi passes.
    int lo = kLo - 1, hi = kHi;
    if (pass(0)) {
      hi = 0;
      for (int j = -4; j >= kLo; j -= 4) {
        if (!pass(j)) {
          lo = j;
          break;
        }
        hi = j;
      }
      pt.reached = true;
    } else {
      lo = 0;
      for (int j = 4; j <= kHi; j += 4) {
        if (pass(j)) {
          hi = j;
          pt.reached = true;
          break;
        }
        lo = j;
      }
    }
    while (pt.reached && hi - lo > 1 && static_cast<int>(cache.size()) < kMaxEvals) {
      const int mid = lo + (hi - lo) / 2;
      if (pass(mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    if (!pt.reached) hi = lo;
    const PowerCell& best = eval(hi);
    pt.multiplier = best.params.budget;
    pt.budget = best.mean_samples;
    pt.accuracy = best.MinAccuracy();
    // Locate the crossing inside the last 2^{1/4} step, linear in accuracy
    // and log-linear in budget.
    if (pt.reached && hi - lo == 1 && cache.count(lo) != 0) {
      const PowerCell& below = cache.at(lo);
      const double a0 = below.MinAccuracy(), a1 = pt.accuracy;
      if (a0 < fs.target_accuracy && a1 > a0) {
        const double t = (fs.target_accuracy - a0) / (a1 - a0);
        pt.multiplier = std::exp2((lo + t) / 4.0);
        pt.budget = std::exp(std::log(below.mean_samples) +
                             t * (std::log(best.mean_samples) - std::log(below.mean_samples)));
        pt.accuracy = fs.target_accuracy;
      }
    }
    points.push_back(pt);
  }
  std::vector<double> x, y;
  for (const auto& p : points) {
    x.push_back(std::log(static_cast<double>(p.n)));
    y.push_back(std::log(std::max(p.budget, 1.0)));
  }
  ExponentFit fit = FitLogLog(x, y);
  fit.points = std::move(points);
  return fit;
}

std::vector<ExperimentSpec> CanonicalGrid(const std::string& tester, int trials,
                                          std::uint64_t seed) {
  auto make = [&](std::string family, std::vector<std::size_t> n, std::vector<std::size_t> m,
                  std::vector<std::size_t> k, double eps) {
    ExperimentSpec s;
    s.tester = tester;
    s.family = std::move(family);
    s.n_values = std::move(n);
    s.m_values = std::move(m);
    s.k_values = std::move(k);
    s.eps_values = {eps};
    s.trials = trials;
    s.seed = seed;
    return s;
  };
  std::vector<ExperimentSpec> grid;
  if (tester == "identity_known") {
    grid.push_back(make("paninski", {100}, {0}, {0}, 0.5));
  } else if (tester == "closeness_equal") {
    grid.push_back(make("paninski", {100, 200}, {0}, {0}, 0.5));
  } else if (tester == "closeness_unequal") {
    grid.push_back(make("paninski", {400}, {1, 10, 100}, {0}, 0.5));
  } else if (tester == "identity_instance_optimal") {
    grid.push_back(make("paninski", {100}, {0}, {0}, 0.5));
    grid.push_back(make("point_tail", {10000}, {0}, {0}, 0.25));
  } else if (tester == "closeness_adaptive") {
    grid.push_back(make("paninski", {100}, {0}, {0}, 0.5));
  } else if (tester == "hellinger_closeness") {
    grid.push_back(make("hellinger", {10000}, {0}, {100}, 0.3));
  } else if (tester == "independence_2d") {
    grid.push_back(make("product_2d", {20}, {10}, {0}, 0.5));
    grid.push_back(make("product_2d", {64}, {64}, {0}, 0.5));
  } else if (tester == "independence_dd") {
    grid.push_back(make("product_dd", {4}, {3}, {0}, 0.5));
  } else if (tester == "collection_sampling") {
    grid.push_back(make("column_paired", {20}, {10}, {0}, 0.5));
  } else if (tester == "collection_query") {
    grid.push_back(make("collection", {100}, {8}, {0}, 0.5));
  } else if (tester == "k_histogram") {
    grid.push_back(make("paninski", {512}, {0}, {8}, 0.5));
  } else {
    throw std::invalid_argument("no canonical grid for tester: " + tester);
  }
  return grid;
}

CalibrationResult CalibrateConstants(const std::string& tester, int trials,
                                     std::uint64_t seed, int threads) {
  CalibrationResult result;
  result.tester = tester;
  std::vector<ExperimentSpec> grid = CanonicalGrid(tester, trials, seed);
  for (int i = kCalibrationGridLow; i <= kCalibrationGridHigh; ++i) {
    const double c_sample = std::exp2(i / 2.0);
    double worst = 1.0;
    for (auto& spec : grid) {
      TesterConstants c = DefaultConstants(tester);
      c.c_sample = c_sample;
      spec.constants = c;
      spec.threads = threads;
      for (const auto& cell : RunPowerSweep(spec)) worst = std::min(worst, cell.MinAccuracy());
      if (worst < kCalibrationTarget) break;
    }
    result.steps.push_back(CalibrationStep{c_sample, worst});
    if (worst >= kCalibrationTarget) {
      result.found = true;
      result.c_sample = c_sample;
      break;
    }
  }
  return result;
}

ConstantSet ApplyCalibration(ConstantSet base, const std::vector<CalibrationResult>& results) {
  for (const auto& r : results) {
    if (r.found) base[r.tester].c_sample = r.c_sample;
  }
  return base;
}

}  // namespace disttest
