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

#include "disttest/hard_instances.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace disttest {
namespace {

void CheckEps(double eps, const char* who) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw std::invalid_argument(std::string(who) + ": eps must be in [0, 1]");
  }
}

double Sign(Rng& rng) { return rng.Bernoulli(0.5) ? 1.0 : -1.0; }

HardInstancePair Finish(std::string family, Answer which, std::vector<double> mass,
                        std::vector<std::size_t> dims) {
  HardInstancePair out;
  out.family = std::move(family);
  out.label = which;
  out.measure = PseudoDistribution(std::move(mass));
  out.total_mass = out.measure.total();
  out.dims = std::move(dims);
  return out;
}

void Certify(HardInstancePair& inst, double farness, double threshold) {
  inst.certified_farness = farness;
  inst.certification_threshold = threshold;
  inst.certified = inst.label == Answer::kYes || farness >= threshold;
}

double ProductFarness(const HardInstancePair& inst) {
  return ProductDistance(inst.measure.mass(), inst.dims[0], inst.dims[1]) /
         inst.total_mass;
}

}  // namespace

std::pair<ExplicitDistribution, ExplicitDistribution> PaninskiPair(
    std::size_t n, double eps, Rng& rng) {
  CheckEps(eps, "paninski_pair");
  if (n == 0) throw std::invalid_argument("paninski_pair: n must be positive");
  const double nd = static_cast<double>(n);
  std::vector<double> q(n, 1.0 / nd);
  for (std::size_t t = 0; t + 1 < n; t += 2) {
    const double s = Sign(rng) * eps;
    q[t] = (1.0 + s) / nd;
    q[t + 1] = (1.0 - s) / nd;
  }
  return {ExplicitDistribution::Uniform(n), ExplicitDistribution(std::move(q))};
}

double ProductDistance(std::span<const double> nu, std::size_t n, std::size_t m) {
  if (nu.size() != n * m) throw DimensionMismatch("product_distance: size != n*m");
  std::vector<double> row(n, 0.0), col(m, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      row[i] += nu[i * m + j];
      col[j] += nu[i * m + j];
    }
    total += row[i];
  }
  if (total <= 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) s += std::abs(nu[i * m + j] - row[i] * col[j] / total);
  }
  return s;
}

double NearestFlatDistance(std::span<const double> p, std::size_t k) {
  if (k == 0 || p.size() % k != 0) {
    throw std::invalid_argument("nearest_flat_distance: k must divide n");
  }
  double total = 0.0;
  for (double x : p) total += x;
  const std::size_t len = p.size() / k;
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double mean = 0.0;
    for (std::size_t b = i * len; b < (i + 1) * len; ++b) mean += p[b];
    mean /= static_cast<double>(len);
    for (std::size_t b = i * len; b < (i + 1) * len; ++b) s += std::abs(p[b] - mean);
  }
  return s / total;
}

HardInstancePair ProductYesNo2D(std::size_t n, std::size_t m, double eps,
                                Rng& rng, Answer which) {
  CheckEps(eps, "product_yes_no_2d");
  if (n == 0 || m == 0) throw std::invalid_argument("product_yes_no_2d: empty axis");
  const double cell = 1.0 / (static_cast<double>(n) * static_cast<double>(m));
  std::vector<double> mass(n * m, cell);
  if (which == Answer::kNo) {
    for (auto& x : mass) x = (1.0 + Sign(rng) * eps) * cell;
  }
  auto out = Finish("product_2d", which, std::move(mass), {n, m});
  out.params = {{"n", double(n)}, {"m", double(m)}, {"eps", eps}};
  Certify(out, ProductFarness(out), eps / 16.0);
  return out;
}

HardInstancePair HeavyLightYesNo2D(std::size_t n, std::size_t m, std::size_t k,
                                   double eps, Rng& rng, Answer which) {
  CheckEps(eps, "heavy_light_yes_no_2d");
  if (n == 0 || m == 0 || k == 0 || 2 * k > n) {
    throw std::invalid_argument("heavy_light_yes_no_2d: need 1 <= k <= n/2, m >= 1");
  }
  const double nd = static_cast<double>(n), md = static_cast<double>(m),
               kd = static_cast<double>(k);
  std::vector<double> mass(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const bool heavy = rng.Bernoulli(kd / nd);
    for (std::size_t j = 0; j < m; ++j) {
      double v = heavy ? 1.0 / (kd * md) : 1.0 / (nd * md);
      if (!heavy && which == Answer::kNo) v *= 1.0 + Sign(rng) * eps;
      mass[i * m + j] = v;
    }
  }
  auto out = Finish("heavy_light_2d", which, std::move(mass), {n, m});
  out.params = {{"n", nd}, {"m", md}, {"k", kd}, {"eps", eps}};
  Certify(out, ProductFarness(out), eps / 32.0);
  return out;
}

HardInstancePair HellingerPair(std::size_t n, std::size_t k, double eps,
                               Rng& rng, Answer which) {
  CheckEps(eps, "hellinger_pair");
  if (n < 2 || k == 0) throw std::invalid_argument("hellinger_pair: need n >= 2, k >= 1");
  const double nd = static_cast<double>(n), kd = static_cast<double>(k);
  const double heavy_prob = std::min(kd / nd, 0.5);
  std::vector<double> p(n), q(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (rng.Bernoulli(heavy_prob)) {
      p[i] = q[i] = 1.0 / (2.0 * kd);
    } else if (which == Answer::kYes) {
      p[i] = q[i] = eps / nd;
    } else if (rng.Bernoulli(0.5)) {
      p[i] = 2.0 * eps / nd;
    } else {
      q[i] = 2.0 * eps / nd;
    }
  }
  p[n - 1] = q[n - 1] = 1.0 / 3.0;
  auto out = Finish("hellinger", which, std::move(p), {n});
  out.second = PseudoDistribution(std::move(q));
  out.params = {{"n", nd}, {"k", kd}, {"eps", eps}};
  const auto pn = out.Normalized();
  const auto qn = out.NormalizedSecond();
  Certify(out, HellingerSq(pn, qn), eps / 4.0);
  return out;
}

HardInstancePair HistogramHardPair(std::size_t n, std::size_t k, double eps,
                                   Rng& rng, Answer which) {
  CheckEps(eps, "histogram_hard_pair");
  if (k == 0 || n % k != 0) {
    throw std::invalid_argument("histogram_hard_pair: k must divide n");
  }
  if (which == Answer::kNo && k == n) {
    throw std::invalid_argument(
        "histogram_hard_pair: with k = n every distribution is a k-histogram");
  }
  auto out = ProductYesNo2D(k, n / k, eps, rng, which);
  out.family = "histogram";
  out.dims = {n};
  out.params = {{"n", double(n)}, {"k", double(k)}, {"eps", eps}};
  Certify(out, NearestFlatDistance(out.measure.mass(), k), eps / 8.0);
  return out;
}

void WriteSidecar(std::ostream& os, const HardInstancePair& inst, std::uint64_t seed) {
  nlohmann::json j;
  j["family"] = inst.family;
  j["label"] = AnswerName(inst.label);
  j["params"] = inst.params;
  j["dims"] = inst.dims;
  j["total_mass"] = inst.total_mass;
  if (inst.second) j["total_mass_second"] = inst.second->total();
  j["certified_farness"] =
      inst.certified_farness ? nlohmann::json(*inst.certified_farness) : nlohmann::json();
  j["certification_threshold"] = inst.certification_threshold;
  j["certified"] = inst.certified;
  j["seed"] = seed;
  os << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Mutual information.
//
// With P1 = P0 (1 + 2h) and M = (P0 + P1)/2, the summand
// (P0 log(P0/M) + P1 log(P1/M)) / 2 equals P0 (phi(2h) - 2 phi(h)) / 2 with
// phi(x) = (1 + x) log(1 + x). Working with h avoids the first-order
// cancellation between the two logarithms.

namespace {

double Phi(double x) { return x <= -1.0 ? 0.0 : (1.0 + x) * std::log1p(x); }

double SecondDifference(double h) {
  if (std::abs(h) < 1e-3) {
    // sum_{j>=2} (-1)^j (2^j - 2) h^j / (j (j - 1))
    double s = 0.0, hp = h;
    for (int j = 2; j <= 10; ++j) {
      hp *= h;
      const double c = (std::ldexp(1.0, j) - 2.0) / (j * (j - 1.0));
      s += (j % 2 == 0 ? c : -c) * hp;
    }
    return s;
  }
  return Phi(2.0 * h) - 2.0 * Phi(h);
}

double MiSummand(double p0, double d) {
  if (p0 <= 0.0) return 0.0;
  return 0.5 * p0 * SecondDifference(d / (2.0 * p0));
}

double LogPoisson(std::int64_t l, double mu) {
  if (mu == 0.0) return l == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double ld = static_cast<double>(l);
  return ld * std::log(mu) - mu - std::lgamma(ld + 1.0);
}

// P1(l)/P0(l) - 1 for the perturbed cell law against Poi(lambda).
double MixtureExcess(std::int64_t l, double lambda, double eps) {
  const double ld = static_cast<double>(l);
  const double a = ld * std::log1p(eps) - lambda * eps;
  const double b = ld * std::log1p(-eps) + lambda * eps;
  return 0.5 * (std::expm1(a) + std::expm1(b));
}

void CheckMiArgs(double lambda, double eps, const char* who) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument(std::string(who) + ": rate must be positive");
  }
  if (!(std::abs(eps) < 1.0)) {
    throw std::invalid_argument(std::string(who) + ": |eps| must be below 1");
  }
}

// Tail sum_{l > cap} of a cell law, summed directly.
double CellTail(int cap, double lambda, double eps, bool perturbed) {
  double s = 0.0;
  const double mu_max = lambda * (1.0 + std::abs(eps));
  for (std::int64_t l = cap + 1; l < 100000; ++l) {
    const double p0 = std::exp(LogPoisson(l, lambda));
    const double t = perturbed ? p0 * (1.0 + MixtureExcess(l, lambda, eps)) : p0;
    s += t;
    if (l > 10.0 * mu_max + 50.0 && t < 1e-30 * std::max(s, 1e-300)) break;
  }
  return s;
}

// Exact enumeration for rows of `cells` counts: with probability w every
// cell is Poi(heavy_rate), otherwise cells are i.i.d. Poi(lambda) (X = 0)
// or perturbed (X = 1).
MIEstimate EnumerateRows(double w, double heavy_rate, double lambda, double eps,
                         std::size_t cells, int cap) {
  const int width = cap + 1;
  std::vector<double> log_l0(width), log1p_g(width), log_h(width);
  for (int l = 0; l < width; ++l) {
    log_l0[l] = LogPoisson(l, lambda);
    log1p_g[l] = std::log1p(MixtureExcess(l, lambda, eps));
    log_h[l] = w > 0.0 ? LogPoisson(l, heavy_rate) : 0.0;
  }
  std::size_t total = 1;
  for (std::size_t c = 0; c < cells; ++c) total *= static_cast<std::size_t>(width);

  MIEstimate est;
  est.method = "exact-enumeration";
  double sum = 0.0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx;
    double ll0 = 0.0, lg = 0.0, lh = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      const int l = static_cast<int>(r % static_cast<std::size_t>(width));
      r /= static_cast<std::size_t>(width);
      ll0 += log_l0[l];
      lg += log1p_g[l];
      lh += log_h[l];
    }
    const double l0 = std::exp(ll0);
    const double heavy = w > 0.0 ? w * std::exp(lh) : 0.0;
    const double d = (1.0 - w) * l0 * std::expm1(lg);
    sum += MiSummand(heavy + (1.0 - w) * l0, d);
  }
  est.value = std::max(0.0, sum);
  est.terms = static_cast<std::int64_t>(total);

  // Excluded rows: the summand is at most |d|/2, and |d| <= (1-w)(L0 + L1).
  const double cd = static_cast<double>(cells);
  const double t0 = CellTail(cap, lambda, eps, false);
  const double t1 = CellTail(cap, lambda, eps, true);
  double bound = 0.5 * (1.0 - w) * cd * (t0 + t1);
  if (w > 0.0) {
    // Sharper: the summand is at most d^2 / (4 M) <= d^2 / (4 w H), and
    // (L0^2 + L1^2) / H factorizes over cells.
    double tail[2] = {0.0, 0.0}, all[2] = {0.0, 0.0};
    for (int x = 0; x < 2; ++x) {
      for (std::int64_t l = 0; l < 100000; ++l) {
        const double p0 = std::exp(LogPoisson(l, lambda));
        const double px = x == 0 ? p0 : p0 * (1.0 + MixtureExcess(l, lambda, eps));
        const double f = std::exp(2.0 * std::log(px) - LogPoisson(l, heavy_rate));
        all[x] += f;
        if (l > cap) tail[x] += f;
        if (l > cap && l > 10.0 * (lambda + heavy_rate) + 50.0 &&
            f < 1e-30 * std::max(all[x], 1e-300)) {
          break;
        }
      }
    }
    double sharp = 0.0;
    for (int x = 0; x < 2; ++x) sharp += cd * tail[x] * std::pow(all[x], cd - 1.0);
    sharp *= (1.0 - w) * (1.0 - w) / (4.0 * w);
    bound = std::min(bound, sharp);
  }
  est.truncation_error_bound = bound;
  return est;
}

}  // namespace

MIEstimate MiPerBin(double k, double n, double m, double eps, std::int64_t max_terms) {
  const double lambda = k / (n * m);
  CheckMiArgs(lambda, eps, "mi_per_bin");
  if (max_terms < 1) throw std::invalid_argument("mi_per_bin: max_terms must be positive");
  const double mu_max = lambda * (1.0 + std::abs(eps));
  MIEstimate est;
  est.method = "exact-series";
  double sum = 0.0;
  std::int64_t l = 0;
  double p0 = 0.0, p1 = 0.0;
  for (; l < max_terms; ++l) {
    p0 = std::exp(LogPoisson(l, lambda));
    const double d = p0 * MixtureExcess(l, lambda, eps);
    p1 = p0 + d;
    sum += MiSummand(p0, d);
    if (std::max(p0, p1) < 1e-18 && static_cast<double>(l) > 10.0 * lambda + 50.0) {
      ++l;
      break;
    }
  }
  est.value = std::max(0.0, sum);
  est.terms = l;
  // Beyond the last term every pmf ratio is at most r; the summand is at
  // most (P0 + P1) log(2) / 2.
  const double r = mu_max / static_cast<double>(l);
  est.truncation_error_bound =
      r < 1.0 ? 0.5 * std::log(2.0) * (p0 + p1) * r / (1.0 - r) : std::log(2.0);
  return est;
}

MIEstimate MiHeavyLightRow(double k, std::size_t n, std::size_t m, double eps,
                           int count_cap) {
  if (m == 0 || m > 4) throw std::invalid_argument("mi_heavy_light_row: need 1 <= m <= 4");
  if (count_cap < 0 || count_cap > kMaxCountCap) {
    throw std::invalid_argument("mi_heavy_light_row: need 0 <= count_cap <= 40");
  }
  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  if (!(k > 0.0 && 2.0 * k <= nd)) {
    throw std::invalid_argument("mi_heavy_light_row: need 0 < k <= n/2");
  }
  const double lambda = k / (nd * md);
  CheckMiArgs(lambda, eps, "mi_heavy_light_row");
  if (count_cap > 0) return EnumerateRows(k / nd, 1.0 / md, lambda, eps, m, count_cap);
  MIEstimate est;
  for (int cap = 8; cap <= kMaxCountCap; cap += 4) {
    est = EnumerateRows(k / nd, 1.0 / md, lambda, eps, m, cap);
    if (est.truncation_error_bound < std::max(1e-9 * est.value, 1e-15)) break;
  }
  return est;
}

MIEstimate MiJointCells(double k, double n, double m, double eps, std::size_t bins,
                        int count_cap) {
  if (bins == 0 || bins > 4) throw std::invalid_argument("mi_joint_cells: need 1 <= bins <= 4");
  if (count_cap < 1 || count_cap > kMaxCountCap) {
    throw std::invalid_argument("mi_joint_cells: need 1 <= count_cap <= 40");
  }
  const double lambda = k / (n * m);
  CheckMiArgs(lambda, eps, "mi_joint_cells");
  return EnumerateRows(0.0, 0.0, lambda, eps, bins, count_cap);
}

}  // namespace disttest
