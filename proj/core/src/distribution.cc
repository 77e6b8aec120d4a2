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

#include "disttest/distribution.h"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

namespace disttest {
namespace {

void CheckNonNegative(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) +
                                  ": entries must be finite and >= 0");
    }
  }
}

void CheckSameSize(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DimensionMismatch("domain sizes differ: " + std::to_string(a) +
                            " vs " + std::to_string(b));
  }
}

double Sum(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

PseudoDistribution::PseudoDistribution(std::vector<double> mass)
    : mass_(std::move(mass)) {
  CheckNonNegative(mass_, "PseudoDistribution");
  total_ = Sum(mass_);
}

PseudoDistribution PseudoDistribution::Scaled(double c) const {
  std::vector<double> out(mass_);
  for (double& x : out) x *= c;
  return PseudoDistribution(std::move(out));
}

ExplicitDistribution::ExplicitDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw std::invalid_argument("ExplicitDistribution: empty domain");
  }
  CheckNonNegative(probs_, "ExplicitDistribution");
  const double s = Sum(probs_);
  if (s < 0.5 || s > 2.0) {
    throw std::invalid_argument("ExplicitDistribution: sum " +
                                std::to_string(s) + " outside [0.5, 2]");
  }
  // Values already within tolerance are kept as-is so text round-trips are
  // bit-stable.
  if (std::fabs(s - 1.0) > kSumTolerance) {
    for (double& x : probs_) x /= s;
  }
}

ExplicitDistribution ExplicitDistribution::Uniform(std::size_t n) {
  return ExplicitDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ExplicitDistribution ExplicitDistribution::PointMass(std::size_t n,
                                                     std::size_t bin) {
  std::vector<double> p(n, 0.0);
  p.at(bin) = 1.0;
  return ExplicitDistribution(std::move(p));
}

ExplicitDistribution ExplicitDistribution::Normalized(
    const PseudoDistribution& mass) {
  if (!(mass.total() > 0.0)) {
    throw std::invalid_argument("Normalized: zero total mass");
  }
  std::vector<double> p(mass.mass().begin(), mass.mass().end());
  for (double& x : p) x /= mass.total();
  return ExplicitDistribution(std::move(p));
}

CountVector::CountVector(std::vector<std::int64_t> c) : counts(std::move(c)) {
  for (auto x : counts) {
    if (x < 0) throw std::invalid_argument("CountVector: negative count");
    total += x;
  }
}

JointDistribution::JointDistribution(std::vector<std::size_t> dims,
                                     std::vector<double> probs)
    : dims_(std::move(dims)), flat_(std::move(probs)) {
  if (dims_.empty()) throw std::invalid_argument("JointDistribution: no dims");
  std::size_t n = 1;
  for (auto d : dims_) {
    if (d == 0) throw std::invalid_argument("JointDistribution: zero dim");
    n *= d;
  }
  CheckSameSize(n, flat_.size());
}

std::vector<std::size_t> JointDistribution::Unflatten(
    std::size_t flat_index) const {
  std::vector<std::size_t> c(dims_.size());
  for (std::size_t a = dims_.size(); a-- > 0;) {
    c[a] = flat_index % dims_[a];
    flat_index /= dims_[a];
  }
  return c;
}

std::size_t JointDistribution::Flatten(
    std::span<const std::size_t> coords) const {
  CheckSameSize(coords.size(), dims_.size());
  std::size_t idx = 0;
  for (std::size_t a = 0; a < dims_.size(); ++a) idx = idx * dims_[a] + coords[a];
  return idx;
}

ExplicitDistribution JointDistribution::Marginal(std::size_t axis) const {
  std::vector<double> m(dims_.at(axis), 0.0);
  for (std::size_t i = 0; i < flat_.size(); ++i) {
    m[Unflatten(i)[axis]] += flat_[i];
  }
  return ExplicitDistribution(std::move(m));
}

JointDistribution JointDistribution::ProductOfMarginals() const {
  std::vector<ExplicitDistribution> marg;
  for (std::size_t a = 0; a < dims_.size(); ++a) marg.push_back(Marginal(a));
  std::vector<double> p(flat_.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto c = Unflatten(i);
    double v = 1.0;
    for (std::size_t a = 0; a < c.size(); ++a) v *= marg[a][c[a]];
    p[i] = v;
  }
  return JointDistribution(dims_, std::move(p));
}

AliasTable::AliasTable(std::span<const double> weights)
    : prob_(weights.size()), alias_(weights.size()) {
  const std::size_t n = weights.size();
  if (n == 0) throw std::invalid_argument("AliasTable: empty");
  const double total = Sum(weights);
  if (!(total > 0.0)) throw std::invalid_argument("AliasTable: zero mass");
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto l : large) {
    prob_[l] = 1.0;
    alias_[l] = l;
  }
  // Leftovers from round-off. A zero-weight bin must never be drawn, so it
  // is redirected to itself only if it has weight.
  for (auto s : small) {
    prob_[s] = 1.0;
    alias_[s] = s;
    if (weights[s] == 0.0) {
      for (std::size_t j = 0; j < n; ++j) {
        if (weights[j] > 0.0) {
          prob_[s] = 0.0;
          alias_[s] = static_cast<std::uint32_t>(j);
          break;
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] == 0.0) prob_[i] = 0.0;
  }
}

std::size_t AliasTable::Sample(Rng& rng) const {
  const std::size_t column = rng.UniformInt(prob_.size());
  return rng.Uniform() < prob_[column] ? column : alias_[column];
}

std::size_t Sample(const ExplicitDistribution& dist, Rng& rng) {
  // One-off draws use inversion; repeated draws should build an AliasTable.
  const double u = rng.Uniform();
  double cdf = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] > 0.0) last_positive = i;
    cdf += dist[i];
    if (u < cdf && dist[i] > 0.0) return i;
  }
  return last_positive;
}

CountVector PoissonizedCounts(const ExplicitDistribution& dist, double k,
                              Rng& rng) {
  if (!(k > 0.0)) throw std::invalid_argument("PoissonizedCounts: k must be > 0");
  CountVector out(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] > 0.0) out.Add(i, rng.Poisson(k * dist[i]));
  }
  return out;
}

double L1Distance(std::span<const double> p, std::span<const double> q) {
  CheckSameSize(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
  return s;
}

double L1Distance(const PseudoDistribution& p, const PseudoDistribution& q) {
  return L1Distance(p.mass(), q.mass());
}

double L1Distance(const ExplicitDistribution& p,
                  const ExplicitDistribution& q) {
  return L1Distance(p.probs(), q.probs());
}

double L2Distance(std::span<const double> p, std::span<const double> q) {
  CheckSameSize(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
  return std::sqrt(s);
}

double L2Norm(std::span<const double> p) {
  double s = 0.0;
  for (double x : p) s += x * x;
  return std::sqrt(s);
}

double L2Norm(const PseudoDistribution& p) { return L2Norm(p.mass()); }

double L23Quasinorm(const ExplicitDistribution& q) {
  double s = 0.0;
  for (double x : q.probs()) s += std::cbrt(x * x);
  return s * std::sqrt(s);
}

double HellingerSq(std::span<const double> p, std::span<const double> q) {
  CheckSameSize(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    s += d * d;
  }
  return 0.5 * s;
}

double HellingerSq(const ExplicitDistribution& p,
                   const ExplicitDistribution& q) {
  return HellingerSq(p.probs(), q.probs());
}

double ChiSq(std::span<const double> p, std::span<const double> q) {
  CheckSameSize(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] == 0.0) {
      if (p[i] > 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    const double d = p[i] - q[i];
    s += d * d / q[i];
  }
  return s;
}

double ChiSq(const ExplicitDistribution& p, const ExplicitDistribution& q) {
  return ChiSq(p.probs(), q.probs());
}

PseudoDistribution Restrict(const ExplicitDistribution& p,
                            std::span<const std::size_t> subset) {
  std::vector<double> m(p.size(), 0.0);
  for (auto i : subset) m.at(i) = p[i];
  return PseudoDistribution(std::move(m));
}

ExplicitDistribution Condition(const ExplicitDistribution& p,
                               std::span<const std::size_t> subset) {
  std::vector<double> m;
  m.reserve(subset.size());
  double total = 0.0;
  for (auto i : subset) {
    m.push_back(p.probs()[i]);
    total += p.probs()[i];
  }
  if (!(total > 0.0)) {
    throw std::domain_error("Condition: subset has zero probability");
  }
  for (double& x : m) x /= total;
  return ExplicitDistribution(std::move(m));
}

std::string FormatDouble(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void WriteDistribution(std::ostream& os, const ExplicitDistribution& dist) {
  os << dist.size() << '\n';
  for (double x : dist.probs()) os << FormatDouble(x) << '\n';
}

namespace {

std::vector<double> ReadValues(std::istream& is, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string tok;
    if (!(is >> tok)) {
      throw std::runtime_error("distribution file: expected " +
                               std::to_string(n) + " values, got " +
                               std::to_string(i));
    }
    try {
      std::size_t used = 0;
      v[i] = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw std::runtime_error("distribution file: bad value '" + tok + "'");
    }
  }
  return v;
}

}  // namespace

ExplicitDistribution ReadDistribution(std::istream& is) {
  long long n = 0;
  if (!(is >> n) || n <= 0) {
    throw std::runtime_error("distribution file: bad domain size header");
  }
  return ExplicitDistribution(ReadValues(is, static_cast<std::size_t>(n)));
}

void WriteJoint(std::ostream& os, const JointDistribution& joint) {
  os << joint.rank();
  for (auto d : joint.dims()) os << ' ' << d;
  os << '\n';
  for (double x : joint.flat().probs()) os << FormatDouble(x) << '\n';
}

JointDistribution ReadJoint(std::istream& is) {
  long long d = 0;
  if (!(is >> d) || d <= 0) {
    throw std::runtime_error("joint file: bad rank header");
  }
  std::vector<std::size_t> dims(static_cast<std::size_t>(d));
  std::size_t total = 1;
  for (auto& x : dims) {
    long long v = 0;
    if (!(is >> v) || v <= 0) throw std::runtime_error("joint file: bad dim");
    x = static_cast<std::size_t>(v);
    total *= x;
  }
  return JointDistribution(std::move(dims), ReadValues(is, total));
}

}  // namespace disttest
