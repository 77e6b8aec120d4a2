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

// Tunable constants of the testers. The asymptotic analysis only fixes
// orders of growth; the values here come from the calibration harness.

#ifndef DISTTEST_CONSTANTS_H_
#define DISTTEST_CONSTANTS_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "disttest/l2_engine.h"

namespace disttest {

struct TesterConstants {
  // l2 stage: m = c_sample * b * n / eps^2.
  double c_sample = 1.0;
  double c_thresh = 1.0;
  double c_norm = kDefaultCNorm;
  // Hoeffding multiplier for the per-level mass check of the instance
  // optimal identity tester.
  double c_mass = 1.0;
  // Closeness-adaptive: stage-1 draws C m ln^2 n, the eps / C divisor, and
  // the per-round allowance c_allow * m * ln^3(n/eps).
  double c_adaptive = 1.0;
  double c_adaptive_eps = 4.0;
  double c_allow = 1.0;
  // Hellinger: per-category share eps / (C ln m), and the category
  // marginal l1 check at eps / c_hell_cat.
  double c_hellinger = 1.0;
  double c_hell_cat = 4.0;
  // Collection query model: picks per level ceil(2^{5k/4} C).
  double c_query = 1.0;
  // Exponent of the log factor used where only "polylog" is known.
  double polylog_exponent = 2.0;
  // Multiplies c_sample and c_norm; the harness sweeps this to trace power
  // curves.
  double budget_scale = 1.0;

  double EffectiveCSample() const { return c_sample * budget_scale; }
  L2TestConfig L2Config(double eps, double b, double fail_prob = 1.0 / 3.0) const;
  // Throws std::invalid_argument on a non-positive field.
  void Validate() const;
};

// Every tester id understood by DefaultConstants and the harness.
const std::vector<std::string>& TesterIds();

// Calibrated defaults for a tester id; unknown ids throw std::out_of_range.
TesterConstants DefaultConstants(std::string_view tester);

using ConstantSet = std::map<std::string, TesterConstants>;

// The compiled-in defaults for all testers.
ConstantSet DefaultConstantSet();

std::string ConstantSetToJson(const ConstantSet& set);
// Fields missing from the JSON keep their compiled-in defaults.
ConstantSet ConstantSetFromJson(const std::string& json);
void SaveConstantSet(const std::string& path, const ConstantSet& set);
ConstantSet LoadConstantSet(const std::string& path);

}  // namespace disttest

#endif  // DISTTEST_CONSTANTS_H_
