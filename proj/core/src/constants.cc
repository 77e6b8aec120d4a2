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

#include "disttest/constants.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace disttest {
namespace {

using nlohmann::json;

// Field table shared by the JSON reader and writer.
struct Field {
  const char* name;
  double TesterConstants::*ptr;
};

constexpr Field kFields[] = {
    {"c_sample", &TesterConstants::c_sample},
    {"c_thresh", &TesterConstants::c_thresh},
    {"c_norm", &TesterConstants::c_norm},
    {"c_mass", &TesterConstants::c_mass},
    {"c_adaptive", &TesterConstants::c_adaptive},
    {"c_adaptive_eps", &TesterConstants::c_adaptive_eps},
    {"c_allow", &TesterConstants::c_allow},
    {"c_hellinger", &TesterConstants::c_hellinger},
    {"c_hell_cat", &TesterConstants::c_hell_cat},
    {"c_query", &TesterConstants::c_query},
    {"polylog_exponent", &TesterConstants::polylog_exponent},
    {"budget_scale", &TesterConstants::budget_scale},
};

// Calibrated l2-stage sample constants, one per tester.
const std::map<std::string, double, std::less<>>& CalibratedCSample() {
  static const auto* table = new std::map<std::string, double, std::less<>>{
      {"identity_known", 1.0},
      {"closeness_equal", 1.0},
      {"closeness_unequal", 1.4142135623730951},
      {"identity_instance_optimal", 0.0625},
      {"closeness_adaptive", 0.08838834764831845},
      {"hellinger_closeness", 0.5},
      {"independence_2d", 0.7071067811865476},
      {"independence_dd", 0.7071067811865476},
      {"collection_sampling", 1.0},
      {"collection_query", 0.7071067811865476},
      {"k_histogram", 0.7071067811865476},
  };
  return *table;
}

}  // namespace

L2TestConfig TesterConstants::L2Config(double eps, double b,
                                       double fail_prob) const {
  L2TestConfig cfg;
  cfg.epsilon = eps;
  cfg.b = b;
  cfg.fail_prob = fail_prob;
  cfg.c_sample = EffectiveCSample();
  cfg.c_thresh = c_thresh;
  cfg.c_norm = c_norm * budget_scale;
  return cfg;
}

void TesterConstants::Validate() const {
  for (const auto& f : kFields) {
    if (!(this->*f.ptr > 0.0)) {
      throw std::invalid_argument(std::string("constant ") + f.name +
                                  " must be > 0");
    }
  }
}

const std::vector<std::string>& TesterIds() {
  static const auto* ids = [] {
    auto* v = new std::vector<std::string>;
    for (const auto& [id, c] : CalibratedCSample()) v->push_back(id);
    return v;
  }();
  return *ids;
}

TesterConstants DefaultConstants(std::string_view tester) {
  const auto& table = CalibratedCSample();
  const auto it = table.find(tester);
  if (it == table.end()) {
    throw std::out_of_range("unknown tester id: " + std::string(tester));
  }
  TesterConstants c;
  c.c_sample = it->second;
  return c;
}

ConstantSet DefaultConstantSet() {
  ConstantSet set;
  for (const auto& id : TesterIds()) set[id] = DefaultConstants(id);
  return set;
}

std::string ConstantSetToJson(const ConstantSet& set) {
  json j = json::object();
  for (const auto& [id, c] : set) {
    json entry = json::object();
    for (const auto& f : kFields) entry[f.name] = c.*f.ptr;
    j[id] = entry;
  }
  return j.dump(2);
}

ConstantSet ConstantSetFromJson(const std::string& text) {
  const json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("constants: expected object");
  ConstantSet set = DefaultConstantSet();
  for (const auto& [id, entry] : j.items()) {
    TesterConstants c = set.count(id) ? set[id] : TesterConstants{};
    for (const auto& f : kFields) {
      if (entry.contains(f.name)) c.*f.ptr = entry.at(f.name).get<double>();
    }
    c.Validate();
    set[id] = c;
  }
  return set;
}

void SaveConstantSet(const std::string& path, const ConstantSet& set) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << ConstantSetToJson(set) << "\n";
}

ConstantSet LoadConstantSet(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ConstantSetFromJson(ss.str());
}

}  // namespace disttest
