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

#include "disttest/verdict.h"

#include <stdexcept>

namespace disttest {

double StageRecord::Get(const std::string& key) const {
  for (const auto& [k, v] : values) {
    if (k == key) return v;
  }
  throw std::out_of_range("stage '" + stage + "' has no value '" + key + "'");
}

std::uint64_t TestVerdict::TotalSamples() const {
  std::uint64_t s = 0;
  for (const auto& [name, count] : samples_used) s += count;
  return s;
}

std::uint64_t TestVerdict::SamplesFrom(const std::string& oracle) const {
  for (const auto& [name, count] : samples_used) {
    if (name == oracle) return count;
  }
  return 0;
}

const StageRecord* TestVerdict::FindStage(const std::string& stage) const {
  for (const auto& s : trace) {
    if (s.stage == stage) return &s;
  }
  return nullptr;
}

void TestVerdict::AppendTrace(const TestVerdict& sub, const std::string& prefix) {
  for (auto s : sub.trace) {
    s.stage = prefix + s.stage;
    trace.push_back(std::move(s));
  }
}

}  // namespace disttest
