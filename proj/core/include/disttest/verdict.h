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

#ifndef DISTTEST_VERDICT_H_
#define DISTTEST_VERDICT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace disttest {

enum class Answer { kYes, kNo };

inline const char* AnswerName(Answer a) { return a == Answer::kYes ? "YES" : "NO"; }

struct StageRecord {
  std::string stage;
  std::vector<std::pair<std::string, double>> values;
  std::optional<Answer> verdict;

  StageRecord& Set(std::string key, double value) {
    values.emplace_back(std::move(key), value);
    return *this;
  }
  double Get(const std::string& key) const;
};

struct TestVerdict {
  Answer answer = Answer::kYes;
  // Draws from each base oracle, in the order the tester names them.
  std::vector<std::pair<std::string, std::uint64_t>> samples_used;
  std::vector<StageRecord> trace;

  bool yes() const { return answer == Answer::kYes; }
  std::uint64_t TotalSamples() const;
  std::uint64_t SamplesFrom(const std::string& oracle) const;
  // First stage record with this name, or nullptr.
  const StageRecord* FindStage(const std::string& stage) const;
  StageRecord& AddStage(std::string stage) {
    trace.push_back(StageRecord{std::move(stage), {}, std::nullopt});
    return trace.back();
  }
  // Appends a sub-verdict's trace, prefixing stage names.
  void AppendTrace(const TestVerdict& sub, const std::string& prefix);
};

}  // namespace disttest

#endif  // DISTTEST_VERDICT_H_
