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

#include "sample_io.h"

#include <charconv>
#include <sstream>

namespace disttest::cli {

std::vector<std::size_t> ReadSampleTuples(std::istream& is,
                                          std::span<const std::size_t> bounds,
                                          const std::string& source) {
  std::vector<std::size_t> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string tok;
    std::size_t t = 0;
    auto fail = [&](const std::string& what) {
      throw SampleFileError(source + ":" + std::to_string(lineno) + ": " + what);
    };
    while (fields >> tok) {
      if (t == bounds.size()) fail("expected " + std::to_string(bounds.size()) + " field(s)");
      unsigned long long v = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        fail("not a decimal index: '" + tok + "'");
      }
      if (v < 1 || v > bounds[t]) {
        fail("index " + tok + " outside [1, " + std::to_string(bounds[t]) + "]");
      }
      out.push_back(static_cast<std::size_t>(v - 1));
      ++t;
    }
    if (t != bounds.size()) fail("expected " + std::to_string(bounds.size()) + " field(s)");
  }
  if (is.bad()) throw SampleFileError(source + ": read error");
  return out;
}

void WriteSampleTuples(std::ostream& os, std::span<const std::size_t> flat,
                       std::size_t arity) {
  for (std::size_t i = 0; i < flat.size(); ++i) {
    os << flat[i] + 1 << ((i + 1) % arity == 0 ? '\n' : ' ');
  }
}

std::vector<std::size_t> FlattenTuples(std::span<const std::size_t> tuples,
                                       std::span<const std::size_t> dims) {
  std::vector<std::size_t> out;
  out.reserve(tuples.size() / dims.size());
  for (std::size_t i = 0; i < tuples.size(); i += dims.size()) {
    std::size_t idx = 0;
    for (std::size_t t = 0; t < dims.size(); ++t) idx = idx * dims[t] + tuples[i + t];
    out.push_back(idx);
  }
  return out;
}

}  // namespace disttest::cli
