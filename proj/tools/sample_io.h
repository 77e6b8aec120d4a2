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

// Sample files: one sample per line, each a tuple of 1-based ASCII decimal
// indices separated by blanks. Plain samples have arity 1, joint samples
// `i j`, collection samples `dist_index bin`. Values are 0-based in memory.

#ifndef DISTTEST_TOOLS_SAMPLE_IO_H_
#define DISTTEST_TOOLS_SAMPLE_IO_H_

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace disttest::cli {

class SampleFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads tuples of arity bounds.size(); coordinate t must lie in
// [1, bounds[t]]. Returns the 0-based tuples concatenated. Blank lines are
// skipped. Throws SampleFileError naming `source` and the line.
std::vector<std::size_t> ReadSampleTuples(std::istream& is,
                                          std::span<const std::size_t> bounds,
                                          const std::string& source);

// Writes 0-based tuples of the given arity as 1-based lines.
void WriteSampleTuples(std::ostream& os, std::span<const std::size_t> flat,
                       std::size_t arity);

// Row-major flat index of each tuple.
std::vector<std::size_t> FlattenTuples(std::span<const std::size_t> tuples,
                                       std::span<const std::size_t> dims);

}  // namespace disttest::cli

#endif  // DISTTEST_TOOLS_SAMPLE_IO_H_
