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

// Monte Carlo experiment engine: power sweeps, budget exponent fits and
// constant calibration.
//
// Seeding. For master seed s, trial t of label L (0 = YES, 1 = NO) in grid
// cell c uses Rng(s).Split(c).Split(L).Split(t). Cells are numbered in the
// order of ExperimentSpec::Cells(). The instance and the tester share that
// one stream, so every trial is reproducible on its own.

#ifndef DISTTEST_HARNESS_H_
#define DISTTEST_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "disttest/constants.h"
#include "disttest/distribution.h"
#include "disttest/rng.h"
#include "disttest/verdict.h"

namespace disttest {

inline constexpr std::uint64_t kDefaultSeed = 20260101;

struct CellParams {
  std::size_t n = 0;
  std::size_t m = 0;  // second dimension, collection size, or m1
  std::size_t k = 0;  // heavy count, interval count
  double eps = 0.0;
  double budget = 1.0;  // multiplier on c_sample
};

struct ExperimentSpec {
  std::string tester;
  std::string family;
  std::vector<std::size_t> n_values;
  std::vector<std::size_t> m_values{0};
  std::vector<std::size_t> k_values{0};
  std::vector<double> eps_values;
  std::vector<double> budget_multipliers{1.0};
  int trials = 100;
  std::uint64_t seed = kDefaultSeed;
  // Unset: DefaultConstants(tester).
  std::optional<TesterConstants> constants;
  // 0: hardware concurrency.
  int threads = 0;

  // Throws std::invalid_argument on trials < 1, an empty grid or unknown
  // tester/family ids.
  void Validate() const;
  // Cartesian product in n, m, k, eps, budget order (budget fastest).
  std::vector<CellParams> Cells() const;
  TesterConstants ResolvedConstants() const;
};

struct RateEstimate {
  int successes = 0;
  int trials = 0;
  double rate = 0.0;
  double low = 0.0;   // Wilson 95% interval
  double high = 0.0;
  double HalfWidth() const { return 0.5 * (high - low); }
};

// Wilson score interval; z = 1.96 gives 95%.
RateEstimate WilsonInterval(int successes, int trials,
                            double z = 1.959963984540054);

struct PowerCell {
  CellParams params;
  int trials = 0;
  RateEstimate yes_accept;
  RateEstimate no_reject;
  double mean_samples = 0.0;  // over YES and NO trials together
  double median_samples = 0.0;
  // NO instances whose farness certificate fell below the family threshold.
  int uncertified = 0;

  double MinAccuracy() const {
    return yes_accept.rate < no_reject.rate ? yes_accept.rate : no_reject.rate;
  }
};

struct TrialOutcome {
  Answer answer = Answer::kYes;
  std::uint64_t samples = 0;
  bool certified = true;
};

// Uniform on [n] with bin 0 raised so that chi^2 against uniform is chi2.
ExplicitDistribution SingleBinTilt(std::size_t n, double chi2);

// One draw of an instance family. Single-distribution families fill p
// (sampled) and q (reference); "collection" fills collection.
struct FamilyInstance {
  std::optional<ExplicitDistribution> p;
  std::optional<ExplicitDistribution> q;
  std::vector<ExplicitDistribution> collection;
  std::vector<std::size_t> dims;
  // False for NO draws below the family's farness threshold.
  bool certified = true;
};

// Throws std::invalid_argument on an unknown id or invalid parameters.
FamilyInstance DrawInstance(const std::string& family, const CellParams& cell,
                            Answer label, Rng& rng);

// Ids accepted by ExperimentSpec.
const std::vector<std::string>& HarnessTesterIds();
const std::vector<std::string>& FamilyIds();

// One trial: draws a `label` instance of `family` at `cell` and runs the
// tester on it. Throws std::invalid_argument on unknown or incompatible ids.
TrialOutcome RunTrial(const std::string& tester, const std::string& family,
                      const CellParams& cell, Answer label,
                      const TesterConstants& constants, Rng& rng);

std::vector<PowerCell> RunPowerSweep(const ExperimentSpec& spec);

// CSV columns, in order:
//   tester,family,n,m,k,eps,budget,trials,
//   yes_accept_rate,yes_ci_low,yes_ci_high,
//   no_reject_rate,no_ci_low,no_ci_high,
//   mean_samples,median_samples,uncertified
// Numbers are printed round-trip exact.
std::string PowerCsvHeader();
void WritePowerCsv(std::ostream& os, const ExperimentSpec& spec,
                   const std::vector<PowerCell>& cells);

// 64-bit FNV-1a, hex encoded.
std::string Fnv1aHex(const std::string& bytes);

// JSON manifest: the spec, master seed, code version and the hash of the
// constants JSON used.
void WriteManifest(std::ostream& os, const ExperimentSpec& spec);

std::string CodeVersion();

struct FitSpec {
  std::string tester;
  std::string family;
  double eps = 0.5;
  std::vector<std::size_t> n_grid;
  // m = round(n^m_exponent) when positive, else m_fixed.
  double m_exponent = 0.0;
  std::size_t m_fixed = 0;
  std::size_t k = 0;
  double target_accuracy = 0.75;
  int trials = 200;
  std::uint64_t seed = kDefaultSeed;
  std::optional<TesterConstants> constants;
  int threads = 0;
};

struct FitPoint {
  std::size_t n = 0;
  std::size_t m = 0;
  // Budget multiplier and mean samples used where the accuracy crosses the
  // target, interpolated inside the final 2^{1/4} step.
  double multiplier = 0.0;
  double budget = 0.0;
  double accuracy = 0.0;
  bool reached = false;     // target met inside the search range
};

struct ExponentFit {
  double exponent = 0.0;
  double intercept = 0.0;
  // Root-mean-square residual of the log-log fit.
  double residual = 0.0;
  std::vector<FitPoint> points;
};

// Multiplier search over 2^{j/4}, j in [-16, 32]: factor-2 bracketing from
// 1, then bisection, at most 12 evaluations per n (the bracket may use more);
// accuracy is min(YES rate, NO rate). Then least squares
// of log(budget) on log(n).
ExponentFit FitComplexityExponent(const FitSpec& spec);

// Least squares y = a + b x; returns {b, a, rms residual}.
ExponentFit FitLogLog(const std::vector<double>& x, const std::vector<double>& y);

inline constexpr double kCalibrationTarget = 0.67;

// The cells a tester is calibrated and battery-tested on.
std::vector<ExperimentSpec> CanonicalGrid(const std::string& tester,
                                          int trials, std::uint64_t seed);

struct CalibrationStep {
  double c_sample = 0.0;
  double min_accuracy = 0.0;  // over all canonical cells
};

struct CalibrationResult {
  std::string tester;
  bool found = false;
  double c_sample = 0.0;
  std::vector<CalibrationStep> steps;
};

// Grid c_sample = sqrt(2)^i for i in [kCalibrationGridLow,
// kCalibrationGridHigh], i.e. 1/16 to 64; returns the first value whose
// canonical cells all reach kCalibrationTarget on both sides, or
// found = false after the whole grid.
inline constexpr int kCalibrationGridLow = -8;
inline constexpr int kCalibrationGridHigh = 12;

CalibrationResult CalibrateConstants(const std::string& tester, int trials,
                                     std::uint64_t seed, int threads = 0);

// Applies found results on top of `base`.
ConstantSet ApplyCalibration(ConstantSet base,
                             const std::vector<CalibrationResult>& results);

}  // namespace disttest

#endif  // DISTTEST_HARNESS_H_
