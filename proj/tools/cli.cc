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

#include "cli.h"

#include <algorithm>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "disttest/constants.h"
#include "disttest/distribution.h"
#include "disttest/hard_instances.h"
#include "disttest/harness.h"
#include "disttest/oracle.h"
#include "disttest/testers.h"
#include "json.hpp"
#include "sample_io.h"

namespace disttest::cli {
namespace {

using ojson = nlohmann::ordered_json;

// Bad flags or inputs detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ifstream OpenIn(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  return in;
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  return out;
}

ExplicitDistribution ReadDistributionFile(const std::string& path) {
  auto in = OpenIn(path);
  try {
    return ReadDistribution(in);
  } catch (const std::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

std::vector<std::size_t> ReadSamples(const std::string& path,
                                     const std::vector<std::size_t>& bounds) {
  auto in = OpenIn(path);
  return ReadSampleTuples(in, bounds, path);
}

TesterConstants ResolveConstants(const std::string& path, const std::string& tester) {
  if (path.empty()) return DefaultConstants(tester);
  const ConstantSet set = LoadConstantSet(path);
  const auto it = set.find(tester);
  return it == set.end() ? DefaultConstants(tester) : it->second;
}

ojson VerdictJson(const std::string& tester, const TestVerdict& v, std::uint64_t seed) {
  ojson j;
  j["tester"] = tester;
  j["answer"] = AnswerName(v.answer);
  j["seed"] = seed;
  ojson used = ojson::object();
  for (const auto& [name, count] : v.samples_used) used[name] = count;
  j["samples_used"] = used;
  j["total_samples"] = v.TotalSamples();
  ojson trace = ojson::array();
  for (const auto& st : v.trace) {
    ojson s;
    s["stage"] = st.stage;
    ojson values = ojson::object();
    for (const auto& [key, value] : st.values) values[key] = value;
    s["values"] = values;
    s["verdict"] = st.verdict ? ojson(AnswerName(*st.verdict)) : ojson();
    trace.push_back(s);
  }
  j["trace"] = trace;
  return j;
}

std::vector<double> ProbVector(const ExplicitDistribution& d) {
  return {d.probs().begin(), d.probs().end()};
}

// ---------------------------------------------------------------------------

struct TestArgs {
  std::string tester, samples, samples_q, q_file, marginal_file, constants;
  std::size_t n = 0, m = 0, k = 0;
  std::vector<std::size_t> dims;
  double eps = 0.0, m1 = 0.0;
  std::uint64_t seed = kDefaultSeed;
};

std::size_t Need(std::size_t v, const char* flag, const std::string& tester) {
  if (v == 0) throw UsageError(tester + " needs --" + flag);
  return v;
}

const std::string& NeedPath(const std::string& v, const char* flag, const std::string& tester) {
  if (v.empty()) throw UsageError(tester + " needs --" + flag);
  return v;
}

int CmdTest(const TestArgs& a, std::ostream& out) {
  const auto known = TesterIds();
  if (std::find(known.begin(), known.end(), a.tester) == known.end()) {
    throw UsageError("unknown tester id: " + a.tester);
  }
  const TesterConstants c = ResolveConstants(a.constants, a.tester);
  Rng rng(a.seed);
  const std::string& t = a.tester;
  TestVerdict v;
  if (t == "identity_known" || t == "identity_instance_optimal") {
    const auto q = ReadDistributionFile(NeedPath(a.q_file, "q", t));
    ReplayOracle p(ReadSamples(a.samples, {q.size()}), q.size());
    v = t == "identity_known" ? IdentityKnown(q, p, a.eps, rng, c)
                              : IdentityInstanceOptimal(q, p, a.eps, rng, c);
  } else if (t == "closeness_equal" || t == "closeness_unequal" ||
             t == "closeness_adaptive" || t == "hellinger_closeness") {
    const std::size_t n = Need(a.n, "n", t);
    ReplayOracle p(ReadSamples(a.samples, {n}), n);
    ReplayOracle q(ReadSamples(NeedPath(a.samples_q, "samples-q", t), {n}), n);
    if (t == "closeness_equal") {
      v = ClosenessEqual(p, q, n, a.eps, rng, c);
    } else if (t == "closeness_unequal") {
      if (!(a.m1 >= 1.0)) throw UsageError("closeness_unequal needs --m1 >= 1");
      v = ClosenessUnequal(q, p, n, a.eps, a.m1, rng, c);
    } else if (t == "closeness_adaptive") {
      v = ClosenessAdaptive(p, q, n, a.eps, rng, c);
    } else {
      v = HellingerCloseness(p, q, n, a.eps, rng, c);
    }
  } else if (t == "independence_2d" || t == "collection_sampling") {
    const std::size_t n = Need(a.n, "n", t), m = Need(a.m, "m", t);
    const std::vector<std::size_t> dims{n, m};
    ReplayOracle p(FlattenTuples(ReadSamples(a.samples, dims), dims), n * m);
    if (t == "independence_2d") {
      if (n < m) throw UsageError("independence_2d needs n >= m; swap the columns");
      v = Independence2D(p, n, m, a.eps, rng, c);
    } else {
      const ExplicitDistribution marginal = a.marginal_file.empty()
                                                ? ExplicitDistribution::Uniform(m)
                                                : ReadDistributionFile(a.marginal_file);
      if (marginal.size() != m) throw UsageError("--marginal must have m entries");
      v = CollectionSampling(p, marginal, n, m, a.eps, rng, c);
    }
  } else if (t == "independence_dd") {
    if (a.dims.size() < 2) throw UsageError("independence_dd needs --dims with >= 2 entries");
    std::size_t total = 1;
    for (auto d : a.dims) total *= d;
    ReplayOracle p(FlattenTuples(ReadSamples(a.samples, a.dims), a.dims), total);
    v = IndependenceDD(p, a.dims, a.eps, rng, c);
  } else if (t == "collection_query") {
    const std::size_t n = Need(a.n, "n", t), m = Need(a.m, "m", t);
    const auto tuples = ReadSamples(a.samples, {m, n});
    std::vector<std::vector<std::size_t>> per(m);
    for (std::size_t i = 0; i < tuples.size(); i += 2) per[tuples[i]].push_back(tuples[i + 1]);
    std::vector<std::unique_ptr<ReplayOracle>> oracles;
    std::vector<SampleOracle*> ptrs;
    for (auto& s : per) {
      oracles.push_back(std::make_unique<ReplayOracle>(std::move(s), n));
      ptrs.push_back(oracles.back().get());
    }
    v = CollectionQuery(ptrs, n, a.eps, rng, c);
  } else if (t == "k_histogram") {
    const std::size_t n = Need(a.n, "n", t), k = Need(a.k, "k", t);
    ReplayOracle p(ReadSamples(a.samples, {n}), n);
    v = KHistogram(p, n, IntervalPartition::Equal(n, k), a.eps, rng, c);
  }
  out << VerdictJson(t, v, a.seed).dump(2) << '\n';
  return v.yes() ? kExitYes : kExitNo;
}

// ---------------------------------------------------------------------------

constexpr std::uint64_t kSampleStream = 0x73616d706c6573ULL;

struct HardgenArgs {
  std::string family, label = "no", dist_out, samples_out;
  std::size_t n = 0, m = 0, k = 0, draws = 0;
  double eps = 0.0;
  std::uint64_t seed = kDefaultSeed;
};

// Writes `draws` samples of each distribution in the file format.
void WriteDraws(const HardgenArgs& a, const FamilyInstance& inst, Rng& rng) {
  auto out = OpenOut(a.samples_out);
  if (!inst.collection.empty()) {
    std::vector<std::size_t> flat;
    for (std::size_t i = 0; i < inst.collection.size(); ++i) {
      AliasTable table(inst.collection[i].probs());
      for (std::size_t t = 0; t < a.draws; ++t) {
        flat.push_back(i);
        flat.push_back(table.Sample(rng));
      }
    }
    WriteSampleTuples(out, flat, 2);
    return;
  }
  AliasTable table(inst.p->probs());
  const std::vector<std::size_t>& dims = inst.dims;
  std::vector<std::size_t> flat;
  for (std::size_t t = 0; t < a.draws; ++t) {
    std::size_t x = table.Sample(rng);
    std::vector<std::size_t> tuple(dims.size());
    for (std::size_t d = dims.size(); d-- > 0;) {
      tuple[d] = x % dims[d];
      x /= dims[d];
    }
    flat.insert(flat.end(), tuple.begin(), tuple.end());
  }
  WriteSampleTuples(out, flat, dims.size());
}

int CmdHardgen(const HardgenArgs& a, std::ostream& out) {
  if (a.label != "yes" && a.label != "no") throw UsageError("--label must be yes or no");
  const Answer label = a.label == "yes" ? Answer::kYes : Answer::kNo;
  Rng rng(a.seed);
  ojson j;
  j["family"] = a.family;
  j["label"] = AnswerName(label);
  j["seed"] = a.seed;
  FamilyInstance inst;
  std::optional<HardInstancePair> hard;
  if (a.family == "paninski") {
    // (uniform, perturbed) as returned by the pair generator.
    auto [u, q] = PaninskiPair(Need(a.n, "n", a.family), a.eps, rng);
    inst.p = u;
    inst.q = label == Answer::kYes ? u : q;
    inst.dims = {a.n};
  } else if (a.family == "product_2d") {
    hard = ProductYesNo2D(a.n, a.m, a.eps, rng, label);
  } else if (a.family == "heavy_light_2d") {
    hard = HeavyLightYesNo2D(a.n, a.m, a.k, a.eps, rng, label);
  } else if (a.family == "hellinger") {
    hard = HellingerPair(a.n, a.k, a.eps, rng, label);
  } else if (a.family == "histogram") {
    hard = HistogramHardPair(a.n, a.k, a.eps, rng, label);
  } else {
    const auto& ids = FamilyIds();
    if (std::find(ids.begin(), ids.end(), a.family) == ids.end()) {
      throw UsageError("unknown family id: " + a.family);
    }
    inst = DrawInstance(a.family, CellParams{a.n, a.m, a.k, a.eps, 1.0}, label, rng);
  }
  if (hard) {
    inst.p = hard->Normalized();
    if (hard->second) inst.q = hard->NormalizedSecond();
    inst.dims = hard->dims;
    inst.certified = hard->certified;
    std::ostringstream side;
    WriteSidecar(side, *hard, a.seed);
    j["sidecar"] = ojson::parse(side.str());
  }
  j["dims"] = inst.dims;
  j["certified"] = inst.certified;
  if (inst.p) j["p"] = ProbVector(*inst.p);
  if (inst.q) j["q"] = ProbVector(*inst.q);
  if (inst.p && inst.q) j["l1_distance"] = L1Distance(*inst.p, *inst.q);
  if (!inst.collection.empty()) {
    ojson coll = ojson::array();
    for (const auto& d : inst.collection) coll.push_back(ProbVector(d));
    j["collection"] = coll;
  }
  if (!a.dist_out.empty()) {
    if (!inst.p) throw UsageError("--dist-out needs a single-distribution family");
    auto f = OpenOut(a.dist_out);
    WriteDistribution(f, *inst.p);
    if (inst.q) {
      auto g = OpenOut(a.dist_out + ".q");
      WriteDistribution(g, *inst.q);
    }
  }
  if (!a.samples_out.empty()) {
    if (a.draws == 0) throw UsageError("--samples-out needs --draws");
    // A child stream, so a tester run at the same seed does not replay
    // the draws that produced the file.
    Rng draw_rng = Rng(a.seed).Split(kSampleStream);
    WriteDraws(a, inst, draw_rng);
  }
  out << j.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string tester, family, csv, manifest, constants;
  std::vector<std::size_t> n, m{0}, k{0};
  std::vector<double> eps, budget{1.0};
  int trials = 100, threads = 0;
  std::uint64_t seed = kDefaultSeed;
};

ojson RateJson(const RateEstimate& r) {
  return ojson{{"rate", r.rate}, {"low", r.low}, {"high", r.high}, {"half_width", r.HalfWidth()}};
}

int CmdSweep(const SweepArgs& a, std::ostream& out) {
  ExperimentSpec spec;
  spec.tester = a.tester;
  spec.family = a.family;
  spec.n_values = a.n;
  spec.m_values = a.m;
  spec.k_values = a.k;
  spec.eps_values = a.eps;
  spec.budget_multipliers = a.budget;
  spec.trials = a.trials;
  spec.seed = a.seed;
  spec.threads = a.threads;
  if (!a.constants.empty()) spec.constants = ResolveConstants(a.constants, a.tester);
  spec.Validate();
  const auto cells = RunPowerSweep(spec);
  if (!a.csv.empty()) {
    auto f = OpenOut(a.csv);
    WritePowerCsv(f, spec, cells);
  }
  if (!a.manifest.empty()) {
    auto f = OpenOut(a.manifest);
    WriteManifest(f, spec);
  }
  ojson rows = ojson::array();
  for (const auto& c : cells) {
    rows.push_back(ojson{{"n", c.params.n},
                         {"m", c.params.m},
                         {"k", c.params.k},
                         {"eps", c.params.eps},
                         {"budget", c.params.budget},
                         {"trials", c.trials},
                         {"yes_accept", RateJson(c.yes_accept)},
                         {"no_reject", RateJson(c.no_reject)},
                         {"mean_samples", c.mean_samples},
                         {"median_samples", c.median_samples},
                         {"uncertified", c.uncertified}});
  }
  out << ojson{{"tester", a.tester}, {"family", a.family}, {"seed", a.seed}, {"cells", rows}}
             .dump(2)
      << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct MiArgs {
  bool per_bin = false, heavy_light = false, joint_cells = false;
  double k = 0, n = 0, m = 0, eps = 0;
  std::size_t bins = 2;
  int count_cap = 0;
  std::int64_t max_terms = 100000;
};

int CmdMi(const MiArgs& a, std::ostream& out) {
  if (a.per_bin + a.heavy_light + a.joint_cells != 1) {
    throw UsageError("mi needs exactly one of --per-bin, --heavy-light, --joint-cells");
  }
  MIEstimate est;
  std::string kind;
  if (a.per_bin) {
    kind = "per_bin";
    est = MiPerBin(a.k, a.n, a.m, a.eps, a.max_terms);
  } else if (a.heavy_light) {
    kind = "heavy_light_row";
    est = MiHeavyLightRow(a.k, static_cast<std::size_t>(a.n), static_cast<std::size_t>(a.m),
                          a.eps, a.count_cap);
  } else {
    kind = "joint_cells";
    est = MiJointCells(a.k, a.n, a.m, a.eps, a.bins, a.count_cap > 0 ? a.count_cap : kMaxCountCap);
  }
  out << ojson{{"kind", kind},
               {"k", a.k},
               {"n", a.n},
               {"m", a.m},
               {"eps", a.eps},
               {"value", est.value},
               {"method", est.method},
               {"truncation_error_bound", est.truncation_error_bound},
               {"terms", est.terms}}
             .dump(2)
      << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct CalibrateArgs {
  std::vector<std::string> testers{"all"};
  std::string out_path, base;
  int trials = 500, threads = 0;
  std::uint64_t seed = kDefaultSeed;
};

int CmdCalibrate(const CalibrateArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<std::string> ids = a.testers;
  if (ids.size() == 1 && ids[0] == "all") ids = TesterIds();
  std::vector<CalibrationResult> results;
  ojson rows = ojson::array();
  for (const auto& id : ids) {
    err << "calibrating " << id << "\n";
    results.push_back(CalibrateConstants(id, a.trials, a.seed, a.threads));
    const auto& r = results.back();
    ojson steps = ojson::array();
    for (const auto& s : r.steps) {
      steps.push_back(ojson{{"c_sample", s.c_sample}, {"min_accuracy", s.min_accuracy}});
    }
    rows.push_back(ojson{{"tester", id},
                         {"found", r.found},
                         {"c_sample", r.found ? ojson(r.c_sample) : ojson()},
                         {"steps", steps}});
  }
  const ConstantSet base = a.base.empty() ? DefaultConstantSet() : LoadConstantSet(a.base);
  const ConstantSet set = ApplyCalibration(base, results);
  if (!a.out_path.empty()) SaveConstantSet(a.out_path, set);
  const bool all_found = std::all_of(results.begin(), results.end(),
                                     [](const CalibrationResult& r) { return r.found; });
  out << ojson{{"trials", a.trials},
               {"seed", a.seed},
               {"target", kCalibrationTarget},
               {"results", rows},
               {"all_found", all_found},
               {"constants_hash", Fnv1aHex(ConstantSetToJson(set))}}
             .dump(2)
      << '\n';
  return all_found ? 0 : 1;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distribution property testers on sample files, plus experiment tools."};
  app.name("disttest");
  app.require_subcommand(1);

  TestArgs ta;
  auto* test = app.add_subcommand("test", "Run a tester on sample files (exit 0 YES, 1 NO).");
  test->add_option("--tester", ta.tester, "Tester id")->required();
  test->add_option("--samples", ta.samples, "Sample file of p (1-based)")->required();
  test->add_option("--samples-q", ta.samples_q, "Sample file of q for closeness testers");
  test->add_option("--q", ta.q_file, "Explicit reference distribution file");
  test->add_option("--marginal", ta.marginal_file, "Known second marginal (collection_sampling)");
  test->add_option("--n", ta.n, "Domain size (first dimension)");
  test->add_option("--m", ta.m, "Second dimension or number of distributions");
  test->add_option("--k", ta.k, "Number of equal intervals (k_histogram)");
  test->add_option("--dims", ta.dims, "Dimensions (independence_dd)")->delimiter(',');
  test->add_option("--eps", ta.eps, "Distance parameter")->required();
  test->add_option("--m1", ta.m1, "Budget from q (closeness_unequal)");
  test->add_option("--seed", ta.seed, "Random seed")->capture_default_str();
  test->add_option("--constants", ta.constants, "Constants JSON file");

  HardgenArgs ha;
  auto* hardgen = app.add_subcommand("hardgen", "Draw a hard instance; JSON on stdout.");
  hardgen->add_option("--family", ha.family, "Family id")->required();
  hardgen->add_option("--n", ha.n, "n");
  hardgen->add_option("--m", ha.m, "m");
  hardgen->add_option("--k", ha.k, "k");
  hardgen->add_option("--eps", ha.eps, "eps")->required();
  hardgen->add_option("--label", ha.label, "yes or no")->capture_default_str();
  hardgen->add_option("--seed", ha.seed, "Random seed")->capture_default_str();
  hardgen->add_option("--dist-out", ha.dist_out, "Write p (and q to <path>.q)");
  hardgen->add_option("--draws", ha.draws, "Samples per distribution for --samples-out");
  hardgen->add_option("--samples-out", ha.samples_out, "Write samples of p");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo power sweep.");
  sweep->add_option("--tester", sa.tester, "Tester id")->required();
  sweep->add_option("--family", sa.family, "Instance family id")->required();
  sweep->add_option("--n", sa.n, "n values")->delimiter(',')->required();
  sweep->add_option("--m", sa.m, "m values")->delimiter(',');
  sweep->add_option("--k", sa.k, "k values")->delimiter(',');
  sweep->add_option("--eps", sa.eps, "eps values")->delimiter(',')->required();
  sweep->add_option("--budget", sa.budget, "Budget multipliers")->delimiter(',');
  sweep->add_option("--trials", sa.trials, "Trials per label per cell")->capture_default_str();
  sweep->add_option("--seed", sa.seed, "Master seed")->capture_default_str();
  sweep->add_option("--threads", sa.threads, "Worker threads (0: all cores)");
  sweep->add_option("--csv", sa.csv, "CSV output path");
  sweep->add_option("--manifest", sa.manifest, "JSON manifest output path");
  sweep->add_option("--constants", sa.constants, "Constants JSON file");

  MiArgs ma;
  auto* mi = app.add_subcommand("mi", "Exact mutual-information oracles.");
  mi->add_flag("--per-bin", ma.per_bin, "One Poissonized cell");
  mi->add_flag("--heavy-light", ma.heavy_light, "Heavy-light count row");
  mi->add_flag("--joint-cells", ma.joint_cells, "Several uniform-vs-perturbed cells");
  mi->add_option("--k", ma.k, "k")->required();
  mi->add_option("--n", ma.n, "n")->required();
  mi->add_option("--m", ma.m, "m")->required();
  mi->add_option("--eps", ma.eps, "eps")->required();
  mi->add_option("--bins", ma.bins, "Cells for --joint-cells")->capture_default_str();
  mi->add_option("--count-cap", ma.count_cap, "Enumeration cap (0: automatic)");
  mi->add_option("--max-terms", ma.max_terms, "Series cap for --per-bin")->capture_default_str();

  CalibrateArgs ca;
  auto* calibrate = app.add_subcommand("calibrate", "Calibrate l2 sample constants.");
  calibrate->add_option("--tester", ca.testers, "Tester ids or 'all'")->delimiter(',');
  calibrate->add_option("--trials", ca.trials, "Trials per label per cell")->capture_default_str();
  calibrate->add_option("--seed", ca.seed, "Master seed")->capture_default_str();
  calibrate->add_option("--threads", ca.threads, "Worker threads (0: all cores)");
  calibrate->add_option("--base", ca.base, "Constants file to start from");
  calibrate->add_option("--out", ca.out_path, "Constants file to write");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    err << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*test) return CmdTest(ta, out);
    if (*hardgen) return CmdHardgen(ha, out);
    if (*sweep) return CmdSweep(sa, out);
    if (*mi) return CmdMi(ma, out);
    if (*calibrate) return CmdCalibrate(ca, out, err);
  } catch (const InsufficientSamples& e) {
    err << "error: insufficient samples: " << e.what() << "\n";
    return kExitInsufficient;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace disttest::cli
