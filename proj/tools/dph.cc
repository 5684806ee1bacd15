// dph: generate datasets, publish private structures and run experiments.
//
// Exit codes: 0 success, 1 I/O failure, 2 usage or configuration error,
// 3 budget or size-guard violation.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dph/csv.h"
#include "dph/eval.h"
#include "dph/schemes.h"
#include "dph/serialize.h"

namespace {

constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DataOptions {
  std::string path;
  std::string kind;
  std::size_t n = 0;
  std::uint64_t data_seed = 1;
  double magnitude = 1000.0;
};

struct SchemeOptions {
  std::string scheme = "lpa";
  std::vector<std::string> schemes;
  double eps = 1.0;
  std::optional<std::uint64_t> seed;
  std::size_t fanout = 16;
  std::string metric;
  std::string allocation = "geometric";
  std::string fq_strategy = "hierarchical";
  bool force = false;
};

void AddDataOptions(CLI::App* cmd, DataOptions& data) {
  auto* path = cmd->add_option("--data", data.path, "Dataset CSV (label,value)");
  auto* kind = cmd->add_option("--kind", data.kind,
                               "Synthetic dataset: smooth-sparse, spiky-periodic, "
                               "uniform-random");
  path->excludes(kind);
  kind->excludes(path);
  auto* n = cmd->add_option("--n", data.n, "Synthetic dataset size (kind defaults to "
                                           "smooth-sparse)");
  n->excludes(path);
  cmd->add_option("--data-seed", data.data_seed, "Synthetic dataset seed");
  cmd->add_option("--magnitude", data.magnitude, "Synthetic count magnitude");
}

void AddSchemeOptions(CLI::App* cmd, SchemeOptions& opts) {
  cmd->add_option("--eps", opts.eps, "Privacy budget")->capture_default_str();
  cmd->add_option("--seed", opts.seed, "Master seed (falls back to $DPH_SEED, then 0)");
  cmd->add_option("--fanout", opts.fanout, "Tree fanout")->capture_default_str();
  cmd->add_option("--metric", opts.metric, "Grouping metric: absolute or squared");
  cmd->add_option("--budget-allocation", opts.allocation, "geometric or uniform")
      ->capture_default_str();
  cmd->add_option("--fq-strategy", opts.fq_strategy, "identity or hierarchical")
      ->capture_default_str();
  cmd->add_flag("--force", opts.force, "Run dawa above its size guard");
}

std::uint64_t ResolveSeed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("DPH_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long value = std::stoull(env, &used);
      if (used == std::string(env).size()) return value;
    } catch (const std::exception&) {
    }
    throw UsageError("DPH_SEED is not an unsigned 64-bit integer");
  }
  return 0;
}

dph::Histogram LoadData(const DataOptions& data) {
  if (!data.path.empty()) return dph::ReadHistogramCsv(data.path);
  if (data.kind.empty() && data.n == 0) {
    throw UsageError("give a dataset with --data or --kind/--n");
  }
  if (data.n < 1) throw UsageError("--n must be >= 1");
  dph::SyntheticSpec spec;
  try {
    spec.kind = dph::ParseSynthetic(data.kind.empty() ? "smooth-sparse" : data.kind);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  spec.n = data.n;
  spec.seed = data.data_seed;
  spec.magnitude = data.magnitude;
  return dph::Generate(spec);
}

dph::SchemeConfig BaseConfig(const SchemeOptions& opts) {
  dph::SchemeConfig config;
  try {
    config.eps = opts.eps;
    config.fanout = opts.fanout;
    if (!opts.metric.empty()) config.metric = dph::ParseMetric(opts.metric);
    config.allocation = dph::ParseAllocation(opts.allocation);
    config.fq_strategy = dph::ParseFqStrategy(opts.fq_strategy);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  config.seed = ResolveSeed(opts.seed);
  config.force = opts.force;
  return config;
}

std::vector<dph::SchemeKind> SchemeList(const SchemeOptions& opts) {
  std::vector<std::string> names = opts.schemes;
  if (names.empty() && !opts.scheme.empty()) names.push_back(opts.scheme);
  if (names.empty()) throw UsageError("the scheme list is empty");
  std::vector<dph::SchemeKind> kinds;
  for (const std::string& name : names) {
    try {
      kinds.push_back(dph::ParseScheme(name));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return kinds;
}

// Writes `text` to `path`, or to stdout when the path is empty.
void Emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private publishing of histograms that answer range sums"};
  app.require_subcommand(1);

  DataOptions gen_data;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset as CSV");
  gen->add_option("--kind", gen_data.kind,
                  "smooth-sparse, spiky-periodic or uniform-random")
      ->required();
  gen->add_option("--n", gen_data.n, "Number of bins")->required();
  gen->add_option("--seed", gen_data.data_seed, "Generator seed");
  gen->add_option("--magnitude", gen_data.magnitude, "Count magnitude");
  gen->add_option("-o,--output", gen_out, "Output CSV (stdout if omitted)");

  DataOptions run_data;
  SchemeOptions run_opts;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Publish one scheme's structure as JSON");
  AddDataOptions(run, run_data);
  AddSchemeOptions(run, run_opts);
  run->add_option("--scheme", run_opts.scheme,
                  "lpa, h, s1, s-approx, s2, so, dawa, sub, sps")
      ->capture_default_str();
  run->add_option("-o,--output", run_out, "Output JSON (stdout if omitted)");

  DataOptions eval_data;
  SchemeOptions eval_opts;
  std::string experiment = "mse";
  double range = 0.3;
  std::size_t trials = 100;
  std::size_t queries = 2000;
  std::size_t threads = 0;
  std::vector<double> fractions{0.25, 0.5, 1.0};
  std::size_t repetitions = 3;
  std::string eval_out;
  std::string summary_out;
  auto* evaluate = app.add_subcommand("evaluate", "Per-trial MSE or build-time table");
  auto* compare = app.add_subcommand("compare", "Utility versus build time per scheme");
  for (CLI::App* cmd : {evaluate, compare}) {
    AddDataOptions(cmd, eval_data);
    AddSchemeOptions(cmd, eval_opts);
    cmd->add_option("--schemes", eval_opts.schemes, "Comma-separated scheme list")
        ->delimiter(',');
    cmd->add_option("--scheme", eval_opts.scheme, "Single scheme");
    cmd->add_option("--range", range, "Range size as a fraction of n")
        ->capture_default_str();
    cmd->add_option("--trials", trials, "Trials per scheme")->capture_default_str();
    cmd->add_option("--queries", queries, "Queries per trial")->capture_default_str();
    cmd->add_option("--threads", threads, "Worker threads (0: all cores)");
    cmd->add_option("-o,--output", eval_out, "Output CSV (stdout if omitted)");
    cmd->add_option("--summary", summary_out, "JSON summary output");
  }
  evaluate->add_option("--experiment", experiment, "mse or timing")
      ->check(CLI::IsMember({"mse", "timing"}))
      ->capture_default_str();
  evaluate->add_option("--fractions", fractions, "Prefix fractions for timing")
      ->delimiter(',');
  evaluate->add_option("--repetitions", repetitions, "Timing repetitions (minimum kept)");
  eval_opts.scheme.clear();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      std::ostringstream out;
      dph::WriteHistogramCsv(LoadData(gen_data), out);
      Emit(gen_out, out.str());
    } else if (run->parsed()) {
      dph::SchemeConfig config = BaseConfig(run_opts);
      config.kind = SchemeList(run_opts).front();
      const dph::NoisyStructure structure = dph::RunScheme(LoadData(run_data), config);
      Emit(run_out, dph::StructureToJson(structure));
    } else {
      const dph::Histogram h = LoadData(eval_data);
      const dph::SchemeConfig base = BaseConfig(eval_opts);
      const std::vector<dph::SchemeKind> kinds = SchemeList(eval_opts);
      std::ostringstream table;
      if (evaluate->parsed() && experiment == "timing") {
        for (double f : fractions) {
          if (!(f > 0.0) || f > 1.0) throw UsageError("fractions must lie in (0, 1]");
        }
        dph::WriteTimingCsv(
            dph::TimingExperiment(h, kinds, fractions, base, repetitions), table);
      } else {
        if (!(range > 0.0) || range > 1.0) throw UsageError("--range must lie in (0, 1]");
        if (trials < 1 || queries < 1) throw UsageError("--trials and --queries must be >= 1");
        dph::ExperimentSpec spec;
        spec.schemes = kinds;
        spec.eps = base.eps;
        spec.range_fraction = range;
        spec.trials = trials;
        spec.queries_per_trial = queries;
        spec.seed = base.seed;
        spec.base = base;
        spec.threads = threads;
        const dph::MseResult result = dph::MseExperiment(h, spec);
        if (compare->parsed()) {
          dph::WriteTradeoffCsv(result.summary, table);
        } else {
          dph::WriteTrialsCsv(result.trials, table);
        }
        if (!summary_out.empty()) Emit(summary_out, dph::MseResultToJson(result));
      }
      Emit(eval_out, table.str());
    }
  } catch (const dph::BudgetExceededError& e) {
    std::cerr << "dph: budget violation: " << e.what() << "\n";
    return kExitBudget;
  } catch (const dph::GuardError& e) {
    std::cerr << "dph: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::invalid_argument& e) {
    // UsageError, ConfigError and argument checks of the library.
    std::cerr << "dph: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "dph: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
