// Synthetic datasets and the MSE / build-time experiments.

#ifndef DPH_EVAL_H_
#define DPH_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dph/core.h"
#include "dph/schemes.h"

namespace dph {

enum class SyntheticKind { kSmoothSparse, kSpikyPeriodic, kUniformRandom };

// smooth-sparse, spiky-periodic, uniform-random.
std::string_view SyntheticName(SyntheticKind kind);
SyntheticKind ParseSynthetic(std::string_view name);

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kSmoothSparse;
  std::size_t n = 1024;
  std::uint64_t seed = 1;
  // Largest count of the head (smooth-sparse), burst height (spiky-periodic)
  // or upper bound of the counts (uniform-random).
  double magnitude = 1000.0;
};

// smooth-sparse: a power-law head over the first fifth of the bins that
// flattens into long constant runs, then an all-zero tail. spiky-periodic:
// low baseline with bursts of magnitude over a few contiguous bins every
// period. uniform-random: i.i.d. integer counts uniform on [0, magnitude].
// Throws std::invalid_argument for n < 1.
Histogram Generate(const SyntheticSpec& spec);

struct ExperimentSpec {
  std::vector<SchemeKind> schemes;
  double eps = 1.0;
  double range_fraction = 0.3;
  std::size_t trials = 100;
  std::size_t queries_per_trial = 2000;
  std::uint64_t seed = 0;
  SchemeConfig base;  // fanout, metric, allocation, fq strategy, force
  std::size_t threads = 0;  // 0: hardware concurrency
};

struct TrialResult {
  std::string scheme;
  std::size_t trial = 0;
  std::optional<double> mse;  // empty when the scheme failed
  std::optional<double> build_ms;
  std::string error;

  bool operator==(const TrialResult&) const = default;
};

struct SchemeSummary {
  std::string scheme;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double median_mse = 0.0;
  double mean_mse = 0.0;
  double median_build_ms = 0.0;
  std::string first_error;

  bool operator==(const SchemeSummary&) const = default;
};

struct MseResult {
  std::vector<TrialResult> trials;  // scheme-major, then by trial index
  std::vector<SchemeSummary> summary;
};

// Range size round(fraction * n), clamped to [1, n].
std::size_t RangeSize(std::size_t n, double fraction);

// The queries of one trial: uniform starts, fixed size. Deterministic per
// (seed, trial).
std::vector<RangeQuery> TrialQueries(std::size_t n, std::size_t size,
                                     std::size_t count, std::uint64_t seed,
                                     std::size_t trial);

// Scheme seed of one trial (shared by all schemes of that trial).
std::uint64_t TrialSeed(std::uint64_t seed, std::size_t trial);

double Median(std::vector<double> values);

// Mean squared error of each scheme over random fixed-size ranges. A scheme
// that throws yields failure rows instead of aborting the table.
MseResult MseExperiment(const Histogram& h, const ExperimentSpec& spec);

std::vector<SchemeSummary> Summarize(const std::vector<TrialResult>& trials);

struct TimingRow {
  std::string scheme;
  std::size_t n = 0;
  std::optional<double> build_ms;  // minimum over repetitions; empty if skipped
  std::string status;              // "ok", "SKIPPED" or an error message

  bool operator==(const TimingRow&) const = default;
};

// Build time of each scheme on the first round(fraction * n) bins, for each
// fraction in (0, 1]. DAWA_LIKE rows above its guard are SKIPPED unless
// base.force is set.
std::vector<TimingRow> TimingExperiment(const Histogram& h,
                                        const std::vector<SchemeKind>& schemes,
                                        const std::vector<double>& fractions,
                                        const SchemeConfig& base,
                                        std::size_t repetitions = 3);

}  // namespace dph

#endif  // DPH_EVAL_H_
