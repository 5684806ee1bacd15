#include "dph/eval.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "dph/noise.h"

namespace dph {
namespace {

constexpr std::pair<SyntheticKind, std::string_view> kSyntheticNames[] = {
    {SyntheticKind::kSmoothSparse, "smooth-sparse"},
    {SyntheticKind::kSpikyPeriodic, "spiky-periodic"},
    {SyntheticKind::kUniformRandom, "uniform-random"}};

double ElapsedMs(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   start)
      .count();
}

std::vector<double> SmoothSparse(const SyntheticSpec& spec, NoiseSource& src) {
  std::vector<double> values(spec.n, 0.0);
  const std::size_t head = std::max<std::size_t>(1, spec.n / 5);
  for (std::size_t k = 0; k < head; ++k) {
    const double base = spec.magnitude / std::pow(1.0 + static_cast<double>(k), 1.2);
    // Mild multiplicative jitter; rounding turns the slow part of the decay
    // into runs of equal counts.
    const double jitter = 0.95 + 0.1 * src.Uniform();
    values[k] = std::floor(base * jitter);
  }
  return values;
}

std::vector<double> SpikyPeriodic(const SyntheticSpec& spec, NoiseSource& src) {
  constexpr std::size_t kPeriod = 97;
  constexpr std::size_t kWidth = 5;
  std::vector<double> values(spec.n);
  for (double& v : values) v = static_cast<double>(src.UniformInt(0, 4));
  const std::size_t phase = static_cast<std::size_t>(src.UniformInt(0, kPeriod - 1));
  for (std::size_t start = phase; start < spec.n; start += kPeriod) {
    for (std::size_t j = start; j < std::min(spec.n, start + kWidth); ++j) {
      values[j] = std::floor(spec.magnitude * (0.5 + 0.5 * src.Uniform()));
    }
  }
  return values;
}

std::vector<double> UniformRandom(const SyntheticSpec& spec, NoiseSource& src) {
  const auto top = static_cast<std::uint64_t>(std::floor(spec.magnitude));
  std::vector<double> values(spec.n);
  for (double& v : values) v = static_cast<double>(src.UniformInt(0, top));
  return values;
}

}  // namespace

std::string_view SyntheticName(SyntheticKind kind) {
  for (const auto& [k, name] : kSyntheticNames) {
    if (k == kind) return name;
  }
  throw std::logic_error("unnamed synthetic kind");
}

SyntheticKind ParseSynthetic(std::string_view name) {
  for (const auto& [k, text] : kSyntheticNames) {
    if (text == name) return k;
  }
  throw std::invalid_argument("unknown dataset kind '" + std::string(name) + "'");
}

Histogram Generate(const SyntheticSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("synthetic histogram needs n >= 1");
  if (!(spec.magnitude >= 0.0) || !std::isfinite(spec.magnitude)) {
    throw std::invalid_argument("magnitude must be finite and >= 0");
  }
  NoiseSource src = NoiseSource(spec.seed).Derive(SyntheticName(spec.kind));
  switch (spec.kind) {
    case SyntheticKind::kSmoothSparse:
      return Histogram::FromValues(SmoothSparse(spec, src));
    case SyntheticKind::kSpikyPeriodic:
      return Histogram::FromValues(SpikyPeriodic(spec, src));
    case SyntheticKind::kUniformRandom:
      return Histogram::FromValues(UniformRandom(spec, src));
  }
  throw std::logic_error("unhandled synthetic kind");
}

std::size_t RangeSize(std::size_t n, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::invalid_argument("range fraction must lie in (0, 1]");
  }
  const auto size = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(size, 1, n);
}

std::vector<RangeQuery> TrialQueries(std::size_t n, std::size_t size,
                                     std::size_t count, std::uint64_t seed,
                                     std::size_t trial) {
  if (size < 1 || size > n) throw std::invalid_argument("range size outside [1, n]");
  NoiseSource src = NoiseSource(seed).Derive("queries").Derive(
      static_cast<std::uint64_t>(trial));
  std::vector<RangeQuery> queries(count);
  for (RangeQuery& q : queries) {
    q.lo = static_cast<std::size_t>(src.UniformInt(1, n - size + 1));
    q.hi = q.lo + size - 1;
  }
  return queries;
}

std::uint64_t TrialSeed(std::uint64_t seed, std::size_t trial) {
  return NoiseSource(seed).Derive("schemes").Derive(static_cast<std::uint64_t>(trial)).seed();
}

double Median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

MseResult MseExperiment(const Histogram& h, const ExperimentSpec& spec) {
  if (spec.schemes.empty()) throw std::invalid_argument("no schemes to evaluate");
  if (spec.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (spec.queries_per_trial < 1) throw std::invalid_argument("queries must be >= 1");
  const std::size_t n = h.size();
  const std::size_t size = RangeSize(n, spec.range_fraction);
  const std::vector<double> values = h.values();
  const std::vector<double> truth_prefix = PrefixSums(values);
  auto truth = [&](RangeQuery q) {
    return truth_prefix[q.hi - 1] - (q.lo > 1 ? truth_prefix[q.lo - 2] : 0.0);
  };

  const std::size_t schemes = spec.schemes.size();
  std::vector<TrialResult> rows(schemes * spec.trials);
  auto run_trial = [&](std::size_t trial) {
    const std::vector<RangeQuery> queries =
        TrialQueries(n, size, spec.queries_per_trial, spec.seed, trial);
    for (std::size_t s = 0; s < schemes; ++s) {
      TrialResult& row = rows[s * spec.trials + trial];
      row.scheme = std::string(SchemeName(spec.schemes[s]));
      row.trial = trial;
      SchemeConfig config = spec.base;
      config.kind = spec.schemes[s];
      config.eps = spec.eps;
      config.seed = TrialSeed(spec.seed, trial);
      try {
        const auto start = std::chrono::steady_clock::now();
        const NoisyStructure structure = RunScheme(h, config);
        row.build_ms = ElapsedMs(start);
        double sum = 0.0;
        for (const RangeQuery& q : queries) {
          const double diff = structure.Answer(q) - truth(q);
          sum += diff * diff;
        }
        row.mse = sum / static_cast<double>(queries.size());
      } catch (const std::exception& e) {
        row.mse.reset();
        row.build_ms.reset();
        row.error = e.what();
      }
    }
  };

  std::size_t threads = spec.threads != 0 ? spec.threads
                                          : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, spec.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t trial = next++; trial < spec.trials; trial = next++) run_trial(trial);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  MseResult result;
  result.summary = Summarize(rows);
  result.trials = std::move(rows);
  return result;
}

std::vector<SchemeSummary> Summarize(const std::vector<TrialResult>& trials) {
  std::vector<SchemeSummary> out;
  std::vector<std::vector<double>> mse;
  std::vector<std::vector<double>> build;
  for (const TrialResult& row : trials) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SchemeSummary& s) {
      return s.scheme == row.scheme;
    });
    if (it == out.end()) {
      SchemeSummary fresh;
      fresh.scheme = row.scheme;
      out.push_back(std::move(fresh));
      mse.emplace_back();
      build.emplace_back();
      it = out.end() - 1;
    }
    const auto k = static_cast<std::size_t>(it - out.begin());
    ++it->trials;
    if (row.mse) {
      mse[k].push_back(*row.mse);
      build[k].push_back(row.build_ms.value_or(0.0));
    } else {
      ++it->failures;
      if (it->first_error.empty()) it->first_error = row.error;
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (mse[k].empty()) {
      out[k].median_mse = out[k].mean_mse = out[k].median_build_ms = std::nan("");
      continue;
    }
    out[k].median_mse = Median(mse[k]);
    out[k].mean_mse = std::accumulate(mse[k].begin(), mse[k].end(), 0.0) /
                      static_cast<double>(mse[k].size());
    out[k].median_build_ms = Median(build[k]);
  }
  return out;
}

std::vector<TimingRow> TimingExperiment(const Histogram& h,
                                        const std::vector<SchemeKind>& schemes,
                                        const std::vector<double>& fractions,
                                        const SchemeConfig& base,
                                        std::size_t repetitions) {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  std::vector<TimingRow> rows;
  for (double fraction : fractions) {
    const Histogram prefix = h.Prefix(RangeSize(h.size(), fraction));
    for (SchemeKind kind : schemes) {
      TimingRow row{std::string(SchemeName(kind)), prefix.size(), std::nullopt, "ok"};
      if (kind == SchemeKind::kDawaLike && prefix.size() > kDawaGuard && !base.force) {
        row.status = "SKIPPED";
        rows.push_back(std::move(row));
        continue;
      }
      SchemeConfig config = base;
      config.kind = kind;
      try {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < repetitions; ++r) {
          const auto start = std::chrono::steady_clock::now();
          const NoisyStructure structure = RunScheme(prefix, config);
          best = std::min(best, ElapsedMs(start));
        }
        row.build_ms = best;
      } catch (const std::exception& e) {
        row.status = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace dph
