#include "dph/noise.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dph {
namespace {

// FNV-1a; std::hash is not stable across implementations.
std::uint64_t HashId(std::string_view id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// SplitMix64 finalizer over the combined words.
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed ^ (tag + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

NoiseSource::NoiseSource(std::uint64_t seed)
    : seed_(seed), engine_(MixSeed(seed, 0)) {}

NoiseSource NoiseSource::Derive(std::string_view id) const {
  return NoiseSource(MixSeed(seed_, HashId(id)));
}

NoiseSource NoiseSource::Derive(std::uint64_t index) const {
  return NoiseSource(MixSeed(seed_, index * 0x9e3779b97f4a7c15ULL + 1));
}

std::uint64_t NoiseSource::NextBits() {
  ++position_;
  return engine_();
}

double NoiseSource::Uniform() {
  // (k + 0.5) / 2^52 is exact and lies strictly inside (0, 1).
  const std::uint64_t k = NextBits() >> 12;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-52;
}

std::uint64_t NoiseSource::UniformInt(std::uint64_t lo, std::uint64_t hi) {
  if (lo > hi) throw std::invalid_argument("empty integer range");
  const std::uint64_t span = hi - lo;
  if (span == std::numeric_limits<std::uint64_t>::max()) return NextBits();
  const std::uint64_t range = span + 1;
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = NextBits();
  } while (x >= limit);
  return lo + x % range;
}

LaplaceScale LaplaceScale::Finite(double lambda) {
  if (!std::isfinite(lambda) || lambda <= 0.0) {
    throw std::invalid_argument("Laplace scale must be finite and positive");
  }
  return LaplaceScale(lambda, false);
}

LaplaceScale LaplaceScale::ForBudget(double eps, double sensitivity) {
  if (!(eps >= 0.0) || !(sensitivity > 0.0)) {
    throw std::invalid_argument("budget must be >= 0 and sensitivity > 0");
  }
  if (eps == 0.0) return Infinite();
  return Finite(sensitivity / eps);
}

double LaplaceScale::lambda() const {
  if (infinite_) throw std::logic_error("INFINITE Laplace scale has no lambda");
  return lambda_;
}

double LaplaceScale::variance() const {
  return infinite_ ? std::numeric_limits<double>::infinity()
                   : 2.0 * lambda_ * lambda_;
}

double SampleLaplace(NoiseSource& src, LaplaceScale scale) {
  if (scale.infinite()) {
    throw std::logic_error("cannot sample Laplace noise with INFINITE scale");
  }
  const double u = src.Uniform() - 0.5;
  const double magnitude = -scale.lambda() * std::log1p(-2.0 * std::abs(u));
  return u < 0.0 ? -magnitude : magnitude;
}

double SampleLaplace(NoiseSource& src, double lambda) {
  return SampleLaplace(src, LaplaceScale::Finite(lambda));
}

NoisyHistogram Lpa(const Histogram& h, double eps, NoiseSource& src,
                   BudgetLedger& ledger, std::string module) {
  if (!(eps > 0.0)) throw std::invalid_argument("LPA requires eps > 0");
  ledger.Spend(std::move(module), eps);
  const LaplaceScale scale = LaplaceScale::Finite(1.0 / eps);
  std::vector<NoisyBin> bins;
  bins.reserve(h.size());
  for (const Bin& bin : h.bins()) {
    bins.push_back(NoisyBin{bin.label, bin.value + SampleLaplace(src, scale)});
  }
  return NoisyHistogram(std::move(bins));
}

}  // namespace dph
