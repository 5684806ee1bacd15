// Seeded Laplace noise and the Laplace Perturbation Algorithm.

#ifndef DPH_NOISE_H_
#define DPH_NOISE_H_

#include <cstdint>
#include <random>
#include <string_view>

#include "dph/core.h"

namespace dph {

// Deterministic uniform source. Independent substreams are derived from
// (seed, id), so every module instance gets its own randomness while the
// whole run stays reproducible from one master seed.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed);

  NoiseSource Derive(std::string_view id) const;
  NoiseSource Derive(std::uint64_t index) const;

  // Uniform on the open interval (0, 1), 52 bits of resolution.
  double Uniform();
  std::uint64_t NextBits();
  // Uniform integer in [lo, hi].
  std::uint64_t UniformInt(std::uint64_t lo, std::uint64_t hi);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return position_; }

 private:
  std::uint64_t seed_;
  std::uint64_t position_ = 0;
  std::mt19937_64 engine_;
};

// Laplace scale lambda > 0, or INFINITE (the value is discarded and never
// sampled).
class LaplaceScale {
 public:
  static LaplaceScale Finite(double lambda);
  static LaplaceScale Infinite() { return LaplaceScale(0.0, true); }
  // lambda = sensitivity / eps; eps == 0 gives INFINITE.
  static LaplaceScale ForBudget(double eps, double sensitivity = 1.0);

  bool infinite() const { return infinite_; }
  double lambda() const;
  // 2 lambda^2, or +inf.
  double variance() const;

 private:
  LaplaceScale(double lambda, bool infinite) : lambda_(lambda), infinite_(infinite) {}

  double lambda_;
  bool infinite_;
};

// One inverse-CDF draw from Lap(0, lambda). Throws std::logic_error for an
// INFINITE scale: callers branch on pruned values before sampling.
double SampleLaplace(NoiseSource& src, LaplaceScale scale);
double SampleLaplace(NoiseSource& src, double lambda);

// h + Lap(1/eps)^n, charging eps to the ledger under `module`.
NoisyHistogram Lpa(const Histogram& h, double eps, NoiseSource& src,
                   BudgetLedger& ledger, std::string module = "lpa");

}  // namespace dph

#endif  // DPH_NOISE_H_
