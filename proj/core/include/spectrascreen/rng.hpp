#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace spectrascreen {

// Seeded generator whose derived distributions are defined here rather than
// by the standard library, so draws are identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the second variate is cached.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// splitmix64 mix of (base, stream); used to give folds, samples and models
// independent streams from one user seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace spectrascreen
