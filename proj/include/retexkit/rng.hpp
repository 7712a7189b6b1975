#pragma once

#include <cstdint>
#include <random>

namespace retexkit {

// Stable sub-seed derivation: identical (seed, index) pairs give identical streams on every
// platform, independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Thin wrapper over mt19937_64 whose distributions are implemented here rather than with
// <random> distributions, whose outputs are implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller.
  double normal();

private:
  std::mt19937_64 engine_;
};

}  // namespace retexkit
