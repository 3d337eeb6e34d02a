#pragma once

#include <cstdint>
#include <random>

namespace soctrack {

// Deterministic random source. mt19937_64 has a standard-mandated output
// sequence, and every distribution below is hand-derived from raw draws, so
// identical seeds give identical streams on any platform or standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t uniform_index(std::uint64_t n);

  // Box-Muller; the spare variate is cached.
  double gaussian(double mean = 0.0, double stddev = 1.0);

  // Knuth multiplication method; adequate for the small rates used here.
  int poisson(double lambda);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace soctrack
