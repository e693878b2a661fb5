#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace gridline {

/// Deterministic random helper. Distributions are built from raw 53-bit
/// uniforms so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] via rejection-free scaling.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }

  /// Box-Muller; consumes two uniforms per draw.
  double normal(double mu = 0.0, double sigma = 1.0) {
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double z = std::sqrt(-2.0 * std::log(u1)) *
                     std::cos(2.0 * std::numbers::pi * u2);
    return mu + sigma * z;
  }

  uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gridline
