#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace sogmm::detail {

// Seeded generator with explicit scalar transforms so sampled sequences do
// not depend on standard-library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n); rejection sampling removes the modulo bias.
  std::size_t next_index(std::size_t n) {
    const std::uint64_t threshold = (0 - static_cast<std::uint64_t>(n)) % n;
    std::uint64_t v = engine_();
    while (v < threshold) {
      v = engine_();
    }
    return static_cast<std::size_t>(v % n);
  }

  // Standard normal via Box-Muller, one cached value per pair.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    while (u1 <= 0.0) {
      u1 = next_double();
    }
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sogmm::detail
