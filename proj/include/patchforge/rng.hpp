#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace patchforge {

// Seeded Gaussian stream. Box-Muller over our own uniform mapping instead of
// std::normal_distribution, whose output sequence is implementation-defined;
// this keeps same-seed streams reproducible for a given build.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

  // One draw from N(0, sigma^2).
  double next(double sigma) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_ * sigma;
    }
    // u1 in (0, 1] so log() never sees zero; u2 in [0, 1).
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle) * sigma;
  }

  std::uint64_t bits() { return engine_(); }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  double uniform01() {  // [0, 1), 53 random bits
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace patchforge
