#pragma once

// Portable random source. The engine (std::mt19937_64) has a bit-exact
// output sequence mandated by the standard; the variate transforms below are
// written out here because the <random> distributions are
// implementation-defined and would not reproduce across toolchains.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>

namespace dcs {

inline constexpr const char* kRngId = "mt19937_64/u53-boxmuller-v1";

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (spare_) {
      double v = *spare_;
      spare_.reset();
      return v;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open0()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
  }

  // Unbiased integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace dcs
