#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace deautoconv {

/// Seeded 64-bit Mersenne Twister. Uniform draws use the top 53 bits scaled
/// into [0, 1), so sequences depend only on the engine, not on the standard
/// library's distribution implementation.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace deautoconv
