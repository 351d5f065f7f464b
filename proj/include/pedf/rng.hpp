#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace pedf {

// Seeded generator with a portable output sequence. std::mt19937_64 is fully
// specified by the standard; the std distributions are not, so draws are
// derived from raw 64-bit words here.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm =
      "mt19937_64(seed); uniform = (word >> 11) * 2^-53; index = floor(uniform * n); "
      "exponential = -ln(1 - uniform) / rate";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_word() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  // Inclusive integer range.
  int between(int lo, int hi) { return lo + static_cast<int>(index(static_cast<std::size_t>(hi - lo + 1))); }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pedf
