#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace drrkit {

/// SplitMix64 output function. Element i (0-based) of the stream seeded
/// with `seed` is splitmix64(seed + (i + 1) * 0x9E3779B97F4A7C15); every
/// random draw in the library is defined this way so results do not depend
/// on the platform's <random> distributions.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_bits(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed + (index + 1) * 0x9E3779B97F4A7C15ull);
}

/// Uniform in [0, 1) from the top 53 bits.
constexpr double stream_uniform(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(stream_bits(seed, index) >> 11) * 0x1.0p-53;
}

/// Sequential view of one stream.
class StreamRng {
 public:
  explicit StreamRng(std::uint64_t seed) : seed_(seed) {}

  double uniform() { return stream_uniform(seed_, index_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Box-Muller; consumes two draws.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t index_ = 0;
};

}  // namespace drrkit
