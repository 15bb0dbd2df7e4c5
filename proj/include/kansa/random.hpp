#pragma once

#include <cstdint>
#include <random>

namespace kansa {

/// SplitMix64 finalizer; a fixed bijective mixer on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed of trial `trial_index` under `base_seed`. Depends only on the pair, so
/// trials can run in any order and any single trial can be replayed.
constexpr std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_index) noexcept {
  return splitmix64(splitmix64(base_seed) ^ (trial_index * 0xD1B54A32D192ED03ull));
}

/// mt19937_64 output is fully specified by the standard; the mapping to [0, 1)
/// is done here rather than through std::uniform_real_distribution, whose
/// algorithm is implementation-defined.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [-half_width, half_width).
  double next_symmetric(double half_width) { return (2.0 * next_unit() - 1.0) * half_width; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace kansa
