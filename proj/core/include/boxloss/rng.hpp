#pragma once

#include <cstdint>
#include <random>

namespace boxloss {

// Seed-stream derivation and uniform mapping are spelled out here instead of
// relying on std distributions, whose output is implementation-defined; all
// seeded results in this library are reproducible bit-for-bit across
// platforms with IEEE-754 doubles.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent sub-seed for stream `stream` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

/// mt19937_64 with explicit uniform mappings.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  bool coin() { return (engine_() & 1ULL) != 0ULL; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace boxloss
