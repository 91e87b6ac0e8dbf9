#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace freqboot::rng {

/// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Deterministic stream-seed derivation: mix(seed, tag, a, b) gives an
/// independent sub-seed for every distinct (tag, a, b). All stochastic
/// components draw from streams derived this way, so a run is a pure
/// function of the master seed.
inline std::uint64_t mix(std::uint64_t seed, std::string_view tag, std::uint64_t a = 0,
                         std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(seed ^ fnv1a(tag));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return h;
}

/// One sequential random stream. Draw order is part of the determinism
/// contract: callers must consume in a fixed order.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }

  double gaussian(double mean = 0.0, double sigma = 1.0) {
    return std::normal_distribution<double>(mean, sigma)(eng_);
  }

  /// Uniform integer in [lo, hi] inclusive.
  long uniform_int(long lo, long hi) {
    return std::uniform_int_distribution<long>(lo, hi)(eng_);
  }

  std::uint64_t bits() { return eng_(); }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace freqboot::rng
