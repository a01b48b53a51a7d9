#pragma once

#include <cstdint>
#include <random>

namespace ifl {

/// Deterministic 64-bit random source (Mersenne Twister under the hood).
/// Identical seed gives an identical draw sequence within one build; tests
/// assert statistics, never exact streams.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform double in [0, 1).
  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Derive an independent child stream, e.g. one per simulation replicate.
  SeededRng split(std::uint64_t stream) const {
    return SeededRng(seed_ ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace ifl
