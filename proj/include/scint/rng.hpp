#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace scint {

/// Seeded generator with platform-independent derived distributions.
///
/// std::mt19937_64's output sequence is fixed by the standard, but the
/// standard distributions are not, so bounded integers, uniforms and normals
/// are derived here explicitly. Changing any derivation changes every
/// sampled dataset; bump kAlgorithm when that happens.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/rejection-v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound) {
    // Rejection sampling on the largest multiple of bound.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal() {
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Moves a uniform sample of k elements (without replacement) to the front
  /// of v via a partial Fisher-Yates pass. Returns the sample in draw order.
  template <typename T>
  std::vector<T> sample_prefix(std::vector<T>& v, std::size_t k) {
    for (std::size_t i = 0; i < k && i < v.size(); ++i) {
      const auto j = i + static_cast<std::size_t>(uniform_index(v.size() - i));
      std::swap(v[i], v[j]);
    }
    return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(k, v.size()))};
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace scint
