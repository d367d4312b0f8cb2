#pragma once

// Seedable, splittable random streams. Each Monte Carlo trial draws from its
// own stream derived from (master seed, stream indices), so results do not
// depend on execution order or thread count.

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace rmtdetect {

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(master);
  for (auto p : path) s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  static RandomStream derive(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    return RandomStream(derive_seed(master, path));
  }

  std::uint64_t seed() const { return seed_; }

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

  /// Real and imaginary parts i.i.d. N(0, 1/2), so E|v|^2 = 1.
  template <typename Real = double>
  std::complex<Real> standard_complex_gaussian() {
    constexpr double s = 0.70710678118654752440;
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {static_cast<Real>(s * re), static_cast<Real>(s * im)};
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace rmtdetect
