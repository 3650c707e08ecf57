#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace torusqe {

/// SplitMix64. Fully specified integer arithmetic, so a given seed yields the
/// same stream on every platform (unlike the std distributions).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in (0, 1]
  double uniform_open0() noexcept { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

  // uniform in [0, 1)
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard complex Gaussian (E|z|^2 = 1) by Box-Muller.
  std::complex<double> complex_gaussian() noexcept {
    const double u = uniform_open0();
    const double v = uniform();
    const double rad = std::sqrt(-std::log(u));
    const double ang = 2.0 * std::numbers::pi * v;
    return {rad * std::cos(ang), rad * std::sin(ang)};
  }

  double gaussian() noexcept {
    const double u = uniform_open0();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  }

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a user seed and a counter key, so
/// per-shell streams do not depend on evaluation order.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t key_a, std::uint64_t key_b = 0) noexcept {
  SplitMix64 m(seed ^ 0x6a09e667f3bcc909ULL);
  std::uint64_t h = m.next();
  SplitMix64 ma(h ^ key_a);
  h = ma.next();
  SplitMix64 mb(h ^ (key_b * 0xd1342543de82ef95ULL + 1));
  return mb.next();
}

}  // namespace torusqe
