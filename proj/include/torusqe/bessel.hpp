#pragma once

#include <cmath>
#include <numbers>

namespace torusqe {

// Argument at which J0 switches from the power series to the Hankel expansion.
// Both branches are accurate to a few ulps of 1 around x = 16.
inline constexpr double kBesselSeriesLimit = 16.0;

namespace detail {

// sum_k (-1)^k (x^2/4)^k / (k!)^2 in extended precision. The largest term
// near x = 16 is about 2e5, so long double keeps the cancellation error
// near 1e-15.
inline double bessel_j0_series(double x) {
  const long double q = static_cast<long double>(x) * x / 4.0L;
  long double term = 1.0L, sum = 1.0L;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<long double>(k) * k);
    sum += term;
    if (std::fabs(term) < 1e-22L) break;
  }
  return static_cast<double>(sum);
}

// J0(x) ~ sqrt(2/(pi x)) (P cos chi - Q sin chi), chi = x - pi/4, with the
// standard asymptotic series truncated at its smallest term.
inline double bessel_j0_hankel(double x) {
  const double inv8x = 1.0 / (8.0 * x);
  double p = 1.0, q = 0.0;
  double term = 1.0;  // a_k / (8x)^k with a_k = prod_{j=1..k} (2j-1)^2 / k!
  double prev = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double f = (2.0 * k - 1.0) * (2.0 * k - 1.0) / k * inv8x;
    const double next = term * f;
    if (std::fabs(next) > prev) break;
    term = next;
    prev = std::fabs(term);
    // P = t0 - t2 + t4 - ..., Q = -t1 + t3 - ...
    switch (k % 4) {
      case 1: q -= term; break;
      case 2: p -= term; break;
      case 3: q += term; break;
      case 0: p += term; break;
    }
    if (prev < 1e-17) break;
  }
  const double chi = x - std::numbers::pi / 4.0;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace detail

/// Bessel function of the first kind, order zero.
inline double bessel_j0(double x) {
  x = std::fabs(x);
  return x <= kBesselSeriesLimit ? detail::bessel_j0_series(x) : detail::bessel_j0_hankel(x);
}

/// sin(x)/x with the removable singularity filled in.
inline double sinc(double x) {
  if (std::fabs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace torusqe
