#pragma once

#include <cmath>
#include <limits>

namespace mft {

/// e^{-x} I0(x) for x >= 0. Below 20 the library Bessel function is accurate enough;
/// above that the product overflows long before the scaled value loses meaning, so we
/// switch to the Hankel series (terms decrease for k < 2x, so truncation is safe).
inline double i0e(double x) {
  x = std::fabs(x);
  if (x < 20.0) return std::cyl_bessel_i(0.0, x) * std::exp(-x);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    double a = 2.0 * k - 1.0;
    term *= a * a / (8.0 * k * x);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum / std::sqrt(2.0 * M_PI * x);
}

/// log(1 + e^x) without overflow.
inline double log1pexp(double x) {
  if (x > 35.0) return x + std::exp(-x);
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

/// x log x with the 0 log 0 = 0 convention.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace mft
