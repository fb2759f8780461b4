#pragma once

// Standard normal primitives shared by every module.

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace massart::gaussian {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934381868;
inline constexpr double kSqrt2 = std::numbers::sqrt2;

/// Standard normal density G(x).
inline double pdf(double x) noexcept {
  if (std::isinf(x)) return 0.0;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

/// Phi(x) = P[N(0,1) <= x].
inline double cdf(double x) noexcept { return 0.5 * std::erfc(-x / kSqrt2); }

/// Q(x) = P[N(0,1) > x], accurate deep into the upper tail.
inline double upper_tail(double x) noexcept { return 0.5 * std::erfc(x / kSqrt2); }

/// P[a <= N(0,1) <= b], evaluated on whichever tail keeps full relative precision.
inline double interval_mass(double a, double b) noexcept {
  if (!(a < b)) return 0.0;
  if (a >= 0.0) return upper_tail(a) - upper_tail(b);
  if (b <= 0.0) return cdf(b) - cdf(a);
  return 1.0 - upper_tail(b) - cdf(a);
}

/// Inverse of Phi on (0, 1).
inline double quantile(double p) {
  return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
}

/// Inverse of Q on (0, 1).
inline double upper_quantile(double q) {
  return kSqrt2 * boost::math::erfc_inv(2.0 * q);
}

/// E[G^t] for G ~ N(0,1): zero for odd t, (t-1)!! for even t.
inline double moment(int t) noexcept {
  if (t < 0 || (t % 2) != 0) return 0.0;
  double value = 1.0;
  for (int j = t - 1; j > 1; j -= 2) value *= j;
  return value;
}

}  // namespace massart::gaussian
