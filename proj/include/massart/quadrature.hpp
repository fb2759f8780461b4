#pragma once

// Adaptive Gauss-Kronrod quadrature, the independent numerical oracle used to
// cross-check every closed form in this library.

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace massart::quadrature {

struct Result {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Adaptive 15-point Gauss-Kronrod on a finite [a, b] with an absolute
/// tolerance: an interval is bisected (tolerance halved) until the
/// Kronrod-Gauss difference drops below the tolerance (or the rounding level
/// of the local L1 norm) or depth runs out.
template <class F>
Result integrate(const F& f, double a, double b, double abs_tol = 1e-13,
                 unsigned max_depth = 24) {
  if (!(a < b)) return {};
  double error = 0.0, l1 = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &error, &l1);
  // Boost's estimate never drops below a few hundred ulps of L1; that part is
  // rounding and cannot be refined away.
  const double floor = 1e-13 * l1;
  if (error <= std::max(abs_tol, floor) || max_depth == 0 || !std::isfinite(value))
    return {value, error};
  const double mid = 0.5 * (a + b);
  const Result left = integrate(f, a, mid, 0.5 * abs_tol, max_depth - 1);
  const Result right = integrate(f, mid, b, 0.5 * abs_tol, max_depth - 1);
  return {left.value + right.value, left.error_estimate + right.error_estimate};
}

}  // namespace massart::quadrature
