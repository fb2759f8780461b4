#pragma once

#include <stdexcept>
#include <vector>

#include "massart/hard_pair.hpp"
#include "massart/piecewise_measure.hpp"

namespace massart {

inline constexpr int kMaxMomentOrder = 64;

/// Requested moment order is beyond what double arithmetic can represent.
class MomentRangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// E[G^t] for G ~ N(0,1).
double gaussian_moment(int t);

/// Integral of x^t G(x) over [a, b] by the integration-by-parts recurrence
/// M_t = (t-1) M_{t-2} + a^{t-1} G(a) - b^{t-1} G(b). Infinite ends allowed.
double truncated_gaussian_moment(double a, double b, int t);

/// M_0 .. M_{t_max} on [a, b] in one pass.
std::vector<double> truncated_gaussian_moments(double a, double b, int t_max);

/// Adaptive-quadrature value of the same integral (finite a, b only).
double truncated_gaussian_moment_quadrature(double a, double b, int t);

/// E[X^t] under the normalized measure, from per-piece recurrences. Shifted
/// pieces are expanded binomially with compensated summation.
double measure_moment(const PiecewiseGaussianMeasure& measure, int t);

/// Same expectation by adaptive quadrature on each piece.
double measure_moment_quadrature(const PiecewiseGaussianMeasure& measure, int t);

/// Exact E[G_{delta,eps}^t] - E[G^t] for the infinite periodic box measure
/// (unnormalized), via Poisson summation over its Fourier coefficients:
/// sum_{n != 0} sinc(w_n eps) i^t He_t(w_n) exp(-w_n^2 / 2), w_n = 2 pi n / delta.
/// Keeps full relative precision where direct summation only resolves ~1e-16.
double periodic_box_moment_discrepancy(double delta, double epsilon, int t);

/// Explicit bound on |E G^t - E G_{delta,eps}^t| for any unit-mass profile,
/// instantiated from the Cauchy estimate on circles of radius pi / (2 delta):
/// total = 2 t! (2 delta / pi)^t sum_{n >= 1} exp(-(pi n / delta)^2 / 2).
struct FourierBoundCertificate {
  int t = 0;
  double delta = 0.0;
  std::vector<double> series_terms;  ///< per-n bound, n = 1, 2, ...
  double total = 0.0;
  double log_total = 0.0;  ///< natural log of total, valid even when total overflows
};

FourierBoundCertificate fourier_discrepancy_bound(int t, double delta);

/// Certified bound on |E A^t - E G^t| for the normalized, truncated measure A
/// whose dropped pieces all lie beyond |x| >= cutoff. Chains the t-certificate,
/// the truncation tail 2 int_cutoff^inf x^t G and |1/Z - 1| <= e0 / (1 - e0).
/// Returns +inf when the chain is vacuous.
double certified_normalized_bound(int t, double delta, double cutoff);

struct ChiSquare {
  double closed_form = 0.0;
  double quadrature = 0.0;
};

/// chi^2(measure, N(0,1)). The closed form uses
/// G(x+h)^2 / G(x) = exp(h^2) G(x + 2h) on every piece.
ChiSquare chi_square_vs_gaussian(const PiecewiseGaussianMeasure& measure);

struct MomentReport {
  int k = 0;
  std::vector<double> moments_a, moments_b, moments_gaussian;
  std::vector<double> moments_a_quadrature, moments_b_quadrature;
  std::vector<double> discrepancy_a, discrepancy_b;  ///< |E X^t - E G^t|, direct route
  std::vector<double> discrepancy_a_spectral;        ///< |E A^t - E G^t|, Poisson route
  std::vector<double> difference_ab;                 ///< |E B^t - E A^t|
  std::vector<double> bound_ab;                      ///< 4 eps (2 + 8 sqrt(log 1/zeta))^t
  std::vector<double> fourier_bounds;                ///< certificate total per t
  std::vector<double> certified_a;                   ///< certified bound on discrepancy_a
  double max_recurrence_quadrature_rel = 0.0;
  bool ab_bound_holds = false;
  bool triangle_holds = false;
  bool certificate_dominates = false;
  bool oracles_agree = false;
  bool pass() const noexcept {
    return ab_bound_holds && triangle_holds && certificate_dominates && oracles_agree;
  }
};

MomentReport moment_discrepancy_report(const HardPair& pair, int k);

/// Least-squares slope of log|E A^t - E G^t| against 1 / delta^2 as d varies
/// at fixed zeta, using the Poisson route. Requires even t >= 2 and
/// at least two d values.
struct ScalingFit {
  std::vector<double> inverse_delta_squared;
  std::vector<double> log_discrepancy;
  double slope = 0.0;
  bool monotone_decreasing = false;
};

ScalingFit discrepancy_scaling_fit(double zeta, double epsilon_over_delta,
                                   const std::vector<int>& d_values, int t);

}  // namespace massart
