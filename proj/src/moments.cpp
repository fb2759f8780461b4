#include "massart/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "massart/gaussian.hpp"
#include "massart/numeric.hpp"
#include "massart/quadrature.hpp"

namespace massart {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_order(int t) {
  if (t < 0) throw std::invalid_argument("moment order must be non-negative");
  if (t > kMaxMomentOrder)
    throw MomentRangeError("moment order " + std::to_string(t) + " exceeds k_max " +
                           std::to_string(kMaxMomentOrder));
}

// x^p G(x), with the convention that it vanishes at infinite x.
double edge_term(double x, int p) {
  if (std::isinf(x)) return 0.0;
  return std::pow(x, p) * gaussian::pdf(x);
}

double binomial(int n, int r) {
  double c = 1.0;
  for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

// First pass fixes the scale; the adaptive pass then works to a relative target.
template <class F>
double integrate_relative(const F& f, double a, double b, double rel_tol) {
  const double rough = quadrature::integrate(f, a, b, kInf, 0).value;
  const double tol = rel_tol * std::max(std::abs(rough), std::numeric_limits<double>::min());
  return quadrature::integrate(f, a, b, tol).value;
}

// Raw integral of x^t * scale * G(x + shift) over the piece.
double piece_moment(const GaussianPiece& p, int t) {
  if (p.shift == 0.0) return p.scale * truncated_gaussian_moment(p.lo, p.hi, t);
  const auto m = truncated_gaussian_moments(p.lo + p.shift, p.hi + p.shift, t);
  CompensatedSum acc;
  double neg_shift_pow = 1.0;  // (-h)^(t-j), built from j = t downwards
  for (int j = t; j >= 0; --j) {
    acc += binomial(t, j) * neg_shift_pow * m[static_cast<std::size_t>(j)];
    neg_shift_pow *= -p.shift;
  }
  return p.scale * acc.value();
}

// Probabilists' Hermite polynomial He_t(x).
double hermite_he(int t, double x) {
  if (t == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (int k = 1; k < t; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace

double gaussian_moment(int t) {
  if (t < 0) throw std::invalid_argument("moment order must be non-negative");
  return gaussian::moment(t);
}

std::vector<double> truncated_gaussian_moments(double a, double b, int t_max) {
  if (t_max < 0) throw std::invalid_argument("moment order must be non-negative");
  if (!(a <= b)) throw std::invalid_argument("truncated moment needs a <= b");
  std::vector<double> m(static_cast<std::size_t>(t_max) + 1);
  m[0] = gaussian::interval_mass(a, b);
  if (t_max >= 1) m[1] = gaussian::pdf(a) - gaussian::pdf(b);
  for (int t = 2; t <= t_max; ++t) {
    m[static_cast<std::size_t>(t)] = (t - 1) * m[static_cast<std::size_t>(t - 2)] +
                                     edge_term(a, t - 1) - edge_term(b, t - 1);
  }
  return m;
}

double truncated_gaussian_moment(double a, double b, int t) {
  return truncated_gaussian_moments(a, b, t).back();
}

double truncated_gaussian_moment_quadrature(double a, double b, int t) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("quadrature oracle needs finite limits");
  auto f = [t](double x) { return std::pow(x, t) * gaussian::pdf(x); };
  return integrate_relative(f, a, b, 1e-15);
}

double measure_moment(const PiecewiseGaussianMeasure& measure, int t) {
  check_order(t);
  CompensatedSum acc;
  for (const auto& p : measure.pieces()) acc += piece_moment(p, t);
  const double value = acc.value() / measure.normalizer();
  if (!std::isfinite(value))
    throw MomentRangeError("moment of order " + std::to_string(t) + " is not representable");
  return value;
}

double measure_moment_quadrature(const PiecewiseGaussianMeasure& measure, int t) {
  check_order(t);
  CompensatedSum acc;
  for (const auto& p : measure.pieces()) {
    auto f = [&p, t](double x) { return std::pow(x, t) * p.scale * gaussian::pdf(x + p.shift); };
    acc += integrate_relative(f, p.lo, p.hi, 1e-15);
  }
  return acc.value() / measure.normalizer();
}

double periodic_box_moment_discrepancy(double delta, double epsilon, int t) {
  check_order(t);
  if (!(delta > 0.0) || !(epsilon > 0.0))
    throw std::invalid_argument("periodic_box_moment_discrepancy: delta, epsilon must be > 0");
  if (t % 2 != 0) return 0.0;  // the measure is symmetric
  const double sign = (t / 2) % 2 == 0 ? 1.0 : -1.0;
  CompensatedSum acc;
  for (int n = 1;; ++n) {
    const double w = 2.0 * std::numbers::pi * n / delta;
    const double exponent = -0.5 * w * w;
    if (exponent < -740.0) break;
    const double sinc = std::sin(w * epsilon) / (w * epsilon);
    const double term = 2.0 * sinc * sign * hermite_he(t, w) * std::exp(exponent);
    acc += term;
    if (n > 1 && std::abs(term) <= 1e-30 * std::abs(acc.value())) break;
  }
  return acc.value();
}

FourierBoundCertificate fourier_discrepancy_bound(int t, double delta) {
  if (t < 0) throw std::invalid_argument("fourier_discrepancy_bound: t must be >= 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("fourier_discrepancy_bound: delta must lie in (0, 1)");
  FourierBoundCertificate cert;
  cert.t = t;
  cert.delta = delta;

  // log of t! (2 delta / pi)^t, then the series in units of its first term.
  const double log_prefactor = std::lgamma(t + 1.0) + t * std::log(2.0 * delta / std::numbers::pi);
  const double a = std::numbers::pi / delta;
  const double first_exponent = -0.5 * a * a;
  CompensatedSum relative_series;
  for (int n = 1;; ++n) {
    const double rel_exponent = -0.5 * a * a * (static_cast<double>(n) * n - 1.0);
    const double rel = std::exp(rel_exponent);
    cert.series_terms.push_back(std::exp(log_prefactor + first_exponent + rel_exponent));
    relative_series += rel;
    if (rel < 1e-30) break;
  }
  cert.log_total = std::log(2.0) + log_prefactor + first_exponent + std::log(relative_series.value());
  cert.total = std::exp(cert.log_total);
  return cert;
}

double certified_normalized_bound(int t, double delta, double cutoff) {
  const double ft = fourier_discrepancy_bound(t, delta).total;
  const double f0 = fourier_discrepancy_bound(0, delta).total;
  if (std::sqrt(static_cast<double>(t)) > cutoff) return kInf;  // x^t G not yet decreasing
  const double tail_t = 2.0 * truncated_gaussian_moment(cutoff, kInf, t);
  const double tail_0 = 2.0 * gaussian::upper_tail(cutoff);
  const double e0 = f0 + tail_0;
  if (!(e0 < 1.0)) return kInf;
  return (ft + tail_t) / (1.0 - e0) + std::abs(gaussian::moment(t)) * e0 / (1.0 - e0);
}

ChiSquare chi_square_vs_gaussian(const PiecewiseGaussianMeasure& measure) {
  const double z = measure.normalizer();
  CompensatedSum closed, quad;
  for (const auto& p : measure.pieces()) {
    const double h = p.shift;
    closed += p.scale * p.scale * std::exp(h * h) *
              gaussian::interval_mass(p.lo + 2.0 * h, p.hi + 2.0 * h);
    auto ratio = [&p, h](double x) {
      // (scale G(x+h))^2 / G(x)
      return p.scale * p.scale * gaussian::kInvSqrt2Pi *
             std::exp(-(x + h) * (x + h) + 0.5 * x * x);
    };
    quad += integrate_relative(ratio, p.lo, p.hi, 1e-15);
  }
  return {closed.value() / (z * z) - 1.0, quad.value() / (z * z) - 1.0};
}

MomentReport moment_discrepancy_report(const HardPair& pair, int k) {
  check_order(k);
  const auto& cfg = pair.config;
  MomentReport r;
  r.k = k;
  const double growth = 2.0 + 8.0 * std::sqrt(std::log(1.0 / cfg.zeta));
  const double cutoff = cfg.n_max * cfg.delta + cfg.epsilon;
  const double d0 = periodic_box_moment_discrepancy(cfg.delta, cfg.epsilon, 0);

  r.ab_bound_holds = r.triangle_holds = r.certificate_dominates = r.oracles_agree = true;
  for (int t = 0; t <= k; ++t) {
    const double ma = measure_moment(pair.a, t);
    const double mb = measure_moment(pair.b, t);
    const double mg = gaussian::moment(t);
    const double qa = measure_moment_quadrature(pair.a, t);
    const double qb = measure_moment_quadrature(pair.b, t);
    r.moments_a.push_back(ma);
    r.moments_b.push_back(mb);
    r.moments_gaussian.push_back(mg);
    r.moments_a_quadrature.push_back(qa);
    r.moments_b_quadrature.push_back(qb);
    r.discrepancy_a.push_back(std::abs(ma - mg));
    r.discrepancy_b.push_back(std::abs(mb - mg));
    const double dt = periodic_box_moment_discrepancy(cfg.delta, cfg.epsilon, t);
    r.discrepancy_a_spectral.push_back(std::abs((dt - mg * d0) / (1.0 + d0)));
    r.difference_ab.push_back(std::abs(mb - ma));
    r.bound_ab.push_back(4.0 * cfg.epsilon * std::pow(growth, t));
    r.fourier_bounds.push_back(fourier_discrepancy_bound(t, cfg.delta).total);
    r.certified_a.push_back(certified_normalized_bound(t, cfg.delta, cutoff));

    const auto i = static_cast<std::size_t>(t);
    // Rounding slack of the direct route: moments are sums of O(1e2) pieces
    // whose magnitudes are bounded by E|G|^t-scale quantities.
    const double slack = 1e-12 * std::max(1.0, std::abs(mg));
    const double rel_a = std::abs(ma - qa) / std::max(1.0, std::abs(qa));
    const double rel_b = std::abs(mb - qb) / std::max(1.0, std::abs(qb));
    r.max_recurrence_quadrature_rel = std::max({r.max_recurrence_quadrature_rel, rel_a, rel_b});
    if (t <= 12 && std::max(rel_a, rel_b) > 1e-10) r.oracles_agree = false;
    if (r.difference_ab[i] > r.bound_ab[i] + slack) r.ab_bound_holds = false;
    if (r.discrepancy_b[i] > r.discrepancy_a[i] + r.bound_ab[i] + slack) r.triangle_holds = false;
    if (r.discrepancy_a_spectral[i] > r.certified_a[i] ||
        r.discrepancy_a[i] > r.certified_a[i] + slack)
      r.certificate_dominates = false;
  }
  return r;
}

ScalingFit discrepancy_scaling_fit(double zeta, double epsilon_over_delta,
                                   const std::vector<int>& d_values, int t) {
  if (t < 2 || t % 2 != 0) throw std::invalid_argument("scaling fit needs even t >= 2");
  if (d_values.size() < 2) throw std::invalid_argument("scaling fit needs >= 2 points");
  ScalingFit fit;
  std::vector<std::pair<double, double>> points;
  for (int d : d_values) {
    const double delta = HardPairConfig::delta_for(zeta, d);
    const double eps = epsilon_over_delta * delta;
    const double dt = periodic_box_moment_discrepancy(delta, eps, t);
    const double d0 = periodic_box_moment_discrepancy(delta, eps, 0);
    const double disc = std::abs((dt - gaussian::moment(t) * d0) / (1.0 + d0));
    points.emplace_back(1.0 / (delta * delta), std::log(disc));
  }
  std::sort(points.begin(), points.end());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(points.size());
  fit.monotone_decreasing = true;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [x, y] = points[i];
    fit.inverse_delta_squared.push_back(x);
    fit.log_discrepancy.push_back(y);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    if (i > 0 && !(y < points[i - 1].second)) fit.monotone_decreasing = false;
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

}  // namespace massart
