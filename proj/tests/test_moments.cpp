#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "massart/hard_pair.hpp"
#include "massart/moments.hpp"
#include "massart/rng.hpp"

using namespace massart;

namespace {

// mpmath, 50 digits (tests/oracle/frozen_values.py).
constexpr double kM4Half = 0.0045624556601053190585;
constexpr double kEA2 = 0.99999999999999979267;
constexpr double kEA4 = 3.0000000000000158329;
constexpr double kEA6 = 14.999999999998840307;
constexpr double kEB1 = -0.19999999999997107097;
constexpr double kEB3 = -0.60799999999496964966;
constexpr double kEB4 = 3.2415999999980039242;
constexpr double kBoundAB2 = 50.22261075014571088;
constexpr double kFourierT0Delta05 = 5.3505759821484793625e-9;
constexpr double kChi2A = 5.9232735304091413353;
constexpr double kChi2B = 6.2058176831293557783;

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

double pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

const HardPair& desk() {
  static const HardPair p = build_hard_pair(HardPairConfig::make(0.05, 10, 0.05));
  return p;
}

}  // namespace

TEST_CASE("gaussian moments") {
  CHECK(gaussian_moment(0) == 1.0);
  CHECK(gaussian_moment(2) == 1.0);
  CHECK(gaussian_moment(6) == 15.0);
  CHECK(gaussian_moment(7) == 0.0);
  CHECK(gaussian_moment(12) == 10395.0);
}

TEST_CASE("truncated moments: base cases and quadrature") {
  CHECK(truncated_gaussian_moment(-40, 40, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(truncated_gaussian_moment(-INFINITY, INFINITY, 0) == 1.0);
  CHECK(truncated_gaussian_moment(0, 1, 1) == doctest::Approx(pdf(0) - pdf(1)).epsilon(1e-15));
  CHECK(rel_close(truncated_gaussian_moment(-0.5, 0.5, 4), kM4Half, 1e-12));
  CHECK(rel_close(truncated_gaussian_moment_quadrature(-0.5, 0.5, 4), kM4Half, 1e-12));
  const auto all = truncated_gaussian_moments(-1.3, 2.1, 10);
  REQUIRE(all.size() == 11);
  for (int t = 0; t <= 10; ++t)
    CHECK(rel_close(all[t], truncated_gaussian_moment_quadrature(-1.3, 2.1, t), 1e-12));
}

TEST_CASE("measure moments against the high-precision oracle") {
  const auto& p = desk();
  CHECK(measure_moment(p.a, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(measure_moment(p.b, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(measure_moment(p.a, 1)) <= 1e-15);
  CHECK(rel_close(measure_moment(p.a, 2), kEA2, 1e-13));
  CHECK(rel_close(measure_moment(p.a, 4), kEA4, 1e-13));
  CHECK(rel_close(measure_moment(p.a, 6), kEA6, 1e-13));
  CHECK(rel_close(measure_moment(p.b, 1), kEB1, 1e-13));
  CHECK(rel_close(measure_moment(p.b, 3), kEB3, 1e-13));
  CHECK(rel_close(measure_moment(p.b, 4), kEB4, 1e-13));
  CHECK_THROWS_AS(measure_moment(p.a, kMaxMomentOrder + 1), MomentRangeError);
}

TEST_CASE("E B^3 - E A^3 agrees with Monte Carlo") {
  const auto& p = desk();
  Rng rng = Rng::stream(3, 0);
  const int n = 2000000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double a = p.a.sample(rng), b = p.b.sample(rng);
    const double z = b * b * b - a * a * a;
    s += z;
    s2 += z * z;
  }
  const double mean = s / n, sd = std::sqrt(s2 / n - mean * mean);
  const double exact = measure_moment(p.b, 3) - measure_moment(p.a, 3);
  CHECK(std::abs(mean - exact) <= 4 * sd / std::sqrt(double(n)));
}

TEST_CASE("moment report at the desk configuration") {
  const MomentReport r = moment_discrepancy_report(desk(), 12);
  CHECK(r.k == 12);
  CHECK(r.discrepancy_a[0] == doctest::Approx(0.0));
  CHECK(rel_close(r.bound_ab[2], kBoundAB2, 1e-14));
  for (int t = 0; t <= 12; ++t) {
    CAPTURE(t);
    CHECK(r.moments_gaussian[t] == gaussian_moment(t));
    CHECK(r.discrepancy_a[t] >= 0.0);
    CHECK(r.discrepancy_b[t] >= 0.0);
    CHECK(r.difference_ab[t] <= r.bound_ab[t] + 1e-12 * std::max(1.0, gaussian_moment(t)));
    CHECK(r.discrepancy_b[t] <= r.discrepancy_a[t] + r.bound_ab[t]);
  }
  CHECK(r.max_recurrence_quadrature_rel <= 1e-10);
  CHECK(r.pass());
}

TEST_CASE("oracles agree across configurations") {
  for (int d : {8, 12, 16}) {
    for (double frac : {0.05, 0.12}) {
      const double delta = HardPairConfig::delta_for(0.05, d);
      const HardPair p = build_hard_pair(HardPairConfig::make(0.05, d, frac * delta));
      for (int t = 0; t <= 12; ++t) {
        CAPTURE(d);
        CAPTURE(t);
        for (const auto* m : {&p.a, &p.b}) {
          const double rec = measure_moment(*m, t), quad = measure_moment_quadrature(*m, t);
          CHECK(std::abs(rec - quad) <= 1e-10 * std::max(1.0, std::abs(quad)));
        }
      }
    }
  }
}

TEST_CASE("Fourier certificate") {
  const auto c0 = fourier_discrepancy_bound(0, 0.5);
  CHECK(rel_close(c0.total, kFourierT0Delta05, 1e-12));
  CHECK(c0.series_terms.size() >= 1);
  // Decreasing in 1/delta.
  for (int t : {0, 2, 5, 8}) {
    double prev = INFINITY;
    for (double delta : {0.9, 0.69, 0.5, 0.4, 0.3, 0.2}) {
      const double cur = fourier_discrepancy_bound(t, delta).total;
      CHECK(cur < prev);
      prev = cur;
    }
  }
  // Dominates the measured discrepancy of the periodic box measure.
  for (double delta : {0.3, 0.4, 0.5, 0.69, 0.69232735304091413527}) {
    for (int t = 0; t <= 8; ++t) {
      CAPTURE(delta);
      CAPTURE(t);
      const double measured = std::abs(periodic_box_moment_discrepancy(delta, delta / 10, t));
      CHECK(measured <= fourier_discrepancy_bound(t, delta).total);
    }
  }
}

TEST_CASE("scaling fit has negative slope") {
  for (int t : {2, 4}) {
    const auto fit = discrepancy_scaling_fit(0.05, 0.1, {10, 12, 14, 16, 18, 20}, t);
    CHECK(fit.inverse_delta_squared.size() >= 4);
    CHECK(fit.slope < 0.0);
    CHECK(fit.monotone_decreasing);
  }
}

TEST_CASE("normalization bounds") {
  for (double delta : {0.3, 0.4, 0.5, 0.69}) {
    for (double ratio : {0.05, 0.1, 0.12}) {
      const auto m = periodic_box_measure(delta, ratio * delta, static_cast<int>(std::ceil(12 / delta)));
      const double z = m.total_mass().value;
      CHECK(z >= 0.2);
      CHECK(std::abs(z - 1.0) <= fourier_discrepancy_bound(0, delta).total + 1e-14);
    }
  }
}

TEST_CASE("chi-square closed forms") {
  const auto& p = desk();
  const auto a = chi_square_vs_gaussian(p.a);
  const auto b = chi_square_vs_gaussian(p.b);
  CHECK(rel_close(a.closed_form, kChi2A, 1e-13));
  CHECK(rel_close(b.closed_form, kChi2B, 1e-12));
  CHECK(std::abs(a.closed_form - a.quadrature) <= 1e-8);
  CHECK(std::abs(b.closed_form - b.quadrature) <= 1e-8);
  const double delta = p.config.delta, e = p.config.epsilon;
  CHECK(a.closed_form == doctest::Approx(delta / (2 * e) / p.a.normalizer() - 1).epsilon(1e-14));
  const double bound = 25.0 / 4.0 * (1 + std::exp(16 * e * e)) * (delta / e) * (delta / e);
  CHECK(a.closed_form <= bound);
  CHECK(b.closed_form <= bound);
  // Full coverage gives the Gaussian back.
  const auto full = periodic_box_measure(0.5, 0.25, 24);
  CHECK(std::abs(chi_square_vs_gaussian(full).closed_form) <= 1e-12);
}

TEST_CASE("certified normalized bound covers the measured discrepancy") {
  const auto& p = desk();
  const double cutoff = p.config.n_max * p.config.delta + p.config.epsilon;
  const MomentReport r = moment_discrepancy_report(p, 8);
  for (int t = 0; t <= 8; ++t) {
    const double cert = certified_normalized_bound(t, p.config.delta, cutoff);
    CHECK(r.discrepancy_a_spectral[t] <= cert);
  }
  CHECK(std::isinf(certified_normalized_bound(4, 0.69, 1.0)));
}
