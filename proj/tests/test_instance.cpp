#include <cmath>
#include <memory>
#include <vector>

#include <doctest.h>

#include "massart/instance.hpp"
#include "massart/numeric.hpp"

using namespace massart;

namespace {

constexpr double kOptEta03 = 4.3393537591698991321e-14;  // mpmath, 50 digits

std::shared_ptr<const HardPair> desk_pair() {
  static const auto p = std::make_shared<const HardPair>(build_hard_pair(HardPairConfig::make(0.05, 10, 0.05)));
  return p;
}

std::vector<double> e1(std::size_t m) {
  std::vector<double> v(m, 0.0);
  v[0] = 1.0;
  return v;
}

// Horner in double-double; the oracle for the sign of q.
DoubleDouble horner_dd(const std::vector<DoubleDouble>& c, double t) {
  DoubleDouble acc;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * t + c[i];
  return acc;
}

bool near_endpoint(const IntervalUnion& u, double t, double tol) {
  for (const auto& iv : u.intervals())
    if (std::abs(t - iv.lo) <= tol || std::abs(t - iv.hi) <= tol) return true;
  return false;
}

}  // namespace

TEST_CASE("make_instance contract") {
  auto pair = desk_pair();
  const auto half = make_instance(pair, e1(5), 0.5);
  CHECK(half.p() == 0.5);
  CHECK(make_instance(pair, e1(5), 0.3).p() == 1.0 - 0.3);
  CHECK_THROWS_AS(make_instance(pair, e1(5), 0.6), ConfigError);
  CHECK_THROWS_AS(make_instance(pair, e1(5), 0.0), ConfigError);
  CHECK_THROWS_AS(make_instance(pair, {0.6, 0.6, 0.0}, 0.3), std::invalid_argument);
  const auto inst = make_instance(pair, e1(4), 0.3);
  const std::vector<double> x{0.7, -1.0, 2.0, 3.0};
  CHECK(inst.projection(x) == 0.7);
  CHECK(inst.j2_polynomial().size() == 2 * pair->j2.size() + 1);
  CHECK(inst.j2_polynomial().size() - 1 <= static_cast<std::size_t>(4 * pair->config.d + 2));
}

TEST_CASE("Householder frame embeds along v") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 2 + trial % 9;
    auto v = random_unit_vector(m, rng);
    if (trial % 2) v[0] = -std::abs(v[0]);
    const HouseholderFrame frame(v);
    std::vector<double> g(m - 1), x(m);
    for (auto& gi : g) gi = rng.normal();
    const double t = rng.normal();
    frame.embed(t, g, x);
    CHECK(dot(v, x) == doctest::Approx(t).epsilon(1e-12));
    double gg = 0, xx = 0;
    for (double gi : g) gg += gi * gi;
    for (double xi : x) xx += xi * xi;
    CHECK(xx == doctest::Approx(t * t + gg).epsilon(1e-12));
  }
}

TEST_CASE("sampling: label rate, supports, orthogonal normality") {
  auto pair = desk_pair();
  Rng rng(17);
  const auto inst = make_instance(pair, random_unit_vector(6, rng), 0.3);
  const std::size_t n = 200000;
  const auto batch = sample_labeled(inst, rng, n);
  double pos = 0;
  // Component along a unit vector orthogonal to v.
  std::vector<double> w(6, 0.0);
  w[0] = inst.v()[1];
  w[1] = -inst.v()[0];
  const double wn = std::hypot(w[0], w[1]);
  for (auto& wi : w) wi /= wn;
  double s = 0, s2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = inst.projection(batch.row(i));
    if (batch.y[i] > 0) {
      ++pos;
      REQUIRE_FALSE(pair->j2.contains(t));
    } else {
      REQUIRE_FALSE(pair->j1.contains(t));
    }
    const double z = dot(w, batch.row(i));
    s += z;
    s2 += z * z;
  }
  const double sigma = std::sqrt(0.7 * 0.3 / n);
  CHECK(std::abs(pos / n - 0.7) <= 4 * sigma);
  CHECK(std::abs(s / n) <= 4 / std::sqrt(double(n)));
  CHECK(std::abs(s2 / n - 1.0) <= 4 * std::sqrt(2.0 / n));
}

TEST_CASE("flip probability examples") {
  auto pair = desk_pair();
  const auto inst = make_instance(pair, e1(3), 0.3);
  const double delta = pair->config.delta;
  for (int n = -pair->config.d; n <= pair->config.d; ++n) CHECK(inst.flip_probability_at(n * delta) == 0.0);
  for (int n : {11, 12, -11, -15}) CHECK(inst.flip_probability_at(n * delta) == 0.3);
  CHECK_THROWS_AS(inst.flip_probability_at(delta / 2), ZeroDensityError);
  const std::vector<double> x{12 * delta, 0.5, -0.5};
  CHECK(inst.flip_probability(x) == 0.3);
}

TEST_CASE("OPT") {
  auto pair = desk_pair();
  const auto inst = make_instance(pair, e1(3), 0.3);
  CHECK(inst.opt_error() <= 0.3 * 0.05);
  CHECK(std::abs(inst.opt_error() - kOptEta03) <= 1e-9 * kOptEta03);
  CHECK(make_instance(pair, e1(3), 1e-9).opt_error() < 1e-20);
}

TEST_CASE("Massart properties on samples") {
  auto pair = desk_pair();
  Rng rng(23);
  const auto inst = make_instance(pair, random_unit_vector(20, rng), 0.3);
  const std::size_t n = 100000;
  const auto batch = sample_labeled(inst, rng, n);
  double bayes_err = 0, const_err = 0, flips = 0, off = 0, off_neg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = inst.flip_probability(batch.row(i));
    REQUIRE((f == 0.0 || f == 0.3));
    flips += f;
    bayes_err += inst.ptf_sign(batch.row(i)) != batch.y[i];
    const_err += batch.y[i] != 1;
    if (f > 0) {
      ++off;
      off_neg += batch.y[i] < 0;
    }
  }
  const double opt = inst.opt_error();
  CHECK(std::abs(bayes_err / n - opt) <= 4 * std::sqrt(opt * (1 - opt) / n) + 1.0 / n);
  CHECK(std::abs(const_err / n - 0.3) <= 4 * std::sqrt(0.21 / n));
  CHECK(std::abs(flips / n - opt) <= 4 * 0.3 * std::sqrt(opt / n) + 1.0 / n);
  if (off > 0) CHECK(std::abs(off_neg / off - 0.3) <= 4 * std::sqrt(0.21 / off));
}

TEST_CASE("conditional label law off J at a tail-heavy configuration") {
  // zeta = 0.45 leaves the most mass outside J1 u J2 (a few 1e-5).
  auto pair = std::make_shared<const HardPair>(build_hard_pair(HardPairConfig::make(0.45, 4, 0.05)));
  Rng rng(29);
  const auto inst = make_instance(pair, random_unit_vector(3, rng), 0.3);
  double off = 0, off_neg = 0;
  for (int round = 0; round < 10; ++round) {
    const auto batch = sample_labeled(inst, rng, 2000000);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (inst.flip_probability(batch.row(i)) > 0) {
        ++off;
        off_neg += batch.y[i] < 0;
      }
    }
  }
  REQUIRE(off > 300);
  CHECK(std::abs(off_neg / off - 0.3) <= 4 * std::sqrt(0.21 / off));
}

TEST_CASE("interval polynomial") {
  const auto q1 = build_interval_polynomial(IntervalUnion({{-1, 1}}));
  REQUIRE(q1.size() == 3);
  CHECK(q1[0] == -1.0);
  CHECK(q1[1] == 0.0);
  CHECK(q1[2] == 1.0);
  CHECK(evaluate_polynomial(q1, 0.0) < 0);
  const IntervalUnion two({{0, 1}, {2, 3}});
  const auto q2 = build_interval_polynomial(two);
  CHECK(evaluate_polynomial(q2, 1.5) > 0);
  CHECK(evaluate_polynomial(q2, 0.5) < 0);
  CHECK(evaluate_polynomial(q2, 2.5) < 0);
  CHECK(evaluate_polynomial(q2, 4.0) > 0);
  for (double r : {0.0, 1.0, 2.0, 3.0}) CHECK(evaluate_polynomial(q2, r) == 0.0);
  CHECK_THROWS(build_interval_polynomial(IntervalUnion()));

  const auto& j2 = desk_pair()->j2;
  const auto qd = build_interval_polynomial_dd(j2);
  // Roots up to double-double rounding. Expansion error scales with the product
  // of the factors taken in absolute value, prod (t^2 + |a+b| |t| + |ab|).
  for (const auto& iv : j2.intervals()) {
    for (double r : {iv.lo, iv.hi}) {
      double scale = 1;
      for (const auto& f : j2.intervals()) scale *= r * r + std::abs(f.lo + f.hi) * std::abs(r) + std::abs(f.lo * f.hi);
      CHECK(std::abs(horner_dd(qd, r).value()) <= 1e-29 * scale);
    }
  }
}

TEST_CASE("ptf_sign agrees with the sign of q away from endpoints") {
  auto pair = desk_pair();
  const auto inst = make_instance(pair, e1(2), 0.3);
  const auto& qd = inst.j2_polynomial_dd();
  const double edge = pair->config.d * pair->config.delta + 1.0;
  Rng rng(31);
  int checked = 0;
  for (int i = 0; i < 100000; ++i) {
    const double t = (2 * rng.uniform() - 1) * edge;
    if (near_endpoint(pair->j2, t, 1e-9)) continue;
    ++checked;
    const std::vector<double> x{t, 0.0};
    REQUIRE(inst.ptf_sign(x) == horner_dd(qd, t).sign());
  }
  CHECK(checked > 99000);
  // Closed membership at endpoints.
  const auto& iv = pair->j2[3];
  CHECK(inst.ptf_sign(std::vector<double>{iv.lo, 0.0}) == -1);
  CHECK(inst.ptf_sign(std::vector<double>{pair->j1[3].lo, 0.0}) == 1);
}

TEST_CASE("null distribution") {
  Rng rng(37);
  for (double p : {0.5, 0.7}) {
    const std::size_t n = 200000, m = 4;
    const auto batch = sample_null(m, p, rng, n);
    double ys = 0;
    std::vector<double> yx(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      ys += batch.y[i];
      for (std::size_t j = 0; j < m; ++j) yx[j] += batch.y[i] * batch.row(i)[j];
    }
    CHECK(std::abs(ys / n - (2 * p - 1)) <= 4 * std::sqrt(4 * p * (1 - p) / n));
    for (double s : yx) CHECK(std::abs(s / n) <= 4 / std::sqrt(double(n)));
  }
}

TEST_CASE("halfspace source labels by the sign of <w, x>") {
  const HalfspaceSource src({1.0, 0.0});
  Rng rng(41);
  const auto batch = src.draw_batch(rng, 1000);
  for (std::size_t i = 0; i < batch.size(); ++i) CHECK(batch.y[i] == (batch.row(i)[0] >= 0 ? 1 : -1));
}
