#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <doctest.h>

#include "massart/instance.hpp"
#include "massart/planner.hpp"

using namespace massart;

namespace {

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

struct FrozenPlan {
  double log_m, log_tau, m, d, k, delta, log_epsilon, m_prime_log;
};

// mpmath, 50 digits (tests/oracle/frozen_values.py); zeta = exp(-sqrt(log M)), eta = 0.49.
const FrozenPlan kPlans[] = {
    {1e3, -1.4990261041803616524, 95937671.0, 36.0, 2.0, 0.62482369465594342266,
     -9.9227170432474307989, 3946.5293794855738909},
    {1e4, -19.998295711560542579, 127989092554.0, 620.0, 18.0, 0.064516129032258064516,
     -106.17314708163737048, 89602.433881230781967},
    {1e5, -323.78963850295811691, 207225368641894.0, 6155.0, 225.0, 0.011556649293510464996,
     -1530.4956921098335353, 1140410.1240171177771},
};

double exact_log_binomial(unsigned n, unsigned r) {
  using namespace boost::multiprecision;
  cpp_int c = 1;
  for (unsigned i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return static_cast<double>(log(cpp_bin_float_50(c)));
}

}  // namespace

TEST_CASE("schedule matches the high-precision oracle") {
  for (const auto& f : kPlans) {
    CAPTURE(f.log_m);
    const auto p = evaluate_schedule(f.log_m, 0.49, std::exp(-std::sqrt(f.log_m)));
    CHECK(rel_close(p.log_tau, f.log_tau, 1e-13));
    CHECK(p.m == f.m);
    CHECK(p.d == f.d);
    CHECK(p.k == f.k);
    CHECK(p.k >= p.k_real);
    CHECK(p.k < p.k_real + 1);
    CHECK(rel_close(p.delta, f.delta, 1e-13));
    CHECK(rel_close(p.log_epsilon, f.log_epsilon, 1e-13));
    CHECK(rel_close(p.m_prime_log, f.m_prime_log, 1e-12));
    CHECK(rel_close(p.c, 1.0 / (144.0 * f.log_m), 1e-13));
    CHECK(std::isfinite(p.m_prime_log));
  }
}

TEST_CASE("default constants do not give a feasible schedule at these scales") {
  for (const auto& f : kPlans) {
    const auto p = evaluate_schedule(f.log_m, 0.49, std::exp(-std::sqrt(f.log_m)));
    CHECK_FALSE(p.feasible());
    bool names_binomial = false;
    for (const auto& v : p.violations) names_binomial |= v.find("M_prime_log") != std::string::npos;
    CHECK(names_binomial);
    CHECK_THROWS_AS(plan(f.log_m, 0.49, std::exp(-std::sqrt(f.log_m))), InfeasiblePlan);
  }
}

TEST_CASE("plans returned by plan() satisfy every constraint") {
  // Feasible region search: small constants and a huge M.
  const Constants small{1.0, 1e-9, 0.1, 1e-3};
  const double log_m = 1e12, zeta = 0.01;
  const auto p = plan(log_m, 0.3, zeta, small);
  CHECK(p.feasible());
  CHECK(p.log_epsilon < p.log_delta_over_8);
  CHECK(p.delta < 1.0);
  CHECK(p.d >= 2.0);
  CHECK(p.m_prime_log <= p.log_m_scale);
}

TEST_CASE("schedule input validation") {
  CHECK_THROWS_AS(evaluate_schedule(1e4, 0.6, 0.01), ConfigError);
  CHECK_THROWS_AS(evaluate_schedule(1e4, 0.0, 0.01), ConfigError);
  CHECK_NOTHROW(evaluate_schedule(1e4, 0.3, 0.3));  // zeta = eta is allowed
  CHECK_THROWS_AS(evaluate_schedule(1e4, 0.3, 0.31), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_schedule(1e4, 0.3, 0.1, Constants{-1, 1, 1, 1}), std::invalid_argument);
  const auto tiny = evaluate_schedule(1e4, 0.49, std::exp(-100.0), Constants{1e-6, 64, 8, 4});
  CHECK_FALSE(tiny.feasible());
}

TEST_CASE("schedule monotonicity") {
  const double zeta = 1e-3;
  double prev_tau = 0, prev_m = 0, prev_d = 0;
  for (double log_m : {50.0, 1e2, 1e3, 1e4, 1e5, 1e6}) {
    const auto p = evaluate_schedule(log_m, 0.4, zeta);
    const double lit = -p.log_tau;
    CHECK(lit > prev_tau);
    CHECK(p.m >= prev_m);
    CHECK(p.d >= prev_d);
    prev_tau = lit;
    prev_m = p.m;
    prev_d = p.d;
  }
  // No overflow for M up to e^(1e6); exp(-sqrt(1e6)) underflows, so take the smallest normal-range zeta.
  const auto big = evaluate_schedule(1e6, 0.49, std::exp(-700.0));
  CHECK(std::isfinite(big.m_prime_log));
  CHECK(std::isfinite(big.log_epsilon));
}

TEST_CASE("log_binomial") {
  CHECK(log_binomial(4, 2) == doctest::Approx(std::log(6.0)).epsilon(1e-15));
  CHECK(log_binomial(17, 0) == 0.0);
  CHECK(log_binomial(17, 17) == 0.0);
  CHECK(rel_close(log_binomial(100, 50), 66.783841652017426009, 1e-13));
  CHECK(std::isfinite(log_binomial(1e300, 10)));
  CHECK(std::isfinite(log_binomial(1e15, 5e14)));
  Rng rng(99);
  for (int i = 0; i < 20; ++i) {
    const unsigned n = 1 + static_cast<unsigned>(rng.next_u64() % 400);
    const unsigned r = static_cast<unsigned>(rng.next_u64() % (n + 1));
    CAPTURE(n);
    CAPTURE(r);
    const double exact = exact_log_binomial(n, r);
    const double got = log_binomial(n, r);
    if (exact == 0.0)
      CHECK(got == 0.0);
    else
      CHECK(rel_close(got, exact, 1e-10));
  }
}

TEST_CASE("desk configurations") {
  const auto c = desk_config(0.05, 10, 0.05);
  CHECK(c.delta == doctest::Approx(0.69232735304091413527).epsilon(1e-15));
  CHECK(c.delta / 8 == doctest::Approx(0.0865409191).epsilon(1e-9));
  CHECK_THROWS_AS(desk_config(0.05, 6, 0.01), ConfigError);
  CHECK_THROWS_AS(desk_config(0.05, 1, 0.01), ConfigError);
}

TEST_CASE("Tsybakov translation") {
  const TsybakovParams half{1.0, 0.5};
  CHECK(tsybakov_to_massart(half, 0.05) == doctest::Approx(0.45).epsilon(1e-15));
  const TsybakovParams tp{2.0, 0.3};
  const double boundary = tp.a_const * std::pow(0.5, tp.alpha / (1 - tp.alpha));
  CHECK_THROWS_AS(tsybakov_to_massart(tp, boundary), ConfigError);
  CHECK_THROWS_AS(tsybakov_to_massart(TsybakovParams{1.0, 1.0}, 0.1), std::invalid_argument);
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const TsybakovParams r{0.5 + 3.5 * rng.uniform(), 0.1 + 0.8 * rng.uniform()};
    const double eta = 0.01 + 0.489 * rng.uniform();
    const double z = massart_to_tsybakov_zeta(r, eta);
    CHECK(std::abs(tsybakov_to_massart(r, z) - eta) <= 1e-12);
  }
}

TEST_CASE("Tsybakov condition on the desk instance") {
  const TsybakovParams tp{1.0, 0.5};
  const double zeta = 0.05;
  const double eta = tsybakov_to_massart(tp, zeta);
  auto pair = std::make_shared<const HardPair>(build_hard_pair(desk_config(zeta, 10, 0.05)));
  Rng rng(8);
  const auto inst = make_instance(pair, random_unit_vector(4, rng), eta);
  std::vector<double> grid;
  for (int i = 1; i <= 100; ++i) grid.push_back(i / 202.0);
  CHECK(verify_tsybakov(inst, tp, grid));
  for (const auto& pt : tsybakov_profile(inst, tp, grid)) {
    if (pt.t < 0.5 - eta)
      CHECK(pt.probability == 0.0);
    else
      CHECK(pt.probability == doctest::Approx(inst.off_j_mass()).epsilon(1e-15));
  }
  CHECK_THROWS(verify_tsybakov(inst, tp, {0.0}));
}
