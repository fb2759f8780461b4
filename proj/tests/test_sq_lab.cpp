#include <cmath>
#include <memory>
#include <vector>

#include <doctest.h>

#include "massart/json_io.hpp"
#include "massart/moments.hpp"
#include "massart/sq_lab.hpp"

using namespace massart;

namespace {

std::shared_ptr<const HardPair> desk_pair() {
  static const auto p = std::make_shared<const HardPair>(build_hard_pair(HardPairConfig::make(0.05, 10, 0.05)));
  return p;
}

SQQuery label_query() {
  return make_query("y", [](std::span<const double>, int y) { return double(y); });
}

}  // namespace

TEST_CASE("honest answers for simple queries") {
  const NullDistribution null(5, 0.8);
  OracleConfig cfg;
  cfg.tau = 0.01;
  SQOracle oracle(null, cfg, 1);
  const auto one = make_query("1", [](std::span<const double>, int) { return 1.0; });
  CHECK(std::abs(oracle.answer(one) - 1.0) <= cfg.tau);
  CHECK(std::abs(oracle.answer(label_query()) - (2 * 0.8 - 1)) <= cfg.tau);
  CHECK(oracle.queries_used() == 2);
  CHECK(cfg.honest_samples() == 160000);
  CHECK(cfg.dense_samples() == 2560000);
}

TEST_CASE("queries are clamped to [-1, 1]") {
  const auto q = make_query("big", [](std::span<const double>, int) { return 5.0; });
  const std::vector<double> x{0.0};
  CHECK(q(x, 1) == 1.0);
  CHECK_THROWS(make_projected_query("bad", {1.0, 1.0}, [](double, int) { return 0.0; }));
}

TEST_CASE("honest oracle stays within tau in at least 99 of 100 repetitions") {
  Rng rng(2);
  const auto inst = make_instance(desk_pair(), random_unit_vector(5, rng), 0.3);
  const auto q = moment_query(std::vector<double>(inst.v().begin(), inst.v().end()), 1);
  const double truth = *exact_expectation(q, inst);
  OracleConfig cfg;
  cfg.tau = 0.02;
  int within = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    SQOracle oracle(inst, cfg, 1000 + s);
    within += std::abs(oracle.answer(q) - truth) <= cfg.tau;
  }
  CHECK(within >= 99);
}

TEST_CASE("exact expectations match Monte Carlo") {
  Rng rng(3);
  const auto inst = make_instance(desk_pair(), random_unit_vector(4, rng), 0.3);
  auto u = random_unit_vector(4, rng);
  for (int j = 0; j <= 2; ++j) {
    const auto q = moment_query(u, j);
    const double exact = *exact_expectation(q, inst);
    kernels::Evaluator f = [&q](std::span<const double> x, int y) { return q(x, y); };
    const std::size_t n = 1 << 20;
    const double mc = kernels::mc_means(inst, {&f, 1}, {n, 77}).front();
    CHECK(std::abs(mc - exact) <= 4.0 / std::sqrt(double(n)));
  }
  // Degenerate direction u = v.
  const auto qv = indicator_query(std::vector<double>(inst.v().begin(), inst.v().end()), desk_pair()->j1, "J1");
  CHECK(*exact_expectation(qv, inst) == doctest::Approx(0.7 * desk_pair()->a.mass_in(desk_pair()->j1)).epsilon(1e-10));
}

TEST_CASE("planted query separates the instance from the null") {
  Rng rng(4);
  const auto inst = make_instance(desk_pair(), random_unit_vector(20, rng), 0.3);
  const NullDistribution null(20, 0.7);
  const auto q = indicator_query(std::vector<double>(inst.v().begin(), inst.v().end()), desk_pair()->j1, "J1");
  OracleConfig cfg;
  cfg.tau = 0.01;
  SQOracle oi(inst, cfg, 5), on(null, cfg, 6);
  CHECK(std::abs(oi.answer(q) - on.answer(q)) > 5 * cfg.tau);
}

TEST_CASE("adversarial oracle is deterministic and within tau") {
  Rng rng(5);
  const auto inst = make_instance(desk_pair(), random_unit_vector(6, rng), 0.3);
  const NullDistribution null(6, 0.7);
  OracleConfig cfg;
  cfg.tau = 0.01;
  cfg.mode = OracleMode::kAdversarial;
  SQOracle a(inst, cfg, 9, &null), b(inst, cfg, 9, &null);
  const auto q = moment_query(random_unit_vector(6, rng), 2);
  const double x = a.answer(q), y = b.answer(q);
  CHECK(x == y);
  const double truth = *a.log().back().truth;
  CHECK(std::abs(x - truth) <= cfg.tau);
  CHECK_THROWS_AS(SQOracle(inst, cfg, 1), std::invalid_argument);
  // A hostile adversary is still clamped.
  cfg.adversary = [](double t, double, double) { return t + 10.0; };
  SQOracle c(inst, cfg, 9, &null);
  CHECK(c.answer(q) == doctest::Approx(truth + cfg.tau).epsilon(1e-15));
  CHECK(toward_null(0.5, 0.0, 0.1) == doctest::Approx(0.4));
  CHECK(toward_null(0.5, 0.45, 0.1) == doctest::Approx(0.45));
}

TEST_CASE("query budget") {
  const NullDistribution null(2, 0.5);
  OracleConfig cfg;
  cfg.tau = 0.1;
  cfg.query_budget = 2;
  SQOracle o(null, cfg, 1);
  o.answer(label_query());
  o.answer(label_query());
  CHECK_THROWS_AS(o.answer(label_query()), BudgetExhausted);
  CHECK(o.queries_used() == 2);
}

TEST_CASE("near-orthogonal sets") {
  Rng rng(6);
  const auto trivial = near_orthogonal_set(10, 1.0, 5, 0, rng);
  CHECK(trivial.vectors.size() == 5);
  CHECK(trivial.tries == 5);
  const auto s = near_orthogonal_set(200, 0.3, 100, 0, rng);
  CHECK(s.vectors.size() == 100);
  CHECK(max_pairwise_overlap(s.vectors) <= 0.3);
  CHECK(s.tries <= s.try_budget);
  CHECK(s.try_budget == implied_try_budget(200, 0.3, 100));
  CHECK(s.pair_bound == doctest::Approx(2 * std::exp(-0.09 * 200 / 4) + 2 * std::exp(-200.0 / 32)));
  for (const auto& v : s.vectors) CHECK(dot(v, v) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(near_orthogonal_set(2, 0.01, 50, 0, rng), NearOrthogonalExhausted);
}

TEST_CASE("constant learner") {
  Rng rng(7);
  const auto inst = make_instance(desk_pair(), random_unit_vector(5, rng), 0.3);
  OracleConfig cfg;
  SQOracle o(inst, cfg, 2);
  const auto h = learner_constant(o);
  CHECK(h.predict(std::vector<double>(5, 0.0)) == 1);
  const std::size_t n = 100000;
  CHECK(std::abs(heldout_error(h, inst, n, 3) - 0.3) <= 4 * std::sqrt(0.21 / n));

  const NullDistribution null(5, 0.9);
  SQOracle on(null, cfg, 2);
  const auto hn = learner_constant(on);
  CHECK(hn.predict(std::vector<double>(5, 0.0)) == 1);
  CHECK(std::abs(heldout_error(hn, null, n, 4) - 0.1) <= 4 * std::sqrt(0.09 / n));
}

TEST_CASE("Chow learner on a realizable halfspace") {
  const HalfspaceSource src({1.0, 0.0, 0.0, 0.0});
  OracleConfig cfg;
  cfg.tau = 0.01;
  SQOracle o(src, cfg, 8);
  const auto h = learner_chow(o, 4, 2);
  CHECK(heldout_error(h, src, 100000, 9) < 0.05);
}

TEST_CASE("Chow learner on the null distribution") {
  const NullDistribution null(4, 0.7);
  OracleConfig cfg;
  cfg.tau = 0.01;
  SQOracle o(null, cfg, 10);
  const auto h = learner_chow(o, 4, 2);
  const std::size_t n = 100000;
  CHECK(std::abs(heldout_error(h, null, n, 11) - 0.3) <= 4 * std::sqrt(0.21 / n));
}

TEST_CASE("small distinguishing experiment") {
  ExperimentConfig cfg;
  cfg.desk = HardPairConfig::make(0.05, 10, 0.05);
  cfg.seeds = {1, 2};
  cfg.heldout = 20000;
  cfg.directions = 5;
  const auto rep = distinguishing_experiment(cfg);
  REQUIRE(rep.seeds.size() == 2);
  CHECK(rep.planted_gap_ok);
  CHECK(rep.moment_gaps_ok);
  const HardPair p = build_hard_pair(cfg.desk);
  const double chi = chi_square_vs_gaussian(p.a).closed_form + chi_square_vs_gaussian(p.b).closed_form;
  CHECK(std::abs(rep.alpha_chi - chi) <= 1e-8);
  CHECK(rep.c == doctest::Approx(1.0 / (144 * std::log(20.0) * std::log(20.0))));
  CHECK(rep.N_bound > 0);
  CHECK_FALSE(rep.N_bound_caveat.empty());
  for (const auto& s : rep.seeds) {
    CHECK(s.planted.gap > 5 * cfg.oracle.tau);
    CHECK(s.moment_queries.size() == cfg.directions * 3);
    for (double ov : s.direction_overlaps) CHECK(std::abs(ov) <= cfg.direction_overlap);
    CHECK(s.learner_errors.size() == 2);
  }
  const auto j = io::to_json(rep);
  for (const char* key : {"nu", "rho", "alpha_chi", "N_bound", "tau", "queries_used", "gaps", "learner_errors", "seeds"})
    CHECK(j.contains(key));
}
