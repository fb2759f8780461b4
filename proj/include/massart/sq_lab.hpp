#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "massart/hard_pair.hpp"
#include "massart/instance.hpp"
#include "massart/kernels.hpp"

namespace massart {

/// A statistical query: a bounded function of (x, y). Values are clamped to
/// [-1, 1]. Queries that depend on x only through <u, x> also carry that
/// one-dimensional form, which enables exact expectations.
struct SQQuery {
  std::string description;
  kernels::Evaluator evaluator;
  std::vector<double> direction;                  ///< unit u, or empty
  std::function<double(double s, int y)> projected;  ///< value as a function of <u,x>

  double operator()(std::span<const double> x, int y) const;
  bool is_projected() const noexcept { return static_cast<bool>(projected); }
};

SQQuery make_query(std::string description, kernels::Evaluator f);
SQQuery make_projected_query(std::string description, std::vector<double> u,
                             std::function<double(double, int)> f);

/// Exact E[q(x, y)] when the query is projected and the source exposes its
/// one-dimensional law; integrates the projected density by adaptive quadrature.
std::optional<double> exact_expectation(const SQQuery& query, const LabeledSource& source);

enum class OracleMode { kHonest, kAdversarial };

/// Maps (true value, null value, tau) to an answer within tau of the truth.
using Adversary = std::function<double(double truth, double null_value, double tau)>;

/// Moves the truth toward the null value by at most tau.
double toward_null(double truth, double null_value, double tau);

struct OracleConfig {
  double tau = 0.01;
  OracleMode mode = OracleMode::kHonest;
  double sample_constant = 16.0;  ///< honest budget ceil(C / tau^2) samples per batch
  std::size_t query_budget = 100000;
  Adversary adversary;            ///< empty selects toward_null

  std::size_t honest_samples() const;
  /// Sample size of the dense fallback when no exact expectation exists: 4 sigma <= tau / 4.
  std::size_t dense_samples() const;
  void validate() const;
};

class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleLogEntry {
  std::string description;
  double answer = 0.0;
  std::optional<double> truth;
};

/// Answers statistical queries about one source. Holds mutable budget state;
/// one oracle must not be shared across threads.
class SQOracle {
 public:
  /// `null_reference` is required in adversarial mode (the default adversary
  /// pulls answers toward its value).
  SQOracle(const LabeledSource& source, OracleConfig config, std::uint64_t seed,
           const LabeledSource* null_reference = nullptr);

  double answer(const SQQuery& query);
  /// Non-adaptive batch: honest mode shares one fresh sample set across the batch.
  std::vector<double> answer_batch(std::span<const SQQuery> queries);

  std::size_t queries_used() const noexcept { return used_; }
  const std::vector<OracleLogEntry>& log() const noexcept { return log_; }
  const OracleConfig& config() const noexcept { return config_; }

 private:
  double true_value(const SQQuery& q, const LabeledSource& src, std::uint64_t stream);

  const LabeledSource& source_;
  const LabeledSource* null_;
  OracleConfig config_;
  std::uint64_t seed_;
  std::uint64_t calls_ = 0;
  std::size_t used_ = 0;
  std::vector<OracleLogEntry> log_;
};

/// Pair failure bound 2 exp(-c^2 m / 4) + 2 exp(-m / 32) for two random unit vectors.
double pair_overlap_bound(std::size_t m, double c);

/// Tries needed when each candidate is rejected with at most pair_bound per accepted vector:
/// target + ceil(pair_bound * target (target - 1) / 2).
std::size_t implied_try_budget(std::size_t m, double c, std::size_t target);

class NearOrthogonalExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NearOrthogonalSet {
  std::vector<std::vector<double>> vectors;
  std::size_t tries = 0;
  std::size_t try_budget = 0;
  double pair_bound = 0.0;
  double max_overlap = 0.0;
  bool size_guard_ok = false;  ///< target <= exp(c^2 m / 64)
};

/// Uniform unit vectors kept when |<u, w>| <= c against every vector kept so far.
/// `max_tries` = 0 selects implied_try_budget.
NearOrthogonalSet near_orthogonal_set(std::size_t m, double c, std::size_t target_size,
                                      std::size_t max_tries, Rng& rng);

double max_pairwise_overlap(const std::vector<std::vector<double>>& vectors);

struct Hypothesis {
  std::string name;
  std::function<int(std::span<const double>)> predict;
};

Hypothesis learner_constant(SQOracle& oracle);

/// Degree-bounded correlation learner: estimates E[y phi_a(x)] for the clamped
/// monomials phi_a(x) = prod_i clamp(x_i / 3, -1, 1)^a_i, 1 <= |a| <= degree,
/// drops coefficients within tau of zero, then picks a threshold for
/// sign(sum c_a phi_a - theta) by error queries.
Hypothesis learner_chow(SQOracle& oracle, std::size_t m, int degree);

/// Fraction of fresh samples misclassified.
double heldout_error(const Hypothesis& h, const LabeledSource& source, std::size_t n,
                     std::uint64_t seed);

/// y * clamp(<u,x> / 3, -1, 1)^j.
SQQuery moment_query(std::vector<double> u, int j);
/// 1[<u,x> in region].
SQQuery indicator_query(std::vector<double> u, IntervalUnion region, std::string description);

struct ExperimentConfig {
  HardPairConfig desk;
  double eta = 0.3;
  std::size_t m = 20;
  OracleConfig oracle;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> learners{"constant", "chow"};
  int chow_degree = 2;
  std::size_t directions = 20;
  double direction_overlap = 0.3;
  int moment_degree = 2;
  std::size_t heldout = 100000;
  int moment_order = 12;  ///< k used for the nu and rho diagnostics
};

struct QueryRecord {
  std::string description;
  double answer_instance = 0.0;
  double answer_null = 0.0;
  std::optional<double> truth_instance;
  std::optional<double> truth_null;
  double gap = 0.0;  ///< |answer_instance - answer_null|
};

struct SeedResult {
  std::uint64_t seed = 0;
  QueryRecord planted;
  std::vector<QueryRecord> moment_queries;
  std::vector<double> direction_overlaps;
  std::vector<std::pair<std::string, double>> learner_errors;
  std::size_t queries_used = 0;
  double opt = 0.0;
  double max_moment_gap = 0.0;
};

struct ExperimentReport {
  double tau = 0.0;
  double eta = 0.0;
  std::size_t m = 0;
  std::vector<SeedResult> seeds;
  std::size_t queries_used = 0;

  // Regime diagnostics, derived from the desk configuration.
  double nu = 0.0;         ///< max moment error of A, B vs N(0,1) up to moment_order
  double alpha_chi = 0.0;  ///< chi^2(A) + chi^2(B)
  double c = 0.0;          ///< 1 / (144 log(1/zeta)^2)
  double rho = 0.0;        ///< nu^2 + alpha c^k
  double pair_bound = 0.0;
  double N_bound = 0.0;    ///< sqrt(2 / pair_bound) * rho / alpha
  std::string N_bound_caveat;

  bool planted_gap_ok = false;  ///< gap > 5 tau in every seed
  bool moment_gaps_ok = false;  ///< gap <= 2 tau everywhere
  bool floor_ok = false;        ///< every learner error >= eta - 0.02
};

ExperimentReport distinguishing_experiment(const ExperimentConfig& config);

}  // namespace massart
