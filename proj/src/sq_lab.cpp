#include "massart/sq_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "massart/gaussian.hpp"
#include "massart/lift.hpp"
#include "massart/moments.hpp"
#include "massart/numeric.hpp"
#include "massart/quadrature.hpp"

namespace massart {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSupport = 14.0;     // |<u,x>| beyond this carries negligible mass
constexpr double kQuadTol = 1e-12;    // per unit chunk

double clamp1(double v) { return std::clamp(v, -1.0, 1.0); }

template <class F>
double integrate_line(const F& f) {
  CompensatedSum acc;
  for (double lo = -kSupport; lo < kSupport; lo += 1.0)
    acc += quadrature::integrate(f, lo, lo + 1.0, kQuadTol).value;
  return acc.value();
}

double component_expectation(const std::function<double(double, int)>& f, int y, double a,
                             const PiecewiseGaussianMeasure* measure) {
  if (measure == nullptr)
    return integrate_line([&](double s) { return f(s, y) * gaussian::pdf(s); });

  const auto pieces = measure->pieces();
  const double z = measure->normalizer();
  const double b = std::sqrt(std::max(0.0, 1.0 - a * a));
  if (b < 1e-6) {
    // Degenerate projection: <u,x> = a T.
    CompensatedSum acc;
    for (const auto& p : pieces) {
      auto g = [&](double t) { return f(a * t, y) * p.scale * gaussian::pdf(t + p.shift); };
      acc += quadrature::integrate(g, p.lo, p.hi, kQuadTol).value;
    }
    return acc.value() / z;
  }
  // Density of a T + b N(0,1) at s, piece by piece:
  // scale G(s + a h) [Phi((hi - t0) / b) - Phi((lo - t0) / b)], t0 = a s - b^2 h.
  auto density = [&](double s) {
    CompensatedSum acc;
    for (const auto& p : pieces) {
      const double h = p.shift;
      const double t0 = a * s - b * b * h;
      const double w = gaussian::interval_mass((p.lo - t0) / b, (p.hi - t0) / b);
      if (w != 0.0) acc += p.scale * gaussian::pdf(s + a * h) * w;
    }
    return acc.value() / z;
  };
  return integrate_line([&](double s) { return f(s, y) * density(s); });
}

std::uint64_t call_seed(std::uint64_t seed, std::uint64_t call) {
  return splitmix64(seed ^ splitmix64(call + 0x5851F42D4C957F2DULL));
}

}  // namespace

double SQQuery::operator()(std::span<const double> x, int y) const { return clamp1(evaluator(x, y)); }

SQQuery make_query(std::string description, kernels::Evaluator f) {
  SQQuery q;
  q.description = std::move(description);
  q.evaluator = std::move(f);
  return q;
}

SQQuery make_projected_query(std::string description, std::vector<double> u,
                             std::function<double(double, int)> f) {
  const double norm = std::sqrt(dot(u, u));
  if (!(std::abs(norm - 1.0) <= 1e-12)) throw std::invalid_argument("query direction must be a unit vector");
  SQQuery q;
  q.description = std::move(description);
  q.direction = std::move(u);
  q.projected = [f](double s, int y) { return clamp1(f(s, y)); };
  q.evaluator = [dir = q.direction, g = q.projected](std::span<const double> x, int y) {
    return g(dot(dir, x), y);
  };
  return q;
}

std::optional<double> exact_expectation(const SQQuery& query, const LabeledSource& source) {
  if (!query.is_projected() || query.direction.size() != source.dim()) return std::nullopt;
  const auto law = source.projected_law(query.direction);
  if (!law) return std::nullopt;
  CompensatedSum total;
  for (const auto& c : law->components)
    if (c.weight != 0.0)
      total += c.weight * component_expectation(query.projected, c.label, law->a, c.measure);
  return total.value();
}

double toward_null(double truth, double null_value, double tau) {
  return truth + std::clamp(null_value - truth, -tau, tau);
}

std::size_t OracleConfig::honest_samples() const {
  return static_cast<std::size_t>(std::ceil(sample_constant / (tau * tau)));
}

std::size_t OracleConfig::dense_samples() const {
  // sigma <= 1 / sqrt(N), so 4 sigma <= tau / 4 needs N >= (16 / tau)^2.
  const double r = 16.0 / tau;
  return static_cast<std::size_t>(std::ceil(r * r));
}

void OracleConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  if (!(sample_constant > 0.0)) throw std::invalid_argument("sample constant must be > 0");
  if (query_budget == 0) throw std::invalid_argument("query budget must be >= 1");
}

SQOracle::SQOracle(const LabeledSource& source, OracleConfig config, std::uint64_t seed,
                   const LabeledSource* null_reference)
    : source_(source), null_(null_reference), config_(std::move(config)), seed_(seed) {
  config_.validate();
  if (config_.mode == OracleMode::kAdversarial && null_ == nullptr)
    throw std::invalid_argument("adversarial oracle needs a null reference distribution");
  if (null_ != nullptr && null_->dim() != source_.dim())
    throw std::invalid_argument("null reference has a different dimension");
}

double SQOracle::answer(const SQQuery& query) { return answer_batch({&query, 1}).front(); }

double SQOracle::true_value(const SQQuery& q, const LabeledSource& src, std::uint64_t stream) {
  if (auto exact = exact_expectation(q, src)) return *exact;
  kernels::Evaluator f = [&q](std::span<const double> x, int y) { return q(x, y); };
  return kernels::mc_means(src, {&f, 1}, {config_.dense_samples(), stream}).front();
}

std::vector<double> SQOracle::answer_batch(std::span<const SQQuery> queries) {
  if (used_ + queries.size() > config_.query_budget)
    throw BudgetExhausted("query budget of " + std::to_string(config_.query_budget) +
                          " exhausted after " + std::to_string(used_) + " queries");
  const std::uint64_t call = calls_++;
  std::vector<double> out(queries.size());

  if (config_.mode == OracleMode::kHonest) {
    std::vector<kernels::Evaluator> f;
    f.reserve(queries.size());
    for (const auto& q : queries)
      f.emplace_back([&q](std::span<const double> x, int y) { return q(x, y); });
    out = kernels::mc_means(source_, f, {config_.honest_samples(), call_seed(seed_, call)});
    for (std::size_t i = 0; i < queries.size(); ++i)
      log_.push_back({queries[i].description, out[i], std::nullopt});
  } else {
    const Adversary& adv = config_.adversary ? config_.adversary : Adversary(toward_null);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const std::uint64_t stream = call_seed(seed_, call * 1'000'003ULL + i);
      const double truth = true_value(queries[i], source_, stream);
      const double null_value = true_value(queries[i], *null_, stream ^ 0xA5A5A5A5ULL);
      // Whatever the adversary proposes stays within tau of the truth.
      out[i] = std::clamp(adv(truth, null_value, config_.tau), truth - config_.tau,
                          truth + config_.tau);
      log_.push_back({queries[i].description, out[i], truth});
    }
  }
  used_ += queries.size();
  return out;
}

double pair_overlap_bound(std::size_t m, double c) {
  const double md = static_cast<double>(m);
  return 2.0 * std::exp(-c * c * md / 4.0) + 2.0 * std::exp(-md / 32.0);
}

std::size_t implied_try_budget(std::size_t m, double c, std::size_t target) {
  const double pairs = 0.5 * static_cast<double>(target) * static_cast<double>(target - (target > 0));
  return target + static_cast<std::size_t>(std::ceil(pair_overlap_bound(m, c) * pairs));
}

double max_pairwise_overlap(const std::vector<std::vector<double>>& vectors) {
  double worst = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i)
    for (std::size_t j = i + 1; j < vectors.size(); ++j)
      worst = std::max(worst, std::abs(dot(vectors[i], vectors[j])));
  return worst;
}

NearOrthogonalSet near_orthogonal_set(std::size_t m, double c, std::size_t target_size,
                                      std::size_t max_tries, Rng& rng) {
  if (m == 0) throw std::invalid_argument("dimension must be >= 1");
  if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("overlap c must lie in (0, 1]");
  NearOrthogonalSet out;
  out.pair_bound = pair_overlap_bound(m, c);
  out.try_budget = max_tries > 0 ? max_tries : implied_try_budget(m, c, target_size);
  out.size_guard_ok =
      static_cast<double>(target_size) <= std::exp(c * c * static_cast<double>(m) / 64.0);
  while (out.vectors.size() < target_size) {
    if (out.tries >= out.try_budget)
      throw NearOrthogonalExhausted(
          "near-orthogonal set: " + std::to_string(out.vectors.size()) + " of " +
          std::to_string(target_size) + " vectors after " + std::to_string(out.tries) +
          " tries; per-pair failure bound 2exp(-c^2 m/4) + 2exp(-m/32) = " +
          std::to_string(out.pair_bound));
    ++out.tries;
    auto u = random_unit_vector(m, rng);
    bool ok = true;
    for (const auto& w : out.vectors)
      if (std::abs(dot(u, w)) > c) {
        ok = false;
        break;
      }
    if (ok) out.vectors.push_back(std::move(u));
  }
  out.max_overlap = max_pairwise_overlap(out.vectors);
  return out;
}

Hypothesis learner_constant(SQOracle& oracle) {
  const double ey = oracle.answer(make_query("E[y]", [](std::span<const double>, int y) {
    return static_cast<double>(y);
  }));
  const int s = ey >= 0.0 ? 1 : -1;
  return {s > 0 ? "constant(+1)" : "constant(-1)", [s](std::span<const double>) { return s; }};
}

namespace {

struct Feature {
  std::vector<std::pair<std::uint32_t, std::uint8_t>> factors;  // (variable, power)
  double operator()(std::span<const double> x) const {
    double v = 1.0;
    for (auto [i, p] : factors) {
      const double c = clamp1(x[i] / 3.0);
      for (int k = 0; k < p; ++k) v *= c;
    }
    return v;
  }
};

}  // namespace

Hypothesis learner_chow(SQOracle& oracle, std::size_t m, int degree) {
  if (degree < 1) throw std::invalid_argument("chow learner needs degree >= 1");
  const double tau = oracle.config().tau;
  const MonomialBasis basis = enumerate_basis(m, degree);
  std::vector<Feature> features;
  std::vector<SQQuery> queries;
  for (std::size_t k = 1; k < basis.size(); ++k) {
    Feature f;
    auto e = basis.exponents(k);
    for (std::uint32_t i = 0; i < m; ++i)
      if (e[i] > 0) f.factors.emplace_back(i, e[i]);
    features.push_back(f);
    queries.push_back(make_query("chow", [f](std::span<const double> x, int y) { return y * f(x); }));
  }
  const auto c_hat = oracle.answer_batch(queries);

  auto kept = std::make_shared<std::vector<std::pair<Feature, double>>>();
  double norm2 = 0.0;
  for (std::size_t k = 0; k < features.size(); ++k) {
    if (std::abs(c_hat[k]) <= tau) continue;  // indistinguishable from zero at this accuracy
    kept->emplace_back(features[k], c_hat[k]);
    norm2 += c_hat[k] * c_hat[k];
  }
  auto score = [kept](std::span<const double> x) {
    double s = 0.0;
    for (const auto& [f, c] : *kept) s += c * f(x);
    return s;
  };

  std::vector<double> thresholds{-kInf};
  const double scale = std::sqrt(norm2);
  for (int i = 0; i <= 16; ++i) thresholds.push_back(scale * (-2.0 + 0.25 * i));
  thresholds.push_back(kInf);

  auto predictor = [score](double theta) {
    return [score, theta](std::span<const double> x) { return score(x) - theta >= 0.0 ? 1 : -1; };
  };
  std::vector<SQQuery> error_queries;
  for (double th : thresholds) {
    auto h = predictor(th);
    error_queries.push_back(make_query("chow-threshold", [h](std::span<const double> x, int y) {
      return h(x) != y ? 1.0 : 0.0;
    }));
  }
  const auto errs = oracle.answer_batch(error_queries);
  const auto best = static_cast<std::size_t>(std::min_element(errs.begin(), errs.end()) - errs.begin());
  return {"chow(degree=" + std::to_string(degree) + ")", predictor(thresholds[best])};
}

double heldout_error(const Hypothesis& h, const LabeledSource& source, std::size_t n,
                     std::uint64_t seed) {
  kernels::Evaluator f = [&h](std::span<const double> x, int y) {
    return h.predict(x) != y ? 1.0 : 0.0;
  };
  return kernels::mc_means(source, {&f, 1}, {n, seed}).front();
}

SQQuery moment_query(std::vector<double> u, int j) {
  return make_projected_query("y*clamp(<u,x>/3)^" + std::to_string(j), std::move(u),
                              [j](double s, int y) { return y * std::pow(clamp1(s / 3.0), j); });
}

SQQuery indicator_query(std::vector<double> u, IntervalUnion region, std::string description) {
  return make_projected_query(std::move(description), std::move(u),
                              [r = std::move(region)](double s, int) {
                                return r.contains(s) ? 1.0 : 0.0;
                              });
}

ExperimentReport distinguishing_experiment(const ExperimentConfig& config) {
  config.oracle.validate();
  if (config.seeds.empty()) throw std::invalid_argument("experiment needs at least one seed");
  auto pair = std::make_shared<const HardPair>(build_hard_pair(config.desk));
  const double tau = config.oracle.tau;

  ExperimentReport rep;
  rep.tau = tau;
  rep.eta = config.eta;
  rep.m = config.m;
  rep.planted_gap_ok = rep.moment_gaps_ok = rep.floor_ok = true;

  for (std::uint64_t seed : config.seeds) {
    SeedResult sr;
    sr.seed = seed;
    Rng rng = Rng::stream(seed, 0);
    const MassartInstance inst(pair, random_unit_vector(config.m, rng), config.eta);
    const NullDistribution null(config.m, inst.p());
    const std::vector<double> v(inst.v().begin(), inst.v().end());
    sr.opt = inst.opt_error();

    std::vector<SQQuery> battery{indicator_query(v, pair->j1, "1[<v,x> in J1]")};
    while (sr.direction_overlaps.size() < config.directions) {
      auto u = random_unit_vector(config.m, rng);
      const double ov = dot(u, v);
      if (std::abs(ov) > config.direction_overlap) continue;
      sr.direction_overlaps.push_back(ov);
      for (int j = 0; j <= config.moment_degree; ++j) battery.push_back(moment_query(u, j));
    }

    SQOracle on_instance(inst, config.oracle, splitmix64(seed) + 1, &null);
    SQOracle on_null(null, config.oracle, splitmix64(seed) + 2, &null);
    const auto ans_i = on_instance.answer_batch(battery);
    const auto ans_n = on_null.answer_batch(battery);
    for (std::size_t q = 0; q < battery.size(); ++q) {
      QueryRecord r;
      r.description = battery[q].description;
      r.answer_instance = ans_i[q];
      r.answer_null = ans_n[q];
      r.truth_instance = exact_expectation(battery[q], inst);
      r.truth_null = exact_expectation(battery[q], null);
      r.gap = std::abs(ans_i[q] - ans_n[q]);
      if (q == 0) {
        sr.planted = r;
        if (!(r.gap > 5.0 * tau)) rep.planted_gap_ok = false;
      } else {
        sr.max_moment_gap = std::max(sr.max_moment_gap, r.gap);
        if (!(r.gap <= 2.0 * tau)) rep.moment_gaps_ok = false;
        sr.moment_queries.push_back(std::move(r));
      }
    }

    for (const auto& name : config.learners) {
      Hypothesis h;
      if (name == "constant") h = learner_constant(on_instance);
      else if (name == "chow") h = learner_chow(on_instance, config.m, config.chow_degree);
      else throw std::invalid_argument("unknown learner '" + name + "'");
      const double err = heldout_error(h, inst, config.heldout, splitmix64(seed) + 3);
      sr.learner_errors.emplace_back(name, err);
      if (!(err >= config.eta - 0.02)) rep.floor_ok = false;
    }
    sr.queries_used = on_instance.queries_used() + on_null.queries_used();
    rep.queries_used += sr.queries_used;
    rep.seeds.push_back(std::move(sr));
  }

  const MomentReport mr = moment_discrepancy_report(*pair, config.moment_order);
  for (std::size_t t = 0; t < mr.discrepancy_a.size(); ++t)
    rep.nu = std::max({rep.nu, mr.discrepancy_a[t], mr.discrepancy_b[t]});
  rep.alpha_chi = chi_square_vs_gaussian(pair->a).closed_form +
                  chi_square_vs_gaussian(pair->b).closed_form;
  const double lz = std::log(1.0 / config.desk.zeta);
  rep.c = 1.0 / (144.0 * lz * lz);
  rep.rho = rep.nu * rep.nu + rep.alpha_chi * std::pow(rep.c, config.moment_order);
  rep.pair_bound = pair_overlap_bound(config.m, rep.c);
  rep.N_bound = std::sqrt(2.0 / rep.pair_bound) * rep.rho / rep.alpha_chi;
  rep.N_bound_caveat =
      "set size sqrt(2/pair_bound) from the explicit near-orthogonality tail constants "
      "(c^2 m/4, m/32); the lower bound's own exponent constant is unspecified";
  return rep;
}

}  // namespace massart
