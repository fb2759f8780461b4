#include "massart/verification.hpp"

#include <chrono>
#include <cmath>

#include "massart/gaussian.hpp"
#include "massart/instance.hpp"
#include "massart/json_io.hpp"
#include "massart/lift.hpp"
#include "massart/moments.hpp"
#include "massart/numeric.hpp"

namespace massart {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool all_within(const IntervalUnion& u, double lo, double hi) {
  for (const auto& iv : u.intervals())
    if (iv.lo < lo || iv.hi > hi) return false;
  return true;
}

}  // namespace

double bridge_scale(std::span<const double> coeffs, std::span<const double> v,
                    std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += std::abs(v[i] * x[i]);
  double acc = 0.0, pw = 1.0;
  for (double c : coeffs) {
    acc += std::abs(c) * pw;
    pw *= s;
  }
  return acc;
}

CheckResult check_construction(const HardPair& pair) {
  const auto t0 = Clock::now();
  const auto& cfg = pair.config;
  CheckResult r{"construction", false, 0.0, json::object()};
  const std::size_t expected = static_cast<std::size_t>(2 * cfg.d + 1);
  const double reach = cfg.d * cfg.delta + 5.0 * cfg.epsilon;

  const bool counts = pair.j1.size() == expected && pair.j2.size() == expected;
  const bool disjoint = !pair.j1.intersects(pair.j2);
  const bool contained = all_within(pair.j1, -reach, reach) && all_within(pair.j2, -reach, reach);

  // A vanishes on J2 and B on J1, including endpoints.
  bool a_zero_on_j2 = true, b_zero_on_j1 = true;
  constexpr int kPerInterval = 65;
  for (const auto& iv : pair.j2.intervals())
    for (int i = 0; i < kPerInterval; ++i)
      if (pair.a.density(iv.lo + (iv.hi - iv.lo) * i / (kPerInterval - 1)) != 0.0) a_zero_on_j2 = false;
  for (const auto& iv : pair.j1.intervals())
    for (int i = 0; i < kPerInterval; ++i)
      if (pair.b.density(iv.lo + (iv.hi - iv.lo) * i / (kPerInterval - 1)) != 0.0) b_zero_on_j1 = false;

  // Exact agreement off J1 u J2, on a dense grid plus every retained piece center.
  std::size_t agree_points = 0;
  bool agree = true;
  const double span = cfg.n_max * cfg.delta + cfg.epsilon;
  constexpr std::size_t kGrid = 200001;
  auto probe = [&](double x) {
    if (pair.j1.contains(x) || pair.j2.contains(x)) return;
    ++agree_points;
    if (pair.a.density(x) != pair.b.density(x)) agree = false;
  };
  for (std::size_t i = 0; i < kGrid; ++i) probe(-span + 2.0 * span * static_cast<double>(i) / (kGrid - 1));
  for (int n = -cfg.n_max; n <= cfg.n_max; ++n) {
    probe(n * cfg.delta);
    probe(n * cfg.delta + 0.5 * cfg.epsilon);
  }

  const IntervalUnion off = pair.outside_j();
  const double tail_a = pair.a.mass_in(off);
  const double tail_b = pair.b.mass_in(off);
  const double tail_limit = std::min(10.0 * std::pow(cfg.zeta, 8), cfg.zeta);
  const bool tails = tail_a <= tail_limit && tail_b <= tail_limit;

  const auto ma = pair.a.total_mass();
  const auto mb = pair.b.total_mass();
  const bool mass_conserved = std::abs(ma.value - mb.value) <= 1e-12;
  const bool mass_floor = ma.value >= 0.2;

  const ChiSquare ca = chi_square_vs_gaussian(pair.a);
  const ChiSquare cb = chi_square_vs_gaussian(pair.b);
  const double scale = cfg.delta / (2.0 * cfg.epsilon);
  const double closed_a_formula = scale / pair.a.normalizer() - 1.0;
  const double ratio2 = std::pow(cfg.delta / cfg.epsilon, 2);
  const double explicit_c = 6.25 * (1.0 + std::exp(16.0 * cfg.epsilon * cfg.epsilon));
  auto finite = [](const ChiSquare& c) { return std::isfinite(c.closed_form) && std::isfinite(c.quadrature); };
  const bool chi_agree = std::abs(ca.closed_form - ca.quadrature) <= 1e-8 &&
                         std::abs(cb.closed_form - cb.quadrature) <= 1e-8;
  const bool chi_finite = finite(ca) && finite(cb);
  const bool chi_formula = std::abs(ca.closed_form - closed_a_formula) <= 1e-12 * std::abs(closed_a_formula);
  const bool chi_bounded = ca.closed_form <= explicit_c * ratio2 && cb.closed_form <= explicit_c * ratio2;

  r.pass = counts && disjoint && contained && a_zero_on_j2 && b_zero_on_j1 && agree && tails &&
           mass_conserved && mass_floor && chi_agree && chi_finite && chi_formula && chi_bounded;
  r.detail = {{"J1_intervals", pair.j1.size()},
              {"J2_intervals", pair.j2.size()},
              {"interval_counts_ok", counts},
              {"disjoint", disjoint},
              {"within_support", contained},
              {"A_zero_on_J2", a_zero_on_j2},
              {"B_zero_on_J1", b_zero_on_j1},
              {"A_equals_B_off_J", agree},
              {"agreement_points", agree_points},
              {"tail_A", tail_a},
              {"tail_B", tail_b},
              {"tail_limit", tail_limit},
              {"tails_ok", tails},
              {"total_mass_A", ma.value},
              {"total_mass_B", mb.value},
              {"truncation_tail_bound", ma.tail_bound},
              {"mass_conserved", mass_conserved},
              {"mass_at_least_one_fifth", mass_floor},
              {"chi_square_A", io::to_json(ca)},
              {"chi_square_B", io::to_json(cb)},
              {"chi_square_A_formula", closed_a_formula},
              {"chi_square_agree", chi_agree},
              {"chi_square_finite", chi_finite},
              {"chi_square_constant_A", ca.closed_form / ratio2},
              {"chi_square_constant_B", cb.closed_form / ratio2},
              {"chi_square_explicit_constant", explicit_c},
              {"chi_square_bounded", chi_bounded}};
  r.seconds = seconds_since(t0);
  return r;
}

CheckResult check_moments(const HardPair& pair, int k) {
  const auto t0 = Clock::now();
  const MomentReport rep = moment_discrepancy_report(pair, k);
  CheckResult r{"moments", rep.pass(), 0.0, io::to_json(rep)};
  r.seconds = seconds_since(t0);
  return r;
}

CheckResult check_fourier(const std::vector<double>& deltas, int t_max, double zeta,
                          const std::vector<int>& fit_d_values) {
  const auto t0 = Clock::now();
  CheckResult r{"fourier_certificate", true, 0.0, json::object()};
  json rows = json::array();
  for (double delta : deltas) {
    const double eps = delta / 10.0;
    const int n_max = static_cast<int>(std::ceil(12.0 / delta));
    const auto box = periodic_box_measure(delta, eps, n_max);
    const double cutoff = n_max * delta + eps;
    for (int t = 0; t <= t_max; ++t) {
      const double cert = fourier_discrepancy_bound(t, delta).total;
      const double spectral = std::abs(periodic_box_moment_discrepancy(delta, eps, t));
      const double eg = gaussian::moment(t);
      const double direct = std::abs(measure_moment(box, t) * box.normalizer() - eg);
      const double tail = 2.0 * truncated_gaussian_moment(cutoff, std::numeric_limits<double>::infinity(), t);
      const double slack = 1e-12 * std::max(1.0, eg);
      const bool ok = spectral <= cert && direct <= cert + tail + slack;
      if (!ok) r.pass = false;
      rows.push_back({{"delta", delta}, {"epsilon", eps}, {"t", t}, {"certificate", cert},
                      {"measured_spectral", spectral}, {"measured_direct", direct},
                      {"truncation_tail", tail}, {"rounding_slack", slack}, {"pass", ok}});
    }
  }
  json fits = json::array();
  for (int t : {2, 4}) {
    const ScalingFit fit = discrepancy_scaling_fit(zeta, 0.1, fit_d_values, t);
    const bool ok = fit.slope < 0.0 && fit.monotone_decreasing && fit_d_values.size() >= 4;
    if (!ok) r.pass = false;
    fits.push_back({{"t", t}, {"inverse_delta_squared", fit.inverse_delta_squared},
                    {"log_discrepancy", fit.log_discrepancy}, {"slope", fit.slope},
                    {"monotone_decreasing", fit.monotone_decreasing}, {"pass", ok}});
  }
  r.detail = {{"rows", rows}, {"scaling_fits", fits}};
  r.seconds = seconds_since(t0);
  return r;
}

CheckResult check_normalization(const std::vector<double>& deltas) {
  const auto t0 = Clock::now();
  CheckResult r{"normalization", true, 0.0, json::object()};
  json rows = json::array();
  for (double delta : deltas) {
    for (double ratio : {0.05, 0.1, 0.12}) {
      const double eps = ratio * delta;
      const int n_max = static_cast<int>(std::ceil(12.0 / delta));
      const auto box = periodic_box_measure(delta, eps, n_max);
      const auto mass = box.total_mass();
      const double cert = fourier_discrepancy_bound(0, delta).total;
      const double exact_gap = std::abs(periodic_box_moment_discrepancy(delta, eps, 0));
      const double direct_gap = std::abs(mass.value - 1.0);
      const double slack = 1e-14;
      const bool ok = mass.value >= 0.2 && exact_gap <= cert &&
                      direct_gap <= cert + mass.tail_bound + slack;
      if (!ok) r.pass = false;
      rows.push_back({{"delta", delta}, {"epsilon", eps}, {"mass", mass.value},
                      {"tail_bound", mass.tail_bound}, {"certificate_t0", cert},
                      {"gap_spectral", exact_gap}, {"gap_direct", direct_gap},
                      {"rounding_slack", slack}, {"pass", ok}});
    }
  }
  r.detail = {{"rows", rows}};
  r.seconds = seconds_since(t0);
  return r;
}

CheckResult check_massart(std::shared_ptr<const HardPair> pair, double eta, std::size_t m,
                          std::size_t n, std::uint64_t seed) {
  const auto t0 = Clock::now();
  Rng rng = Rng::stream(seed, 101);
  const MassartInstance inst = make_instance(pair, random_unit_vector(m, rng), eta);
  const LabeledBatch batch = sample_labeled(inst, rng, n);

  std::size_t exact = 0, gap_hits = 0, bayes_err = 0, const_err = 0, off_j = 0, off_j_neg = 0;
  CompensatedSum flip_sum;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = batch.row(i);
    const int y = batch.y[i];
    try {
      const double f = inst.flip_probability(x);
      if (f == 0.0 || f == eta) ++exact;
      flip_sum += f;
      if (f == eta) {
        ++off_j;
        if (y < 0) ++off_j_neg;
      }
    } catch (const ZeroDensityError&) {
      ++gap_hits;
    }
    if (inst.ptf_sign(x) != y) ++bayes_err;
    if (y != 1) ++const_err;
  }
  const double nd = static_cast<double>(n);
  const double opt = inst.opt_error();
  const double zeta = pair->config.zeta;
  const double bayes = bayes_err / nd;
  const double bayes_sigma = std::sqrt(opt * (1.0 - opt) / nd);
  const double constant = const_err / nd;
  const double const_sigma = std::sqrt(eta * (1.0 - eta) / nd);
  const double q = inst.off_j_mass();
  const double flip_mean = flip_sum.value() / nd;
  const double flip_sigma = eta * std::sqrt(q * (1.0 - q) / nd);

  const bool exact_ok = exact == n && gap_hits == 0;
  const bool opt_ok = opt <= eta * zeta && eta * zeta <= zeta;
  const bool bayes_ok = std::abs(bayes - opt) <= 4.0 * bayes_sigma;
  const bool const_ok = std::abs(constant - eta) <= 4.0 * const_sigma;
  const bool flip_mean_ok = std::abs(flip_mean - opt) <= 4.0 * flip_sigma;
  bool conditional_ok = true;
  double conditional = 0.0;
  if (off_j > 0) {
    conditional = static_cast<double>(off_j_neg) / static_cast<double>(off_j);
    conditional_ok = std::abs(conditional - eta) <= 4.0 * std::sqrt(eta * (1 - eta) / off_j);
  }

  CheckResult r{"massart", exact_ok && opt_ok && bayes_ok && const_ok && flip_mean_ok && conditional_ok,
                0.0, json::object()};
  r.detail = {{"samples", n}, {"m", m}, {"eta", eta},
              {"flip_in_0_or_eta", exact}, {"gap_errors", gap_hits}, {"exact_ok", exact_ok},
              {"opt", opt}, {"eta_times_zeta", eta * zeta}, {"opt_ok", opt_ok},
              {"bayes_error", bayes}, {"bayes_sigma", bayes_sigma}, {"bayes_ok", bayes_ok},
              {"constant_error", constant}, {"constant_sigma", const_sigma}, {"constant_ok", const_ok},
              {"flip_mean", flip_mean}, {"flip_sigma", flip_sigma}, {"flip_mean_ok", flip_mean_ok},
              {"off_J_samples", off_j}, {"off_J_negative_fraction", conditional},
              {"conditional_ok", conditional_ok}};
  r.seconds = seconds_since(t0);
  return r;
}

CheckResult check_lift(std::shared_ptr<const HardPair> pair, double eta, std::size_t n,
                       std::size_t bridge_trials, std::uint64_t seed) {
  const auto t0 = Clock::now();
  constexpr std::size_t kVars = 3;
  Rng rng = Rng::stream(seed, 202);
  const MassartInstance inst = make_instance(pair, random_unit_vector(kVars, rng), eta);
  const MonomialBasis basis = enumerate_basis(kVars, 8 * pair->config.d);
  const std::size_t ambient = basis.size() + 64;
  const HalfspaceWeights w = halfspace_from_ptf(inst.v(), inst.j2_polynomial_dd(), basis, ambient);
  const LabeledBatch batch = sample_labeled(inst, rng, n);
  const ConsistencyReport cons = check_consistency(inst, basis, w, batch);

  // Points placed at J1 and J2 interval centers.
  LabeledBatch planted;
  planted.m = kVars;
  const HouseholderFrame frame(inst.v());
  std::vector<int> expected;
  auto place = [&](const IntervalUnion& u, int sign) {
    for (const auto& iv : u.intervals()) {
      std::vector<double> x(kVars), g{rng.normal(), rng.normal()};
      frame.embed(0.5 * (iv.lo + iv.hi), g, x);
      planted.x.insert(planted.x.end(), x.begin(), x.end());
      planted.y.push_back(static_cast<std::int8_t>(sign));
      expected.push_back(sign);
    }
  };
  place(pair->j2, -1);
  place(pair->j1, 1);
  const auto scores = lift_scores(basis, w, planted);
  bool planted_ok = true;
  for (std::size_t i = 0; i < planted.size(); ++i) {
    const int lifted = scores[i] < 0.0 ? -1 : 1;
    if (lifted != expected[i] || inst.ptf_sign(planted.row(i)) != expected[i]) planted_ok = false;
  }

  // Linearity bridge on a small basis.
  const int bridge_degree = 16;
  const MonomialBasis small = enumerate_basis(kVars, bridge_degree);
  double worst = 0.0;
  for (std::size_t trial = 0; trial < bridge_trials; ++trial) {
    const auto v = random_unit_vector(kVars, rng);
    const int deg = static_cast<int>(rng.next_u64() % (bridge_degree + 1));
    std::vector<double> c(static_cast<std::size_t>(deg) + 1);
    for (auto& ci : c) ci = rng.normal();
    const HalfspaceWeights hw = halfspace_from_ptf(v, c, small, small.size());
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<double> x(kVars);
      for (auto& xi : x) xi = rng.normal();
      const auto vx = veronese(small, x);
      CompensatedSum lhs;
      for (std::size_t k = 0; k < vx.size(); ++k) lhs += hw.w[k] * vx[k];
      const double rhs = evaluate_polynomial(c, dot(v, x));
      worst = std::max(worst, std::abs(lhs.value() - rhs) / bridge_scale(c, v, x));
    }
  }
  const bool bridge_ok = worst <= 1e-8;
  const bool agree_ok = cons.checked > 0 && cons.agreement_fraction == 1.0;

  CheckResult r{"lift", agree_ok && cons.padding_zero && planted_ok && bridge_ok, 0.0, json::object()};
  r.detail = {{"vars", kVars},
              {"basis_degree", basis.max_degree()},
              {"M_prime", basis.size()},
              {"M", ambient},
              {"polynomial_degree", inst.j2_polynomial().size() - 1},
              {"consistency", io::to_json(cons)},
              {"planted_points", planted.size()},
              {"planted_ok", planted_ok},
              {"bridge_trials", bridge_trials},
              {"bridge_degree", bridge_degree},
              {"bridge_max_relative_error", worst},
              {"bridge_ok", bridge_ok}};
  r.seconds = seconds_since(t0);
  return r;
}

CheckResult check_tsybakov(std::shared_ptr<const HardPair> pair, const TsybakovParams& params,
                           double zeta, std::uint64_t seed) {
  const auto t0 = Clock::now();
  Rng rng = Rng::stream(seed, 303);
  const double eta = tsybakov_to_massart(params, zeta);
  const MassartInstance inst = make_instance(pair, random_unit_vector(2, rng), eta);
  std::vector<double> grid;
  for (int i = 1; i <= 100; ++i) grid.push_back(i / 202.0);
  const auto profile = tsybakov_profile(inst, params, grid);
  bool grid_ok = true;
  for (const auto& p : profile) grid_ok = grid_ok && p.holds;

  const double back = massart_to_tsybakov_zeta(params, eta);
  double worst = std::abs(back - zeta);
  // Random trips start from eta, kept at most 0.499: close to 1/2 the gap
  // 1/2 - eta cancels and no double formula can return zeta to 1e-12.
  for (int i = 0; i < 1000; ++i) {
    TsybakovParams tp{0.5 + 3.5 * rng.uniform(), 0.1 + 0.8 * rng.uniform()};
    const double e = 0.01 + 0.489 * rng.uniform();
    const double z = massart_to_tsybakov_zeta(tp, e);
    const double e_back = tsybakov_to_massart(tp, z);
    worst = std::max({worst, std::abs(e_back - e),
                      std::abs(massart_to_tsybakov_zeta(tp, e_back) - z) / std::max(1.0, z)});
  }
  const bool roundtrip_ok = worst <= 1e-12;

  json rows = json::array();
  for (const auto& p : profile)
    rows.push_back({{"t", p.t}, {"probability", p.probability}, {"bound", p.bound}, {"holds", p.holds}});
  CheckResult r{"tsybakov", grid_ok && roundtrip_ok, 0.0, json::object()};
  r.detail = {{"A", params.a_const}, {"alpha", params.alpha}, {"zeta", zeta}, {"eta", eta},
              {"grid_ok", grid_ok}, {"roundtrip_max_error", worst}, {"roundtrip_ok", roundtrip_ok},
              {"profile", rows}};
  r.seconds = seconds_since(t0);
  return r;
}

VerifyResult run_verification(const VerifyOptions& o) {
  auto pair = std::make_shared<const HardPair>(build_hard_pair(o.config));
  VerifyResult out;
  out.checks.push_back(check_construction(*pair));
  out.checks.push_back(check_moments(*pair, o.k));
  out.checks.push_back(check_fourier(o.fourier_deltas, o.fourier_t_max, o.config.zeta, o.fit_d_values));
  out.checks.push_back(check_normalization(o.fourier_deltas));
  out.checks.push_back(check_massart(pair, o.eta, o.m, o.samples, o.seed));
  out.checks.push_back(check_lift(pair, o.eta, o.lift_samples, o.bridge_trials, o.seed));
  out.checks.push_back(check_tsybakov(pair, TsybakovParams{1.0, 0.5}, o.config.zeta, o.seed));

  out.pass = true;
  json checks = json::array();
  for (const auto& c : out.checks) {
    out.pass = out.pass && c.pass;
    // Timings stay out of the report so reruns are byte-identical.
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  const json& mom = out.checks[1].detail;
  const json& con = out.checks[0].detail;
  json chi = con["chi_square_A"];
  chi["B"] = con["chi_square_B"];
  out.report = {{"config", io::to_json(o.config)},
                {"k", o.k},
                {"eta", o.eta},
                {"seed", o.seed},
                {"moments", {{"A", mom["moments_A"]}, {"B", mom["moments_B"]}, {"gaussian", mom["moments_gaussian"]}}},
                {"discrepancies",
                 {{"A", mom["discrepancy_A"]}, {"B", mom["discrepancy_B"]},
                  {"A_spectral", mom["discrepancy_A_spectral"]}, {"AB", mom["difference_AB"]}}},
                {"bounds", {{"AB", mom["bound_AB"]}, {"fourier", mom["fourier_bounds"]}, {"certified_A", mom["certified_A"]}}},
                {"chi_square", chi},
                {"checks", checks},
                {"pass", out.pass}};
  return out;
}

}  // namespace massart
