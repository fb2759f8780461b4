#include "massart/planner.hpp"

#include <cmath>
#include <sstream>

#include "massart/instance.hpp"
#include "massart/numeric.hpp"

namespace massart {
namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

void Constants::validate() const {
  if (!(c_tau > 0.0) || !(c_m > 0.0) || !(c_d > 0.0) || !(c_zeta > 0.0))
    throw std::invalid_argument("schedule constants must be positive");
}

double log_binomial(double n, double r) {
  if (!(r >= 0.0) || !(r <= n) || r != std::floor(r) || n != std::floor(n))
    throw std::invalid_argument("log_binomial: need integers 0 <= r <= n");
  const double s = std::min(r, n - r);
  if (s <= 1e7) {
    // Exact product form, summed in log space.
    CompensatedSum acc;
    for (double i = 1.0; i <= s; i += 1.0) acc += std::log1p((n - s) / i);
    return acc.value();
  }
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

AsymptoticPlan evaluate_schedule(double log_m_scale, double eta, double zeta,
                                 const Constants& constants) {
  constants.validate();
  if (!(eta > 0.0 && eta <= 0.5)) throw ConfigError(ConfigErrorKind::kEtaOutOfRange, "eta=" + fmt(eta));
  if (!(zeta > 0.0 && zeta <= eta))
    throw std::invalid_argument("zeta must satisfy 0 < zeta <= eta, got zeta=" + fmt(zeta));
  if (!(log_m_scale > 1.0) || !std::isfinite(log_m_scale))
    throw std::invalid_argument("log M must be a finite value > 1");

  AsymptoticPlan p;
  p.log_m_scale = log_m_scale;
  p.eta = eta;
  p.zeta = zeta;
  p.constants = constants;

  const double log_inv_zeta = -std::log(zeta);
  const double loglog_m = std::log(log_m_scale);
  const double loglog_m3 = loglog_m * loglog_m * loglog_m;
  p.l = log_m_scale / (loglog_m3 * log_inv_zeta);
  const double log_inv_tau =
      log_m_scale * log_m_scale / (constants.c_tau * loglog_m3 * log_inv_zeta);
  p.log_tau = -log_inv_tau;

  auto& v = p.violations;
  if (p.l < constants.c_zeta) v.push_back("l = " + fmt(p.l) + " is below C_zeta = " + fmt(constants.c_zeta));

  p.m = std::ceil(constants.c_m * log_inv_tau * std::pow(log_inv_zeta, 4));
  const double loglog_inv_tau = std::log(log_inv_tau);
  if (!(loglog_inv_tau > 0.0)) {
    v.push_back("log(1/tau) = " + fmt(log_inv_tau) + " must exceed 1 for d to be defined");
    p.d = 2.0;
  } else {
    p.d = std::ceil(constants.c_d * std::sqrt(log_inv_zeta * log_inv_tau * loglog_inv_tau));
  }
  if (p.d < 2.0) v.push_back("d = " + fmt(p.d) + " is below 2");

  p.delta = 4.0 * std::sqrt(log_inv_zeta) / p.d;
  if (!(p.delta < 1.0)) v.push_back("delta = " + fmt(p.delta) + " is not < 1");

  const double loglog_inv_zeta = std::log(log_inv_zeta);
  if (!(loglog_inv_zeta > 0.0)) {
    v.push_back("zeta = " + fmt(zeta) + " must be < 1/e so that log log(1/zeta) > 0");
    p.k_real = p.k = 0.0;
  } else {
    p.k_real = 4.0 * log_inv_tau / loglog_inv_zeta;
    p.k = std::ceil(p.k_real);
  }
  p.log_epsilon = p.log_tau - p.k * std::log(12.0 * std::sqrt(log_inv_zeta));
  p.log_delta_over_8 = std::log(p.delta / 8.0);
  if (!(p.log_epsilon < p.log_delta_over_8))
    v.push_back("epsilon is not < delta/8 (log epsilon = " + fmt(p.log_epsilon) +
                ", log(delta/8) = " + fmt(p.log_delta_over_8) + ")");

  p.c = 1.0 / (144.0 * log_inv_zeta * log_inv_zeta);
  p.m_prime_log = log_binomial(p.m + 8.0 * p.d, 8.0 * p.d);
  if (!(p.m_prime_log <= log_m_scale))
    v.push_back("M_prime_log = " + fmt(p.m_prime_log) + " exceeds log M = " + fmt(log_m_scale));
  return p;
}

AsymptoticPlan plan(double log_m_scale, double eta, double zeta, const Constants& constants) {
  AsymptoticPlan p = evaluate_schedule(log_m_scale, eta, zeta, constants);
  if (!p.feasible()) {
    std::string msg = "infeasible schedule:";
    for (const auto& s : p.violations) msg += " [" + s + "]";
    throw InfeasiblePlan(msg, p.violations);
  }
  return p;
}

HardPairConfig desk_config(double zeta, int d, double epsilon) {
  return HardPairConfig::make(zeta, d, epsilon);
}

void TsybakovParams::validate() const {
  if (!(a_const > 0.0)) throw std::invalid_argument("Tsybakov A must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("Tsybakov alpha must lie in (0, 1)");
}

double tsybakov_to_massart(const TsybakovParams& params, double zeta) {
  params.validate();
  if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be > 0");
  const double eta = 0.5 - std::pow(zeta / params.a_const, (1.0 - params.alpha) / params.alpha);
  if (!(eta > 0.0 && eta <= 0.5))
    throw ConfigError(ConfigErrorKind::kEtaOutOfRange, "eta=" + fmt(eta) + " from zeta=" + fmt(zeta));
  return eta;
}

double massart_to_tsybakov_zeta(const TsybakovParams& params, double eta) {
  params.validate();
  if (!(eta > 0.0 && eta <= 0.5)) throw ConfigError(ConfigErrorKind::kEtaOutOfRange, "eta=" + fmt(eta));
  return params.a_const * std::pow(0.5 - eta, params.alpha / (1.0 - params.alpha));
}

std::vector<TsybakovPoint> tsybakov_profile(const MassartInstance& instance,
                                            const TsybakovParams& params,
                                            const std::vector<double>& t_grid) {
  params.validate();
  const double eta = instance.eta();
  const double off_j = instance.off_j_mass();
  const double exponent = params.alpha / (1.0 - params.alpha);
  std::vector<TsybakovPoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    if (!(t > 0.0 && t <= 0.5)) throw std::invalid_argument("Tsybakov grid must lie in (0, 1/2]");
    // eta(x) takes only the values 0 and eta.
    const double s = 0.5 - t;
    TsybakovPoint pt;
    pt.t = t;
    pt.probability = s <= 0.0 ? 1.0 : (s <= eta ? off_j : 0.0);
    pt.bound = params.a_const * std::pow(t, exponent);
    pt.holds = pt.probability <= pt.bound;
    out.push_back(pt);
  }
  return out;
}

bool verify_tsybakov(const MassartInstance& instance, const TsybakovParams& params,
                     const std::vector<double>& t_grid) {
  for (const auto& pt : tsybakov_profile(instance, params, t_grid))
    if (!pt.holds) return false;
  return true;
}

}  // namespace massart
