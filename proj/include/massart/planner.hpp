#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "massart/hard_pair.hpp"

namespace massart {

class MassartInstance;

/// The "sufficiently large" constants of the asymptotic schedule.
struct Constants {
  double c_tau = 64.0;
  double c_m = 64.0;
  double c_d = 8.0;
  double c_zeta = 4.0;

  void validate() const;
};

/// Schedule could not satisfy one or more of its feasibility constraints.
class InfeasiblePlan : public std::runtime_error {
 public:
  InfeasiblePlan(std::string message, std::vector<std::string> violations)
      : std::runtime_error(std::move(message)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// The asymptotic schedule, kept in log space. Integer-valued quantities are
/// stored as doubles since they can exceed 64-bit range.
struct AsymptoticPlan {
  double log_m_scale = 0.0;  ///< log M
  double eta = 0.0;
  double zeta = 0.0;
  Constants constants;

  double l = 0.0;          ///< log M / ((log log M)^3 log(1/zeta))
  double log_tau = 0.0;    ///< natural log of tau (negative)
  double m = 0.0;
  double d = 0.0;
  double k_real = 0.0;     ///< 4 log(1/tau) / log log(1/zeta) before rounding
  double k = 0.0;
  double delta = 0.0;
  double log_epsilon = 0.0;
  double log_delta_over_8 = 0.0;
  double c = 0.0;
  double m_prime_log = 0.0;  ///< log binom(m + 8d, 8d)

  std::vector<std::string> violations;
  bool feasible() const noexcept { return violations.empty(); }
};

/// Evaluates the schedule and records every violated constraint without throwing.
/// Throws std::invalid_argument only for inputs outside the model
/// (eta, zeta ranges, non-positive constants, log M too small to take log log).
AsymptoticPlan evaluate_schedule(double log_m_scale, double eta, double zeta,
                                 const Constants& constants = {});

/// Same, but throws InfeasiblePlan naming the violated constraints.
AsymptoticPlan plan(double log_m_scale, double eta, double zeta, const Constants& constants = {});

/// Natural log of binom(n, r). Works for n up to ~1e300.
double log_binomial(double n, double r);

/// Directly specified feasible configuration (throws ConfigError otherwise).
HardPairConfig desk_config(double zeta, int d, double epsilon);

struct TsybakovParams {
  double a_const = 1.0;
  double alpha = 0.5;
  void validate() const;
};

/// eta = 1/2 - (zeta / A)^((1 - alpha) / alpha); ConfigError(kEtaOutOfRange)
/// unless eta lies in (0, 1/2].
double tsybakov_to_massart(const TsybakovParams& params, double zeta);

/// zeta = A (1/2 - eta)^(alpha / (1 - alpha)).
double massart_to_tsybakov_zeta(const TsybakovParams& params, double eta);

struct TsybakovPoint {
  double t = 0.0;
  double probability = 0.0;  ///< P[eta(x) >= 1/2 - t]
  double bound = 0.0;        ///< A t^(alpha / (1 - alpha))
  bool holds = false;
};

std::vector<TsybakovPoint> tsybakov_profile(const MassartInstance& instance,
                                            const TsybakovParams& params,
                                            const std::vector<double>& t_grid);

/// Conjunction of the tail inequality over the grid; each t must lie in (0, 1/2].
bool verify_tsybakov(const MassartInstance& instance, const TsybakovParams& params,
                     const std::vector<double>& t_grid);

}  // namespace massart
