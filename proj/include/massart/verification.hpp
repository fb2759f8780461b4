#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "massart/hard_pair.hpp"
#include "massart/planner.hpp"

namespace massart {

struct CheckResult {
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  nlohmann::json detail;
};

/// Interval structure, support and agreement conditions, tail mass, chi-square.
CheckResult check_construction(const HardPair& pair);

/// Moment report up to k plus its pass flags.
CheckResult check_moments(const HardPair& pair, int k);

/// Certificate dominance on each delta for t <= t_max (Poisson route, with the
/// direct route checked within rounding), and the 1/delta^2 scaling fit.
CheckResult check_fourier(const std::vector<double>& deltas, int t_max, double zeta,
                          const std::vector<int>& fit_d_values);

/// Retained mass >= 1/5 and |mass - 1| within the t = 0 certificate.
CheckResult check_normalization(const std::vector<double>& deltas);

/// Flip probabilities, OPT, Bayes and constant-hypothesis error on fresh samples.
CheckResult check_massart(std::shared_ptr<const HardPair> pair, double eta, std::size_t m,
                          std::size_t n, std::uint64_t seed);

/// Lifted-halfspace agreement (m = 3, degree 8d basis), padding, and the linearity
/// bridge on random polynomials (m = 3, degree <= 16).
CheckResult check_lift(std::shared_ptr<const HardPair> pair, double eta, std::size_t n,
                       std::size_t bridge_trials, std::uint64_t seed);

/// Tail condition on the grid t_i = i / 202, i = 1..100, and the parameter round trip.
CheckResult check_tsybakov(std::shared_ptr<const HardPair> pair, const TsybakovParams& params,
                           double zeta, std::uint64_t seed);

struct VerifyOptions {
  HardPairConfig config;
  int k = 12;
  double eta = 0.3;
  std::size_t m = 20;
  std::size_t samples = 100000;
  std::size_t lift_samples = 10000;
  std::size_t bridge_trials = 1000;
  std::uint64_t seed = 1;
  std::vector<double> fourier_deltas{0.3, 0.4, 0.5, 0.69};
  int fourier_t_max = 8;
  std::vector<int> fit_d_values{10, 12, 14, 16, 18, 20};
};

struct VerifyResult {
  bool pass = false;
  std::vector<CheckResult> checks;
  nlohmann::json report;
};

VerifyResult run_verification(const VerifyOptions& options);

/// Scale used by the linearity bridge: sum_j |c_j| (sum_i |v_i x_i|)^j.
double bridge_scale(std::span<const double> coeffs, std::span<const double> v,
                    std::span<const double> x);

}  // namespace massart
