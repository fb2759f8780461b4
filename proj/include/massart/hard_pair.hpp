#pragma once

#include <stdexcept>
#include <string>

#include "massart/intervals.hpp"
#include "massart/piecewise_measure.hpp"

namespace massart {

enum class ConfigErrorKind {
  kZetaOutOfRange,      // zeta not in (0, 1/2)
  kDimensionTooSmall,   // d < 2
  kDeltaTooLarge,       // delta >= 1
  kEpsilonNonPositive,  // epsilon <= 0
  kEpsilonTooLarge,     // epsilon >= delta / 8
  kTruncationTooShort,  // n_max * delta < 10 or n_max <= d
  kEtaOutOfRange,       // eta not in (0, 1/2]
};

const char* to_string(ConfigErrorKind kind) noexcept;

/// Invalid or infeasible construction parameters.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(ConfigErrorKind kind, const std::string& detail)
      : std::invalid_argument(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}
  ConfigErrorKind kind() const noexcept { return kind_; }

 private:
  ConfigErrorKind kind_;
};

/// Parameters of the one-dimensional construction. Build through `make`,
/// which derives delta = 4 sqrt(ln(1/zeta)) / d and the default truncation.
struct HardPairConfig {
  double zeta = 0.05;
  int d = 10;
  double delta = 0.0;
  double epsilon = 0.05;
  int n_max = 0;  ///< periods retained on each side of the origin

  /// Throws ConfigError when any precondition fails. `n_max = 0` selects
  /// ceil(12 / delta).
  static HardPairConfig make(double zeta, int d, double epsilon, int n_max = 0);

  static double delta_for(double zeta, int d) noexcept;

  void validate() const;
};

/// The measures A and B together with the interval systems J1 (+1 only)
/// and J2 (-1 only).
struct HardPair {
  HardPairConfig config;
  PiecewiseGaussianMeasure a;
  PiecewiseGaussianMeasure b;
  IntervalUnion j1;
  IntervalUnion j2;

  /// Closure of the complement of J1 u J2, where both labels are possible.
  IntervalUnion outside_j() const { return j1.merged_with(j2).complement(); }
};

HardPair build_hard_pair(const HardPairConfig& config);

/// The unnormalized periodic box measure with pieces [n delta - eps, n delta + eps],
/// |n| <= n_max, each weighted by delta / (2 eps). Requires 0 < eps <= delta / 2.
/// Normalized by its own total mass.
PiecewiseGaussianMeasure periodic_box_measure(double delta, double epsilon, int n_max);

/// Bound on the unnormalized mass of the periodic box measure beyond n_max periods.
double periodic_box_tail_bound(double delta, double epsilon, int n_max) noexcept;

}  // namespace massart
