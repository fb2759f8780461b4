#include "massart/hard_pair.hpp"

#include <cmath>
#include <sstream>

#include "massart/gaussian.hpp"

namespace massart {

const char* to_string(ConfigErrorKind kind) noexcept {
  switch (kind) {
    case ConfigErrorKind::kZetaOutOfRange: return "zeta out of range (0, 1/2)";
    case ConfigErrorKind::kDimensionTooSmall: return "d must be at least 2";
    case ConfigErrorKind::kDeltaTooLarge: return "delta must be < 1";
    case ConfigErrorKind::kEpsilonNonPositive: return "epsilon must be > 0";
    case ConfigErrorKind::kEpsilonTooLarge: return "epsilon must be < delta/8";
    case ConfigErrorKind::kTruncationTooShort: return "truncation too short";
    case ConfigErrorKind::kEtaOutOfRange: return "eta out of range (0, 1/2]";
  }
  return "unknown configuration error";
}

double HardPairConfig::delta_for(double zeta, int d) noexcept {
  return 4.0 * std::sqrt(std::log(1.0 / zeta)) / d;
}

HardPairConfig HardPairConfig::make(double zeta, int d, double epsilon, int n_max) {
  HardPairConfig c;
  c.zeta = zeta;
  c.d = d;
  c.epsilon = epsilon;
  if (!(zeta > 0.0 && zeta < 0.5))
    throw ConfigError(ConfigErrorKind::kZetaOutOfRange, "zeta=" + std::to_string(zeta));
  if (d < 2) throw ConfigError(ConfigErrorKind::kDimensionTooSmall, "d=" + std::to_string(d));
  c.delta = delta_for(zeta, d);
  c.n_max = n_max > 0 ? n_max : static_cast<int>(std::ceil(12.0 / c.delta));
  c.validate();
  return c;
}

void HardPairConfig::validate() const {
  std::ostringstream detail;
  detail.precision(17);
  if (!(zeta > 0.0 && zeta < 0.5)) {
    detail << "zeta=" << zeta;
    throw ConfigError(ConfigErrorKind::kZetaOutOfRange, detail.str());
  }
  if (d < 2) {
    detail << "d=" << d;
    throw ConfigError(ConfigErrorKind::kDimensionTooSmall, detail.str());
  }
  if (!(delta < 1.0)) {
    detail << "delta=" << delta << " (zeta=" << zeta << ", d=" << d << ")";
    throw ConfigError(ConfigErrorKind::kDeltaTooLarge, detail.str());
  }
  if (!(epsilon > 0.0)) {
    detail << "epsilon=" << epsilon;
    throw ConfigError(ConfigErrorKind::kEpsilonNonPositive, detail.str());
  }
  if (!(epsilon < delta / 8.0)) {
    detail << "epsilon=" << epsilon << ", delta/8=" << delta / 8.0;
    throw ConfigError(ConfigErrorKind::kEpsilonTooLarge, detail.str());
  }
  if (!(n_max * delta >= 10.0) || n_max <= d) {
    detail << "n_max=" << n_max << ", n_max*delta=" << n_max * delta;
    throw ConfigError(ConfigErrorKind::kTruncationTooShort, detail.str());
  }
}

double periodic_box_tail_bound(double delta, double epsilon, int n_max) noexcept {
  // Each dropped piece weighs at most the Gaussian mass of one full period
  // ending at its right edge, so one side is bounded by Q(n_max delta + eps).
  return 2.0 * gaussian::upper_tail(n_max * delta + epsilon);
}

PiecewiseGaussianMeasure periodic_box_measure(double delta, double epsilon, int n_max) {
  if (!(delta > 0.0) || !(epsilon > 0.0) || !(epsilon <= delta / 2.0) || n_max < 0)
    throw std::invalid_argument("periodic_box_measure: need 0 < epsilon <= delta/2");
  const double scale = delta / (2.0 * epsilon);
  std::vector<GaussianPiece> pieces;
  pieces.reserve(static_cast<std::size_t>(2 * n_max + 1));
  for (int n = -n_max; n <= n_max; ++n) {
    double lo = n * delta - epsilon;
    double hi = n * delta + epsilon;
    // Touching pieces (epsilon = delta/2) are split at the shared endpoint.
    if (!pieces.empty() && !(pieces.back().hi < lo)) lo = std::nextafter(pieces.back().hi, hi);
    pieces.push_back({lo, hi, scale, 0.0});
  }
  return PiecewiseGaussianMeasure(std::move(pieces),
                                  periodic_box_tail_bound(delta, epsilon, n_max));
}

HardPair build_hard_pair(const HardPairConfig& config) {
  config.validate();
  const double delta = config.delta;
  const double eps = config.epsilon;
  const int d = config.d;
  const double scale = delta / (2.0 * eps);
  const double shift = 4.0 * eps;

  std::vector<GaussianPiece> a_pieces, b_pieces;
  std::vector<Interval> j1, j2;
  for (int n = -config.n_max; n <= config.n_max; ++n) {
    const double center = n * delta;
    a_pieces.push_back({center - eps, center + eps, scale, 0.0});
    if (std::abs(n) <= d) {
      b_pieces.push_back({center - 5.0 * eps, center - 3.0 * eps, scale, shift});
      j1.push_back({center - eps, center + eps});
      j2.push_back({center - 5.0 * eps, center - 3.0 * eps});
    } else {
      b_pieces.push_back(a_pieces.back());
    }
  }

  const double tail = periodic_box_tail_bound(delta, eps, config.n_max);
  PiecewiseGaussianMeasure a(std::move(a_pieces), tail);
  const double z = a.normalizer();
  PiecewiseGaussianMeasure b(std::move(b_pieces), tail, z);
  return HardPair{config, std::move(a), std::move(b), IntervalUnion(std::move(j1)),
                  IntervalUnion(std::move(j2))};
}

}  // namespace massart
