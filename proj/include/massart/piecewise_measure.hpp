#pragma once

#include <optional>
#include <span>
#include <vector>

#include "massart/intervals.hpp"
#include "massart/rng.hpp"

namespace massart {

/// One piece of a piecewise-Gaussian measure: on [lo, hi] the (unnormalized)
/// density is scale * G(x + shift).
struct GaussianPiece {
  double lo = 0.0;
  double hi = 0.0;
  double scale = 1.0;
  double shift = 0.0;

  /// Unnormalized mass scale * P[lo + shift <= N(0,1) <= hi + shift].
  double mass() const noexcept;
};

struct MassWithTail {
  double value = 0.0;       ///< mass carried by the retained pieces
  double tail_bound = 0.0;  ///< upper bound on the mass of pieces that were dropped
};

/// Finite list of disjoint Gaussian pieces, normalized by a constant Z.
/// Immutable after construction; all queries are safe to call concurrently.
class PiecewiseGaussianMeasure {
 public:
  /// When `normalizer` is empty, Z is the total mass of the retained pieces.
  /// `tail_bound` bounds the unnormalized mass of pieces not represented.
  explicit PiecewiseGaussianMeasure(std::vector<GaussianPiece> pieces, double tail_bound = 0.0,
                                    std::optional<double> normalizer = std::nullopt);

  std::span<const GaussianPiece> pieces() const noexcept { return pieces_; }
  double normalizer() const noexcept { return normalizer_; }

  /// Normalized density; zero outside every piece.
  double density(double x) const noexcept;

  /// Index of the piece containing x (closed, first match), or -1.
  std::ptrdiff_t find_piece(double x) const noexcept;

  /// Unnormalized total mass of the retained pieces plus the truncation bound.
  MassWithTail total_mass() const noexcept;

  /// Normalized mass of `region`.
  double mass_in(const IntervalUnion& region) const noexcept;

  /// Normalized CDF.
  double cdf(double x) const noexcept;

  /// Exact draw: piece by mass, then inverse-CDF inside the piece.
  double sample(Rng& rng) const;

  /// Support of the pieces as an interval union.
  IntervalUnion support() const;

 private:
  std::vector<GaussianPiece> pieces_;
  std::vector<double> cumulative_;  // normalized running masses for piece selection
  double normalizer_ = 1.0;
  double tail_bound_ = 0.0;
};

/// Inverse-CDF draw from N(0,1) conditioned on [a, b].
double sample_truncated_standard_normal(double a, double b, Rng& rng);

}  // namespace massart
