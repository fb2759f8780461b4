#include "massart/piecewise_measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "massart/gaussian.hpp"
#include "massart/numeric.hpp"

namespace massart {

double GaussianPiece::mass() const noexcept {
  return scale * gaussian::interval_mass(lo + shift, hi + shift);
}

PiecewiseGaussianMeasure::PiecewiseGaussianMeasure(std::vector<GaussianPiece> pieces,
                                                   double tail_bound,
                                                   std::optional<double> normalizer)
    : pieces_(std::move(pieces)), tail_bound_(tail_bound) {
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& p = pieces_[i];
    if (!(p.lo <= p.hi) || !(p.scale >= 0.0))
      throw std::invalid_argument("PiecewiseGaussianMeasure: malformed piece");
    if (i > 0 && !(pieces_[i - 1].hi < p.lo))
      throw std::invalid_argument("PiecewiseGaussianMeasure: pieces overlap or are unsorted");
  }
  CompensatedSum total;
  cumulative_.reserve(pieces_.size());
  for (const auto& p : pieces_) {
    total += p.mass();
    cumulative_.push_back(total.value());
  }
  normalizer_ = normalizer.value_or(total.value());
  if (!(normalizer_ > 0.0))
    throw std::invalid_argument("PiecewiseGaussianMeasure: non-positive normalizer");
  const double retained = total.value();
  for (auto& c : cumulative_) c /= retained;
}

std::ptrdiff_t PiecewiseGaussianMeasure::find_piece(double x) const noexcept {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                             [](double v, const GaussianPiece& p) { return v < p.lo; });
  if (it == pieces_.begin()) return -1;
  --it;
  return (x <= it->hi) ? std::distance(pieces_.begin(), it) : -1;
}

double PiecewiseGaussianMeasure::density(double x) const noexcept {
  const auto i = find_piece(x);
  if (i < 0) return 0.0;
  const auto& p = pieces_[static_cast<std::size_t>(i)];
  return p.scale * gaussian::pdf(x + p.shift) / normalizer_;
}

MassWithTail PiecewiseGaussianMeasure::total_mass() const noexcept {
  CompensatedSum total;
  for (const auto& p : pieces_) total += p.mass();
  return {total.value(), tail_bound_};
}

double PiecewiseGaussianMeasure::mass_in(const IntervalUnion& region) const noexcept {
  CompensatedSum acc;
  const auto regions = region.intervals();
  std::size_t j = 0;
  for (const auto& p : pieces_) {
    while (j < regions.size() && regions[j].hi < p.lo) ++j;
    for (std::size_t r = j; r < regions.size() && regions[r].lo <= p.hi; ++r) {
      const double lo = std::max(p.lo, regions[r].lo);
      const double hi = std::min(p.hi, regions[r].hi);
      if (lo < hi) acc += p.scale * gaussian::interval_mass(lo + p.shift, hi + p.shift);
    }
  }
  return acc.value() / normalizer_;
}

double PiecewiseGaussianMeasure::cdf(double x) const noexcept {
  CompensatedSum acc;
  for (const auto& p : pieces_) {
    if (p.lo >= x) break;
    const double hi = std::min(p.hi, x);
    acc += p.scale * gaussian::interval_mass(p.lo + p.shift, hi + p.shift);
  }
  return acc.value() / normalizer_;
}

double PiecewiseGaussianMeasure::sample(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  const auto& p = pieces_[static_cast<std::size_t>(std::distance(cumulative_.begin(), it))];
  const double y = sample_truncated_standard_normal(p.lo + p.shift, p.hi + p.shift, rng);
  return std::clamp(y - p.shift, p.lo, p.hi);
}

IntervalUnion PiecewiseGaussianMeasure::support() const {
  std::vector<Interval> out;
  out.reserve(pieces_.size());
  for (const auto& p : pieces_) out.push_back({p.lo, p.hi});
  return IntervalUnion(std::move(out));
}

double sample_truncated_standard_normal(double a, double b, Rng& rng) {
  const double u = rng.uniform_open();
  double x;
  if (a >= 0.0) {
    // Upper tail: interpolate Q to keep precision far from the origin.
    const double qa = gaussian::upper_tail(a);
    const double qb = gaussian::upper_tail(b);
    const double q = qa - u * (qa - qb);
    x = (q > 0.0) ? gaussian::upper_quantile(q) : a;
  } else {
    const double pa = gaussian::cdf(a);
    const double pb = gaussian::cdf(b);
    const double p = pa + u * (pb - pa);
    x = (p > 0.0 && p < 1.0) ? gaussian::quantile(p) : a;
  }
  return std::clamp(x, a, b);
}

}  // namespace massart
