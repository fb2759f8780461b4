#include "massart/instance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace massart {

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> random_unit_vector(std::size_t m, Rng& rng) {
  std::vector<double> v(m);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& c : v) {
      c = rng.normal();
      norm2 += c * c;
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& c : v) c *= inv;
  return v;
}

LabeledSample LabeledBatch::sample(std::size_t i) const {
  auto r = row(i);
  return {std::vector<double>(r.begin(), r.end()), y[i]};
}

LabeledBatch LabeledSource::draw_batch(Rng& rng, std::size_t n) const {
  LabeledBatch b;
  b.m = dim();
  b.x.resize(n * b.m);
  b.y.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    b.y[i] = static_cast<std::int8_t>(draw(rng, {b.x.data() + i * b.m, b.m}));
  return b;
}

LabeledBatch sample_labeled(const LabeledSource& source, Rng& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("sample count must be >= 1");
  return source.draw_batch(rng, n);
}

HouseholderFrame::HouseholderFrame(std::span<const double> v) : u_(v.begin(), v.end()) {
  if (u_.empty()) throw std::invalid_argument("direction must be non-empty");
  if (v[0] > 0.0) {
    u_[0] += 1.0;  // u = e1 + v, H v = -e1
    first_sign_ = -1.0;
  } else {
    for (auto& c : u_) c = -c;  // u = e1 - v, H v = e1
    u_[0] += 1.0;
    first_sign_ = 1.0;
  }
  two_over_uu_ = 2.0 / dot(u_, u_);
}

void HouseholderFrame::embed(double t, std::span<const double> g, std::span<double> x) const {
  const std::size_t m = u_.size();
  x[0] = first_sign_ * t;
  if (g.data() != x.data() + 1)
    for (std::size_t i = 1; i < m; ++i) x[i] = g[i - 1];
  const double f = two_over_uu_ * dot(u_, {x.data(), m});
  for (std::size_t i = 0; i < m; ++i) x[i] -= f * u_[i];
}

namespace {

std::vector<double> checked_unit(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("direction must be non-empty");
  const double n = std::sqrt(dot(v, v));
  if (!(std::abs(n - 1.0) <= 1e-12))
    throw std::invalid_argument("direction must be a unit vector, |v| = " + std::to_string(n));
  return v;
}

double checked_eta(double eta) {
  if (!(eta > 0.0 && eta <= 0.5))
    throw ConfigError(ConfigErrorKind::kEtaOutOfRange, "eta=" + std::to_string(eta));
  return eta;
}

}  // namespace

MassartInstance::MassartInstance(std::shared_ptr<const HardPair> pair, std::vector<double> v,
                                 double eta)
    : pair_(std::move(pair)),
      v_(checked_unit(std::move(v))),
      eta_(checked_eta(eta)),
      p_(1.0 - eta),
      j2_poly_dd_(build_interval_polynomial_dd(pair_->j2)),
      j2_poly_(j2_poly_dd_.size()),
      frame_(v_) {
  for (std::size_t i = 0; i < j2_poly_dd_.size(); ++i) j2_poly_[i] = j2_poly_dd_[i].value();
}

MassartInstance make_instance(std::shared_ptr<const HardPair> pair, std::vector<double> v,
                              double eta) {
  if (!pair) throw std::invalid_argument("make_instance: null pair");
  return MassartInstance(std::move(pair), std::move(v), eta);
}

int MassartInstance::draw(Rng& rng, std::span<double> x) const {
  const bool positive = rng.uniform() < p_;
  const double t = positive ? pair_->a.sample(rng) : pair_->b.sample(rng);
  const std::size_t m = v_.size();
  // The orthogonal part is written straight into x[1..m-1]; embed reads it in place.
  for (std::size_t i = 1; i < m; ++i) x[i] = rng.normal();
  frame_.embed(t, x.subspan(1), x);
  return positive ? 1 : -1;
}

std::optional<ProjectedLaw> MassartInstance::projected_law(std::span<const double> u) const {
  ProjectedLaw law;
  law.a = std::clamp(dot(u, v_), -1.0, 1.0);
  law.components = {{p_, 1, &pair_->a}, {1.0 - p_, -1, &pair_->b}};
  return law;
}

double MassartInstance::projection(std::span<const double> x) const {
  if (x.size() != v_.size()) throw std::invalid_argument("dimension mismatch");
  return dot(v_, x);
}

double MassartInstance::flip_probability_at(double t) const {
  if (pair_->j1.contains(t) || pair_->j2.contains(t)) return 0.0;
  const double a = pair_->a.density(t);
  const double b = pair_->b.density(t);
  if (a == 0.0 && b == 0.0)
    throw ZeroDensityError("marginal density is zero at projection " + std::to_string(t));
  if (a == b) return eta_;
  const double q = 1.0 - p_;
  return q * b / (p_ * a + q * b);
}

double MassartInstance::flip_probability(std::span<const double> x) const {
  return flip_probability_at(projection(x));
}

int MassartInstance::ptf_sign(std::span<const double> x) const {
  return pair_->j2.contains(projection(x)) ? -1 : 1;
}

double MassartInstance::off_j_mass() const {
  // A and B coincide off J1 u J2, so the mixture mass there is A's.
  const IntervalUnion off = pair_->outside_j();
  return p_ * pair_->a.mass_in(off) + (1.0 - p_) * pair_->b.mass_in(off);
}

NullDistribution::NullDistribution(std::size_t m, double p) : m_(m), p_(p) {
  if (m == 0) throw std::invalid_argument("dimension must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
}

int NullDistribution::draw(Rng& rng, std::span<double> x) const {
  const int y = rng.uniform() < p_ ? 1 : -1;
  for (std::size_t i = 0; i < m_; ++i) x[i] = rng.normal();
  return y;
}

std::optional<ProjectedLaw> NullDistribution::projected_law(std::span<const double>) const {
  ProjectedLaw law;
  law.a = 0.0;
  law.components = {{p_, 1, nullptr}, {1.0 - p_, -1, nullptr}};
  return law;
}

LabeledBatch sample_null(std::size_t m, double p, Rng& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("sample count must be >= 1");
  return NullDistribution(m, p).draw_batch(rng, n);
}

HalfspaceSource::HalfspaceSource(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw std::invalid_argument("weights must be non-empty");
}

int HalfspaceSource::draw(Rng& rng, std::span<double> x) const {
  for (std::size_t i = 0; i < w_.size(); ++i) x[i] = rng.normal();
  return dot(w_, x) >= 0.0 ? 1 : -1;
}

std::vector<DoubleDouble> build_interval_polynomial_dd(const IntervalUnion& j2) {
  if (j2.empty()) throw std::invalid_argument("interval polynomial needs at least one interval");
  // The monomial form is badly conditioned far from the origin, so the
  // expansion runs in double-double.
  std::vector<DoubleDouble> c{DoubleDouble(1.0)};
  for (const auto& iv : j2.intervals()) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi))
      throw std::invalid_argument("interval polynomial needs finite endpoints");
    // Multiply by t^2 - (a + b) t + a b.
    const DoubleDouble s = DoubleDouble::two_sum(iv.lo, iv.hi);
    const DoubleDouble pr = DoubleDouble::two_prod(iv.lo, iv.hi);
    std::vector<DoubleDouble> next(c.size() + 2);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += pr * c[i];
      next[i + 1] += -(s * c[i]);
      next[i + 2] += c[i];
    }
    c = std::move(next);
  }
  return c;
}

std::vector<double> build_interval_polynomial(const IntervalUnion& j2) {
  const auto dd = build_interval_polynomial_dd(j2);
  std::vector<double> c(dd.size());
  for (std::size_t i = 0; i < dd.size(); ++i) c[i] = dd[i].value();
  return c;
}

double evaluate_polynomial(std::span<const double> coeffs, double t) noexcept {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * t + coeffs[i];
  return acc;
}

}  // namespace massart
