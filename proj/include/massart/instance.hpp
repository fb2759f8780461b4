#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "massart/hard_pair.hpp"
#include "massart/numeric.hpp"
#include "massart/rng.hpp"

namespace massart {

/// The conditional label law is undefined where the marginal has no density.
class ZeroDensityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct LabeledSample {
  std::vector<double> x;
  int y = 1;
};

/// n rows of dimension m, row-major.
struct LabeledBatch {
  std::size_t m = 0;
  std::vector<double> x;
  std::vector<std::int8_t> y;

  std::size_t size() const noexcept { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * m, m}; }
  LabeledSample sample(std::size_t i) const;
};

/// Law of (<u, x>, y) when it reduces to one-dimensional pieces:
/// <u, x> = a * T + sqrt(1 - a^2) * N(0,1), with T drawn from `measure`
/// (standard normal when null) and y fixed per component.
struct ProjectedLaw {
  struct Component {
    double weight = 0.0;
    int label = 1;
    const PiecewiseGaussianMeasure* measure = nullptr;
  };
  double a = 0.0;
  std::vector<Component> components;
};

/// Anything that produces labeled Gaussian-marginal examples.
class LabeledSource {
 public:
  virtual ~LabeledSource() = default;
  virtual std::size_t dim() const noexcept = 0;
  /// Writes one example into x (size dim()) and returns its label.
  virtual int draw(Rng& rng, std::span<double> x) const = 0;
  /// Set when expectations of projected queries have a one-dimensional form.
  virtual std::optional<ProjectedLaw> projected_law(std::span<const double> u) const = 0;

  LabeledBatch draw_batch(Rng& rng, std::size_t n) const;
};

/// Completes a unit vector v to an orthonormal basis via one Householder
/// reflection H with H v = -e_1 (v_1 > 0) or H v = e_1 (otherwise).
class HouseholderFrame {
 public:
  explicit HouseholderFrame(std::span<const double> v);
  /// x = t v + (orthogonal part given by g, size m - 1).
  void embed(double t, std::span<const double> g, std::span<double> x) const;

 private:
  std::vector<double> u_;
  double two_over_uu_ = 0.0;
  double first_sign_ = 1.0;  // coordinate 1 of H z equals first_sign_ * t along v
};

/// The labeled distribution with hidden direction v: with probability p = 1 - eta
/// draw <v,x> ~ A with label +1, else <v,x> ~ B with label -1; the orthogonal
/// complement of v is standard Gaussian.
class MassartInstance final : public LabeledSource {
 public:
  MassartInstance(std::shared_ptr<const HardPair> pair, std::vector<double> v, double eta);

  std::size_t dim() const noexcept override { return v_.size(); }
  int draw(Rng& rng, std::span<double> x) const override;
  std::optional<ProjectedLaw> projected_law(std::span<const double> u) const override;

  const HardPair& pair() const noexcept { return *pair_; }
  std::shared_ptr<const HardPair> pair_ptr() const noexcept { return pair_; }
  std::span<const double> v() const noexcept { return v_; }
  double eta() const noexcept { return eta_; }
  double p() const noexcept { return p_; }
  /// q with coefficients rounded to double.
  const std::vector<double>& j2_polynomial() const noexcept { return j2_poly_; }
  /// q with double-double coefficients; the lift uses these.
  const std::vector<DoubleDouble>& j2_polynomial_dd() const noexcept { return j2_poly_dd_; }

  double projection(std::span<const double> x) const;

  /// Exact eta(x): 0 on J1 u J2, eta where A = B > 0. Throws ZeroDensityError in gaps.
  double flip_probability(std::span<const double> x) const;
  double flip_probability_at(double t) const;

  /// -1 iff <v,x> lies in J2 (closed intervals).
  int ptf_sign(std::span<const double> x) const;

  /// Marginal mass with <v,x> outside J1 u J2.
  double off_j_mass() const;
  double opt_error() const { return eta_ * off_j_mass(); }

 private:
  std::shared_ptr<const HardPair> pair_;
  std::vector<double> v_;
  double eta_;
  double p_;
  std::vector<DoubleDouble> j2_poly_dd_;
  std::vector<double> j2_poly_;
  HouseholderFrame frame_;
};

/// Rejects non-unit v (tolerance 1e-12) and eta outside (0, 1/2].
MassartInstance make_instance(std::shared_ptr<const HardPair> pair, std::vector<double> v,
                              double eta);

LabeledBatch sample_labeled(const LabeledSource& source, Rng& rng, std::size_t n);

/// x standard Gaussian in R^m, y = +1 with probability p independently.
class NullDistribution final : public LabeledSource {
 public:
  NullDistribution(std::size_t m, double p);
  std::size_t dim() const noexcept override { return m_; }
  int draw(Rng& rng, std::span<double> x) const override;
  std::optional<ProjectedLaw> projected_law(std::span<const double> u) const override;
  double p() const noexcept { return p_; }

 private:
  std::size_t m_;
  double p_;
};

LabeledBatch sample_null(std::size_t m, double p, Rng& rng, std::size_t n);

/// Noise-free y = sign(<w, x>) with ties to +1; a known-easy source for learner self-tests.
class HalfspaceSource final : public LabeledSource {
 public:
  explicit HalfspaceSource(std::vector<double> w);
  std::size_t dim() const noexcept override { return w_.size(); }
  int draw(Rng& rng, std::span<double> x) const override;
  std::optional<ProjectedLaw> projected_law(std::span<const double>) const override {
    return std::nullopt;
  }

 private:
  std::vector<double> w_;
};

/// Coefficients c_0..c_D of q(t) = prod_i (t - a_i)(t - b_i) over the intervals,
/// expanded in double-double and rounded.
std::vector<double> build_interval_polynomial(const IntervalUnion& j2);
std::vector<DoubleDouble> build_interval_polynomial_dd(const IntervalUnion& j2);

/// Horner evaluation.
double evaluate_polynomial(std::span<const double> coeffs, double t) noexcept;

double dot(std::span<const double> a, std::span<const double> b) noexcept;

/// Uniform unit vector in R^m.
std::vector<double> random_unit_vector(std::size_t m, Rng& rng);

}  // namespace massart
