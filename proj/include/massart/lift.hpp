#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "massart/instance.hpp"
#include "massart/numeric.hpp"

namespace massart {

class BasisTooLargeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline constexpr std::size_t kDefaultBasisCap = 20'000'000;

/// All multi-indices alpha in N^m with |alpha| <= max_degree, in graded
/// lexicographic order: by total degree, then lexicographically descending
/// (for m = 2: 1, x1, x2, x1^2, x1 x2, x2^2).
class MonomialBasis {
 public:
  std::size_t vars() const noexcept { return m_; }
  int max_degree() const noexcept { return max_degree_; }
  std::size_t size() const noexcept { return degree_.size(); }

  std::span<const std::uint8_t> exponents(std::size_t k) const {
    return {exps_.data() + k * m_, m_};
  }
  int degree(std::size_t k) const noexcept { return degree_[k]; }
  /// Index of alpha - e_i where i is the first variable with alpha_i > 0 (k > 0).
  std::size_t parent(std::size_t k) const noexcept { return parent_[k]; }
  std::size_t parent_var(std::size_t k) const noexcept { return var_[k]; }

  /// Position of alpha in the order; throws if |alpha| > max_degree.
  std::size_t rank(std::span<const std::uint8_t> alpha) const;

  friend bool operator==(const MonomialBasis&, const MonomialBasis&) = default;

 private:
  friend MonomialBasis enumerate_basis(std::size_t m, int max_degree, std::size_t cap);
  std::uint64_t count_with_degree(std::size_t vars, int degree) const;

  std::size_t m_ = 0;
  int max_degree_ = 0;
  std::vector<std::uint8_t> exps_;
  std::vector<std::uint8_t> degree_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> var_;
  std::vector<std::uint64_t> degree_offset_;  // first index of each degree
};

/// Throws BasisTooLargeError when binom(m + D, D) exceeds `cap`.
MonomialBasis enumerate_basis(std::size_t m, int max_degree,
                              std::size_t cap = kDefaultBasisCap);

/// (x^alpha) over the basis.
std::vector<double> veronese(const MonomialBasis& basis, std::span<const double> x);
void veronese_into(const MonomialBasis& basis, std::span<const double> x, std::span<double> out);

/// The weight of monomial k is the double-double w[k] + w_low[k]. The monomial
/// form of a high-degree PTF cancels by up to 17 orders of magnitude, so plain
/// doubles cannot realize its sign; w alone is the rounded weight vector.
struct HalfspaceWeights {
  std::vector<double> w;  ///< length ambient_dim; entries past basis.size() are zero
  std::vector<double> w_low;
  std::size_t ambient_dim = 0;
  std::size_t meaningful = 0;  ///< M'

  DoubleDouble weight(std::size_t k) const noexcept { return {w[k], w_low[k]}; }
};

/// Weights with <w, V(x)> = sum_j c_j <v,x>^j, zero-padded to `ambient_dim`.
/// Multinomial coefficients are exact integers before conversion.
HalfspaceWeights halfspace_from_ptf(std::span<const double> v,
                                    std::span<const DoubleDouble> coeffs,
                                    const MonomialBasis& basis, std::size_t ambient_dim);
HalfspaceWeights halfspace_from_ptf(std::span<const double> v, std::span<const double> coeffs,
                                    const MonomialBasis& basis, std::size_t ambient_dim);

/// <w, V(x)> for each row of x, evaluated in double-double and rounded.
/// Serial and OpenMP variants return identical values.
std::vector<double> lift_scores_serial(const MonomialBasis& basis, const HalfspaceWeights& w,
                                       const LabeledBatch& batch);
std::vector<double> lift_scores(const MonomialBasis& basis, const HalfspaceWeights& w,
                                const LabeledBatch& batch);

struct ConsistencyReport {
  std::size_t samples = 0;
  std::size_t excluded = 0;  ///< projections within 1e-9 of a J2 endpoint
  std::size_t checked = 0;
  std::size_t agreements = 0;
  std::size_t in_j2 = 0;
  double agreement_fraction = 0.0;
  bool padding_zero = false;
};

ConsistencyReport check_consistency(const MassartInstance& instance, const MonomialBasis& basis,
                                    const HalfspaceWeights& weights, const LabeledBatch& samples);

}  // namespace massart
