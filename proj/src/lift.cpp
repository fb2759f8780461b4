#include "massart/lift.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "massart/numeric.hpp"

namespace massart {
namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return a > kSaturated - b ? kSaturated : a + b;
}

// count[r][e]: monomials of exact degree e in r variables, saturating.
std::vector<std::vector<std::uint64_t>> degree_counts(std::size_t m, int max_degree) {
  std::vector<std::vector<std::uint64_t>> c(m + 1, std::vector<std::uint64_t>(max_degree + 1, 0));
  c[0][0] = 1;
  for (std::size_t r = 1; r <= m; ++r) {
    c[r][0] = 1;
    for (int e = 1; e <= max_degree; ++e) c[r][e] = sat_add(c[r - 1][e], c[r][e - 1]);
  }
  return c;
}

// Prefix of the basis that carries nonzero weight; parents always precede children.
std::size_t active_prefix(const HalfspaceWeights& w) {
  std::size_t n = w.meaningful;
  while (n > 1 && w.w[n - 1] == 0.0 && w.w_low[n - 1] == 0.0) --n;
  return n;
}

double score_row(const MonomialBasis& basis, const HalfspaceWeights& w, std::size_t prefix,
                 std::span<const double> x, std::vector<DoubleDouble>& buf) {
  buf.resize(prefix);
  buf[0] = 1.0;
  DoubleDouble acc = w.weight(0);
  for (std::size_t k = 1; k < prefix; ++k) {
    buf[k] = buf[basis.parent(k)] * x[basis.parent_var(k)];
    acc += w.weight(k) * buf[k];
  }
  return acc.value();
}

}  // namespace

std::uint64_t MonomialBasis::count_with_degree(std::size_t vars, int degree) const {
  if (vars == 0) return degree == 0 ? 1 : 0;
  // binom(degree + vars - 1, vars - 1), small arguments only (called within the basis).
  std::uint64_t c = 1;
  const std::uint64_t r = std::min<std::uint64_t>(vars - 1, static_cast<std::uint64_t>(degree));
  const std::uint64_t n = static_cast<std::uint64_t>(degree) + vars - 1;
  for (std::uint64_t i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

std::size_t MonomialBasis::rank(std::span<const std::uint8_t> alpha) const {
  if (alpha.size() != m_) throw std::invalid_argument("multi-index has wrong length");
  int j = 0;
  for (auto a : alpha) j += a;
  if (j > max_degree_) throw std::out_of_range("multi-index degree exceeds basis");
  std::uint64_t pos = degree_offset_[static_cast<std::size_t>(j)];
  int rem = j;
  for (std::size_t i = 0; i + 1 < m_; ++i) {
    // Indices with a larger exponent in slot i come first.
    for (int b = alpha[i] + 1; b <= rem; ++b) pos += count_with_degree(m_ - i - 1, rem - b);
    rem -= alpha[i];
  }
  return static_cast<std::size_t>(pos);
}

MonomialBasis enumerate_basis(std::size_t m, int max_degree, std::size_t cap) {
  if (m == 0) throw std::invalid_argument("basis needs at least one variable");
  if (max_degree < 0 || max_degree > 255) throw std::invalid_argument("degree must lie in [0, 255]");
  const auto counts = degree_counts(m, max_degree);
  std::uint64_t total = 0;
  for (int e = 0; e <= max_degree; ++e) total = sat_add(total, counts[m][e]);
  if (total > cap)
    throw BasisTooLargeError("basis with m=" + std::to_string(m) + ", degree " +
                             std::to_string(max_degree) + " has " +
                             (total == kSaturated ? std::string(">2^64") : std::to_string(total)) +
                             " monomials, cap is " + std::to_string(cap));

  MonomialBasis b;
  b.m_ = m;
  b.max_degree_ = max_degree;
  b.exps_.reserve(total * m);
  b.degree_.reserve(total);
  std::vector<std::uint8_t> alpha(m, 0);
  std::uint64_t offset = 0;
  for (int j = 0; j <= max_degree; ++j) {
    b.degree_offset_.push_back(offset);
    offset += counts[m][j];
    // Descending lex within the degree: slot i runs from the remaining degree down to 0.
    auto fill = [&](auto&& self, std::size_t i, int rem) -> void {
      if (i + 1 == m) {
        alpha[i] = static_cast<std::uint8_t>(rem);
        b.exps_.insert(b.exps_.end(), alpha.begin(), alpha.end());
        b.degree_.push_back(static_cast<std::uint8_t>(j));
        return;
      }
      for (int a = rem; a >= 0; --a) {
        alpha[i] = static_cast<std::uint8_t>(a);
        self(self, i + 1, rem - a);
      }
    };
    fill(fill, 0, j);
  }
  b.degree_offset_.push_back(offset);

  b.parent_.assign(total, 0);
  b.var_.assign(total, 0);
  std::vector<std::uint8_t> tmp(m);
  for (std::size_t k = 1; k < total; ++k) {
    auto e = b.exponents(k);
    std::copy(e.begin(), e.end(), tmp.begin());
    std::size_t i = 0;
    while (tmp[i] == 0) ++i;
    --tmp[i];
    b.parent_[k] = static_cast<std::uint32_t>(b.rank(tmp));
    b.var_[k] = static_cast<std::uint32_t>(i);
  }
  return b;
}

void veronese_into(const MonomialBasis& basis, std::span<const double> x, std::span<double> out) {
  if (x.size() != basis.vars()) throw std::invalid_argument("veronese: dimension mismatch");
  if (out.size() < basis.size()) throw std::invalid_argument("veronese: output too short");
  out[0] = 1.0;
  for (std::size_t k = 1; k < basis.size(); ++k)
    out[k] = out[basis.parent(k)] * x[basis.parent_var(k)];
}

std::vector<double> veronese(const MonomialBasis& basis, std::span<const double> x) {
  std::vector<double> out(basis.size());
  veronese_into(basis, x, out);
  return out;
}

HalfspaceWeights halfspace_from_ptf(std::span<const double> v,
                                    std::span<const DoubleDouble> coeffs,
                                    const MonomialBasis& basis, std::size_t ambient_dim) {
  using boost::multiprecision::cpp_int;
  if (v.size() != basis.vars()) throw std::invalid_argument("direction has wrong dimension");
  if (coeffs.empty()) throw std::invalid_argument("polynomial has no coefficients");
  const int degree = static_cast<int>(coeffs.size()) - 1;
  if (degree > basis.max_degree())
    throw std::out_of_range("polynomial degree " + std::to_string(degree) +
                            " exceeds basis degree " + std::to_string(basis.max_degree()));
  if (ambient_dim < basis.size())
    throw std::invalid_argument("ambient dimension smaller than the basis");

  HalfspaceWeights out;
  out.ambient_dim = ambient_dim;
  out.meaningful = basis.size();
  out.w.assign(ambient_dim, 0.0);
  out.w_low.assign(ambient_dim, 0.0);

  std::size_t end = 0;
  while (end < basis.size() && basis.degree(end) <= degree) ++end;
  // multinomial(alpha) = multinomial(alpha - e_i) * |alpha| / alpha_i, exact.
  std::vector<cpp_int> multinomial(end);
  std::vector<DoubleDouble> v_pow(end);
  multinomial[0] = 1;
  v_pow[0] = 1.0;
  out.w[0] = coeffs[0].hi;
  out.w_low[0] = coeffs[0].lo;
  for (std::size_t k = 1; k < end; ++k) {
    const std::size_t par = basis.parent(k);
    const std::size_t i = basis.parent_var(k);
    multinomial[k] = multinomial[par] * basis.degree(k) / basis.exponents(k)[i];
    v_pow[k] = v_pow[par] * v[i];
    const double m_hi = multinomial[k].convert_to<double>();
    const double m_lo = cpp_int(multinomial[k] - cpp_int(m_hi)).convert_to<double>();
    const DoubleDouble wk =
        coeffs[static_cast<std::size_t>(basis.degree(k))] * DoubleDouble(m_hi, m_lo) * v_pow[k];
    out.w[k] = wk.hi;
    out.w_low[k] = wk.lo;
  }
  return out;
}

HalfspaceWeights halfspace_from_ptf(std::span<const double> v, std::span<const double> coeffs,
                                    const MonomialBasis& basis, std::size_t ambient_dim) {
  const std::vector<DoubleDouble> dd(coeffs.begin(), coeffs.end());
  return halfspace_from_ptf(v, dd, basis, ambient_dim);
}

std::vector<double> lift_scores_serial(const MonomialBasis& basis, const HalfspaceWeights& w,
                                       const LabeledBatch& batch) {
  const std::size_t prefix = active_prefix(w);
  std::vector<double> out(batch.size());
  std::vector<DoubleDouble> buf;
  for (std::size_t r = 0; r < batch.size(); ++r) out[r] = score_row(basis, w, prefix, batch.row(r), buf);
  return out;
}

std::vector<double> lift_scores(const MonomialBasis& basis, const HalfspaceWeights& w,
                                const LabeledBatch& batch) {
  const std::size_t prefix = active_prefix(w);
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
  std::vector<double> out(batch.size());
#pragma omp parallel
  {
    std::vector<DoubleDouble> buf;
#pragma omp for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r)
      out[static_cast<std::size_t>(r)] =
          score_row(basis, w, prefix, batch.row(static_cast<std::size_t>(r)), buf);
  }
  return out;
}

ConsistencyReport check_consistency(const MassartInstance& instance, const MonomialBasis& basis,
                                    const HalfspaceWeights& weights, const LabeledBatch& samples) {
  if (samples.m != basis.vars() || samples.m != instance.dim())
    throw std::invalid_argument("check_consistency: dimension mismatch");
  ConsistencyReport r;
  r.samples = samples.size();
  r.padding_zero = true;
  for (std::size_t k = weights.meaningful; k < weights.w.size(); ++k)
    if (weights.w[k] != 0.0 || weights.w_low[k] != 0.0) r.padding_zero = false;

  const auto scores = lift_scores(basis, weights, samples);
  const auto& j2 = instance.pair().j2;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double t = instance.projection(samples.row(i));
    bool near_endpoint = false;
    for (const auto& iv : j2.intervals())
      if (std::abs(t - iv.lo) <= 1e-9 || std::abs(t - iv.hi) <= 1e-9) near_endpoint = true;
    if (near_endpoint) {
      ++r.excluded;
      continue;
    }
    ++r.checked;
    const int ptf = instance.ptf_sign(samples.row(i));
    if (ptf < 0) ++r.in_j2;
    const int lifted = scores[i] < 0.0 ? -1 : 1;
    if (lifted == ptf) ++r.agreements;
  }
  r.agreement_fraction =
      r.checked == 0 ? 0.0 : static_cast<double>(r.agreements) / static_cast<double>(r.checked);
  return r;
}

}  // namespace massart
