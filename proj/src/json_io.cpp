#include "massart/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace massart::io {
namespace {

void write_string(std::string& out, const std::string& s) {
  // Reuse the library's escaping for strings.
  out += json(s).dump();
}

void emit(std::string& out, const json& j, int indent, int level) {
  const std::string pad = indent >= 0 ? std::string(static_cast<std::size_t>(indent * (level + 1)), ' ') : "";
  const std::string close_pad = indent >= 0 ? std::string(static_cast<std::size_t>(indent * level), ' ') : "";
  const char* nl = indent >= 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        write_string(out, it.key());
        out += indent >= 0 ? ": " : ":";
        emit(out, it.value(), indent, level + 1);
      }
      out += nl;
      out += close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) {
          out += ",";
          out += nl;
        }
        out += pad;
        emit(out, j[i], indent, level + 1);
      }
      out += nl;
      out += close_pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      if (std::isfinite(x)) out += format17(x);
      else write_string(out, format17(x));
      return;
    }
    default:
      out += j.dump();
  }
}

json vec(const std::vector<double>& v) { return json(v); }

}  // namespace

std::string format17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump17(const json& j, int indent) {
  std::string out;
  emit(out, j, indent, 0);
  if (indent >= 0) out += "\n";
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << content;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json to_json(const HardPairConfig& c) {
  return {{"zeta", c.zeta}, {"d", c.d}, {"delta", c.delta}, {"epsilon", c.epsilon}, {"n_max", c.n_max}};
}

json to_json(const ChiSquare& c) {
  return {{"closed_form", c.closed_form}, {"quadrature", c.quadrature}};
}

json to_json(const MomentReport& r) {
  return {{"k", r.k},
          {"moments_A", vec(r.moments_a)},
          {"moments_B", vec(r.moments_b)},
          {"moments_gaussian", vec(r.moments_gaussian)},
          {"moments_A_quadrature", vec(r.moments_a_quadrature)},
          {"moments_B_quadrature", vec(r.moments_b_quadrature)},
          {"discrepancy_A", vec(r.discrepancy_a)},
          {"discrepancy_B", vec(r.discrepancy_b)},
          {"discrepancy_A_spectral", vec(r.discrepancy_a_spectral)},
          {"difference_AB", vec(r.difference_ab)},
          {"bound_AB", vec(r.bound_ab)},
          {"fourier_bounds", vec(r.fourier_bounds)},
          {"certified_A", vec(r.certified_a)},
          {"max_recurrence_quadrature_rel", r.max_recurrence_quadrature_rel},
          {"ab_bound_holds", r.ab_bound_holds},
          {"triangle_holds", r.triangle_holds},
          {"certificate_dominates", r.certificate_dominates},
          {"oracles_agree", r.oracles_agree},
          {"pass", r.pass()}};
}

json to_json(const AsymptoticPlan& p) {
  return {{"log_M", p.log_m_scale},
          {"eta", p.eta},
          {"zeta", p.zeta},
          {"constants",
           {{"C_tau", p.constants.c_tau},
            {"C_m", p.constants.c_m},
            {"C_d", p.constants.c_d},
            {"C_zeta", p.constants.c_zeta}}},
          {"l", p.l},
          {"log_tau", p.log_tau},
          {"m", p.m},
          {"d", p.d},
          {"k_real", p.k_real},
          {"k", p.k},
          {"delta", p.delta},
          {"log_epsilon", p.log_epsilon},
          {"log_delta_over_8", p.log_delta_over_8},
          {"c", p.c},
          {"M_prime_log", p.m_prime_log},
          {"feasible", p.feasible()},
          {"violations", p.violations},
          {"notes",
           "tau = M^(-Theta(l)) has an unspecified constant; log_tau is reported under the "
           "chosen C_tau, which is a free parameter"}};
}

json to_json(const ConsistencyReport& r) {
  return {{"samples", r.samples},       {"excluded", r.excluded},
          {"checked", r.checked},       {"agreements", r.agreements},
          {"in_J2", r.in_j2},           {"agreement_fraction", r.agreement_fraction},
          {"padding_zero", r.padding_zero}};
}

json to_json(const HalfspaceWeights& w) {
  return {{"M", w.ambient_dim}, {"M_prime", w.meaningful}, {"basis_order", "grlex"}, {"w", w.w}, {"w_low", w.w_low}};
}

json to_json(const ExperimentReport& r) {
  json seeds = json::array(), gaps = json::array(), learners = json::array();
  std::vector<std::uint64_t> seed_ids;
  for (const auto& s : r.seeds) {
    seed_ids.push_back(s.seed);
    json moment = json::array();
    for (const auto& q : s.moment_queries)
      moment.push_back({{"query", q.description},
                        {"answer_instance", q.answer_instance},
                        {"answer_null", q.answer_null},
                        {"truth_instance", q.truth_instance ? json(*q.truth_instance) : json()},
                        {"truth_null", q.truth_null ? json(*q.truth_null) : json()},
                        {"gap", q.gap}});
    gaps.push_back({{"seed", s.seed},
                    {"planted",
                     {{"query", s.planted.description},
                      {"answer_instance", s.planted.answer_instance},
                      {"answer_null", s.planted.answer_null},
                      {"truth_instance", s.planted.truth_instance ? json(*s.planted.truth_instance) : json()},
                      {"truth_null", s.planted.truth_null ? json(*s.planted.truth_null) : json()},
                      {"gap", s.planted.gap}}},
                    {"max_moment_gap", s.max_moment_gap},
                    {"direction_overlaps", s.direction_overlaps},
                    {"moment_queries", moment}});
    json errs = json::object();
    for (const auto& [name, e] : s.learner_errors) errs[name] = e;
    learners.push_back({{"seed", s.seed}, {"opt", s.opt}, {"errors", errs}});
  }
  return {{"tau", r.tau},
          {"eta", r.eta},
          {"m", r.m},
          {"seeds", seed_ids},
          {"queries_used", r.queries_used},
          {"gaps", gaps},
          {"learner_errors", learners},
          {"nu", r.nu},
          {"rho", r.rho},
          {"alpha_chi", r.alpha_chi},
          {"c", r.c},
          {"pair_bound", r.pair_bound},
          {"N_bound", r.N_bound},
          {"N_bound_caveat", r.N_bound_caveat},
          {"planted_gap_ok", r.planted_gap_ok},
          {"moment_gaps_ok", r.moment_gaps_ok},
          {"floor_ok", r.floor_ok}};
}

void write_dataset_csv(std::ostream& out, const LabeledBatch& batch) {
  std::string line;
  for (std::size_t i = 0; i < batch.m; ++i) line += "x_" + std::to_string(i + 1) + ",";
  out << line << "y\n";
  for (std::size_t r = 0; r < batch.size(); ++r) {
    line.clear();
    for (double x : batch.row(r)) {
      line += format17(x);
      line += ',';
    }
    line += batch.y[r] > 0 ? "1" : "-1";
    line += '\n';
    out << line;
  }
}

void write_density_csv(std::ostream& out, const HardPair& pair, double lo, double hi,
                       std::size_t points) {
  if (points < 2 || !(lo < hi)) throw std::invalid_argument("density grid needs >= 2 points and lo < hi");
  out << "x,density_A,density_B,in_J1,in_J2\n";
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = i + 1 == points ? hi : lo + step * static_cast<double>(i);
    out << format17(x) << ',' << format17(pair.a.density(x)) << ',' << format17(pair.b.density(x))
        << ',' << (pair.j1.contains(x) ? 1 : 0) << ',' << (pair.j2.contains(x) ? 1 : 0) << '\n';
  }
}

}  // namespace massart::io
