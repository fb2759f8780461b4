// massart-forge: plan, generate, verify and experiment with hard Massart instances.
//
// Every run writes `<primary output>.manifest.json`; `replay` re-executes a
// manifest into a scratch directory and compares output digests.
//
// Exit codes: 0 success, 1 internal error or failed checks, 2 invalid or
// infeasible input.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "massart/hard_pair.hpp"
#include "massart/instance.hpp"
#include "massart/json_io.hpp"
#include "massart/kernels.hpp"
#include "massart/planner.hpp"
#include "massart/rng.hpp"
#include "massart/sq_lab.hpp"
#include "massart/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace massart;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

/// Bad flag values that the library would not reject on its own.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json describe_output(const fs::path& path, const std::string& role) {
  const std::string bytes = io::read_file(path);
  return {{"role", role}, {"path", path.string()}, {"bytes", bytes.size()}, {"fnv1a64", fnv1a64(bytes)}};
}

/// One run: what the command wrote and how it went.
struct Run {
  std::string command;
  std::vector<std::string> argv;
  std::string output_flag;  // flag replay rewrites to redirect outputs
  fs::path primary;
  json config = json::object();
  std::uint64_t seed = 0;
  std::vector<std::pair<fs::path, std::string>> outputs;
  json timings = json::object();
  bool pass = true;
  std::string started;
};

void write_manifest(const Run& run) {
  json outputs = json::array();
  for (const auto& [path, role] : run.outputs) outputs.push_back(describe_output(path, role));
  const json manifest = {{"command", run.command},
                         {"argv", run.argv},
                         {"output_flag", run.output_flag},
                         {"config", run.config},
                         {"seed", run.seed},
                         {"version", MASSART_VERSION},
                         {"rng_algorithm", std::string(kRngAlgorithm)},
                         {"threads", kernels::max_threads()},
                         {"started_at", run.started},
                         {"finished_at", utc_now()},
                         {"outputs", outputs},
                         {"timings", run.timings},
                         {"pass", run.pass}};
  io::write_file(run.primary.string() + ".manifest.json", io::dump17(manifest) + "\n");
}

// Shared construction flags.
struct PairFlags {
  double zeta = 0.05;
  int d = 10;
  double epsilon = 0.05;

  void attach(CLI::App* app) {
    app->add_option("--zeta", zeta, "Tail parameter zeta in (0, 1/2)")->capture_default_str();
    app->add_option("--d", d, "Moment-matching degree parameter")->capture_default_str();
    app->add_option("--epsilon", epsilon, "Half-width of each support interval; must be < delta/8")
        ->capture_default_str();
  }
  HardPairConfig config() const { return desk_config(zeta, d, epsilon); }
};

void check_eta(double eta) {
  if (!(eta > 0.0 && eta <= 0.5)) throw ConfigError(ConfigErrorKind::kEtaOutOfRange, "eta=" + io::format17(eta));
}

struct PlanFlags {
  double log_m = 1e4;
  double zeta_exp = 0.5;
  std::optional<double> zeta;
  double eta = 0.49;
  Constants constants;
  std::string out = "plan.json";
};

int cmd_plan(const PlanFlags& f, Run& run) {
  const double zeta = f.zeta ? *f.zeta : std::exp(-std::pow(f.log_m, f.zeta_exp));
  check_eta(f.eta);
  const AsymptoticPlan p = evaluate_schedule(f.log_m, f.eta, zeta, f.constants);
  run.config = {{"log_M", f.log_m}, {"zeta", zeta}, {"zeta_exp", f.zeta_exp}, {"eta", f.eta},
                {"C_tau", f.constants.c_tau}, {"C_m", f.constants.c_m}, {"C_d", f.constants.c_d},
                {"C_zeta", f.constants.c_zeta}};
  const std::string text = io::dump17(io::to_json(p)) + "\n";
  io::write_file(run.primary, text);
  run.outputs.emplace_back(run.primary, "plan");
  std::cout << text;
  run.pass = p.feasible();
  if (!p.feasible()) {
    for (const auto& v : p.violations) std::cerr << "infeasible: " << v << "\n";
    return kExitInput;
  }
  return kExitOk;
}

struct GenFlags {
  PairFlags pair;
  double eta = 0.3;
  std::size_t m = 20;
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  std::string out = "dataset";
  bool redact = false;
};

int cmd_gen(const GenFlags& f, Run& run) {
  check_eta(f.eta);
  if (f.m < 2) throw InputError("m must be at least 2");
  auto pair = std::make_shared<const HardPair>(build_hard_pair(f.pair.config()));
  Rng dir_rng = Rng::stream(f.seed, 0);
  const MassartInstance inst = make_instance(pair, random_unit_vector(f.m, dir_rng), f.eta);
  Rng rng = Rng::stream(f.seed, 1);
  const LabeledBatch batch = sample_labeled(inst, rng, f.n);

  const fs::path csv = f.out + ".csv", sidecar = f.out + ".json";
  {
    std::ofstream os(csv, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + csv.string());
    io::write_dataset_csv(os, batch);
  }
  const auto& c = pair->config;
  json side = {{"m", f.m}, {"n", f.n}, {"eta", f.eta}, {"zeta", c.zeta}, {"d", c.d}, {"delta", c.delta},
               {"epsilon", c.epsilon}, {"seed", f.seed}, {"opt", inst.opt_error()}};
  if (!f.redact) side["v"] = std::vector<double>(inst.v().begin(), inst.v().end());
  io::write_file(sidecar, io::dump17(side) + "\n");

  run.config = {{"zeta", c.zeta}, {"d", c.d}, {"epsilon", c.epsilon}, {"delta", c.delta},
                {"eta", f.eta}, {"m", f.m}, {"n", f.n}, {"redact", f.redact}};
  run.outputs.emplace_back(csv, "dataset");
  run.outputs.emplace_back(sidecar, "sidecar");
  return kExitOk;
}

struct VerifyFlags {
  PairFlags pair;
  int k = 12;
  double eta = 0.3;
  std::size_t m = 20;
  std::size_t samples = 100000;
  std::size_t lift_samples = 10000;
  std::uint64_t seed = 1;
  std::string report = "verify_report.json";
};

int cmd_verify(const VerifyFlags& f, Run& run) {
  check_eta(f.eta);
  if (f.k < 0) throw InputError("k must be non-negative");
  VerifyOptions o;
  o.config = f.pair.config();
  o.k = f.k;
  o.eta = f.eta;
  o.m = f.m;
  o.samples = f.samples;
  o.lift_samples = f.lift_samples;
  o.seed = f.seed;
  const VerifyResult res = run_verification(o);
  io::write_file(run.primary, io::dump17(res.report) + "\n");
  run.outputs.emplace_back(run.primary, "report");
  run.config = {{"zeta", o.config.zeta}, {"d", o.config.d}, {"epsilon", o.config.epsilon},
                {"delta", o.config.delta}, {"k", f.k}, {"eta", f.eta}, {"m", f.m},
                {"samples", f.samples}, {"lift_samples", f.lift_samples}};
  for (const auto& c : res.checks) {
    run.timings[c.name] = c.seconds;
    std::cout << (c.pass ? "pass " : "FAIL ") << c.name << "\n";
  }
  run.pass = res.pass;
  return res.pass ? kExitOk : kExitInternal;
}

struct ExperimentFlags {
  PairFlags pair;
  double tau = 0.01;
  std::size_t seeds = 10;
  std::uint64_t seed = 1;
  std::vector<std::string> learners{"constant", "chow"};
  double eta = 0.3;
  std::size_t m = 20;
  std::size_t heldout = 100000;
  std::string out = "experiment.json";
};

int cmd_experiment(const ExperimentFlags& f, Run& run) {
  check_eta(f.eta);
  if (f.seeds == 0) throw InputError("need at least one seed");
  ExperimentConfig cfg;
  cfg.desk = f.pair.config();
  cfg.eta = f.eta;
  cfg.m = f.m;
  cfg.oracle.tau = f.tau;
  cfg.learners = f.learners;
  cfg.heldout = f.heldout;
  for (std::size_t i = 0; i < f.seeds; ++i) cfg.seeds.push_back(f.seed + i);
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentReport rep = distinguishing_experiment(cfg);
  run.timings["experiment"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io::write_file(run.primary, io::dump17(io::to_json(rep)) + "\n");
  run.outputs.emplace_back(run.primary, "report");
  run.config = {{"zeta", cfg.desk.zeta}, {"d", cfg.desk.d}, {"epsilon", cfg.desk.epsilon},
                {"tau", f.tau}, {"seeds", cfg.seeds}, {"learners", f.learners}, {"eta", f.eta},
                {"m", f.m}, {"heldout", f.heldout}};
  run.pass = rep.planted_gap_ok && rep.moment_gaps_ok && rep.floor_ok;
  std::cout << "planted_gap_ok=" << rep.planted_gap_ok << " moment_gaps_ok=" << rep.moment_gaps_ok
            << " floor_ok=" << rep.floor_ok << " queries_used=" << rep.queries_used << "\n";
  return kExitOk;
}

struct DensityFlags {
  PairFlags pair;
  std::size_t grid = 10000;
  std::string out = "density.csv";
};

int cmd_emit_density(const DensityFlags& f, Run& run) {
  if (f.grid < 2) throw InputError("grid needs at least 2 points");
  const HardPair pair = build_hard_pair(f.pair.config());
  const double half = pair.config.d * pair.config.delta + 1.0;
  {
    std::ofstream os(run.primary, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + run.primary.string());
    io::write_density_csv(os, pair, -half, half, f.grid);
  }
  run.config = {{"zeta", pair.config.zeta}, {"d", pair.config.d}, {"epsilon", pair.config.epsilon},
                {"delta", pair.config.delta}, {"grid", f.grid}, {"lo", -half}, {"hi", half}};
  run.outputs.emplace_back(run.primary, "density");
  return kExitOk;
}

int dispatch(const std::vector<std::string>& args, bool quiet);

int cmd_replay(const std::string& manifest_path, const std::string& scratch) {
  const json m = json::parse(io::read_file(manifest_path));
  std::vector<std::string> argv = m.at("argv").get<std::vector<std::string>>();
  const std::string flag = m.at("output_flag").get<std::string>();
  const fs::path dir = scratch.empty() ? fs::temp_directory_path() / ("massart-replay-" + fnv1a64(manifest_path + utc_now()))
                                       : fs::path(scratch);
  fs::create_directories(dir);

  // Point the output flag into the scratch directory, keeping the file name.
  std::string original;
  bool replaced = false;
  for (std::size_t i = 0; i + 1 < argv.size(); ++i)
    if (argv[i] == flag) {
      original = argv[i + 1];
      argv[i + 1] = (dir / fs::path(original).filename()).string();
      replaced = true;
    }
  if (!replaced) {
    original = m.at("outputs").at(0).at("path").get<std::string>();
    if (flag == "--out" && m.at("command") == "gen") original = original.substr(0, original.size() - 4);
    argv.push_back(flag);
    argv.push_back((dir / fs::path(original).filename()).string());
  }
  const int code = dispatch(argv, true);

  bool identical = true;
  json rows = json::array();
  for (const auto& o : m.at("outputs")) {
    const fs::path rerun = dir / fs::path(o.at("path").get<std::string>()).filename();
    json row = {{"role", o.at("role")}, {"path", rerun.string()}, {"expected", o.at("fnv1a64")}};
    if (fs::exists(rerun)) {
      const json got = describe_output(rerun, o.at("role"));
      row["actual"] = got.at("fnv1a64");
      row["identical"] = got.at("fnv1a64") == o.at("fnv1a64") && got.at("bytes") == o.at("bytes");
    } else {
      row["identical"] = false;
    }
    identical = identical && row["identical"].get<bool>();
    rows.push_back(row);
  }
  std::cout << io::dump17({{"manifest", manifest_path}, {"exit_code", code}, {"identical", identical},
                           {"outputs", rows}})
            << "\n";
  return identical ? kExitOk : kExitInternal;
}

void add_constants(CLI::App* app, Constants& c) {
  app->add_option("--C-tau", c.c_tau, "Constant in tau = M^(-C_tau l)")->capture_default_str();
  app->add_option("--C-m", c.c_m, "Constant in m = C_m l")->capture_default_str();
  app->add_option("--C-d", c.c_d, "Constant in d")->capture_default_str();
  app->add_option("--C-zeta", c.c_zeta, "Constant in the zeta constraint")->capture_default_str();
}

void apply_thread_cap() {
  if (const char* env = std::getenv("MASSART_FORGE_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) throw InputError("MASSART_FORGE_THREADS must be a positive integer");
    kernels::set_thread_cap(static_cast<int>(n));
  }
}

int dispatch(const std::vector<std::string>& args, bool quiet) {
  CLI::App app{"Hard Massart-noise instances: planning, generation, verification, SQ experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(MASSART_VERSION));

  PlanFlags plan_f;
  auto* plan = app.add_subcommand("plan", "Evaluate the asymptotic parameter schedule");
  plan->add_option("--log-M", plan_f.log_m, "Natural log of the target dimension M")->capture_default_str();
  plan->add_option("--zeta-exp", plan_f.zeta_exp, "zeta = exp(-(log M)^e) unless --zeta is given")
      ->capture_default_str();
  plan->add_option("--zeta", plan_f.zeta, "Explicit zeta");
  plan->add_option("--eta", plan_f.eta, "Massart noise bound in (0, 1/2]")->capture_default_str();
  add_constants(plan, plan_f.constants);
  plan->add_option("--out", plan_f.out, "Plan JSON path")->capture_default_str();

  GenFlags gen_f;
  auto* gen = app.add_subcommand("gen", "Sample a labeled dataset");
  gen_f.pair.attach(gen);
  gen->add_option("--eta", gen_f.eta, "Massart noise bound in (0, 1/2]")->capture_default_str();
  gen->add_option("--m", gen_f.m, "Ambient dimension")->capture_default_str();
  gen->add_option("--n", gen_f.n, "Number of rows")->capture_default_str();
  gen->add_option("--seed", gen_f.seed, "64-bit seed")->capture_default_str();
  gen->add_option("--out", gen_f.out, "Output stem; writes <out>.csv and <out>.json")->capture_default_str();
  gen->add_flag("--redact", gen_f.redact, "Omit the hidden direction v from the sidecar");

  VerifyFlags ver_f;
  auto* ver = app.add_subcommand("verify", "Run the construction verification suite");
  ver_f.pair.attach(ver);
  ver->add_option("--k", ver_f.k, "Highest moment checked")->capture_default_str();
  ver->add_option("--eta", ver_f.eta, "Massart noise bound in (0, 1/2]")->capture_default_str();
  ver->add_option("--m", ver_f.m, "Dimension for the sampling checks")->capture_default_str();
  ver->add_option("--samples", ver_f.samples, "Samples for the Massart checks")->capture_default_str();
  ver->add_option("--lift-samples", ver_f.lift_samples, "Samples for the lift check")->capture_default_str();
  ver->add_option("--seed", ver_f.seed, "64-bit seed")->capture_default_str();
  ver->add_option("--report", ver_f.report, "Report JSON path")->capture_default_str();

  ExperimentFlags exp_f;
  auto* exp = app.add_subcommand("experiment", "Distinguishing experiment in the simulated SQ model");
  exp_f.pair.attach(exp);
  exp->add_option("--tau", exp_f.tau, "Oracle tolerance")->capture_default_str();
  exp->add_option("--seeds", exp_f.seeds, "Number of seeds, starting at --seed")->capture_default_str();
  exp->add_option("--seed", exp_f.seed, "First seed")->capture_default_str();
  exp->add_option("--learners", exp_f.learners, "Comma-separated: constant, chow")
      ->delimiter(',')
      ->check(CLI::IsMember({"constant", "chow"}));
  exp->add_option("--eta", exp_f.eta, "Massart noise bound in (0, 1/2]")->capture_default_str();
  exp->add_option("--m", exp_f.m, "Ambient dimension")->capture_default_str();
  exp->add_option("--heldout", exp_f.heldout, "Held-out samples per learner")->capture_default_str();
  exp->add_option("--out", exp_f.out, "Report JSON path")->capture_default_str();

  DensityFlags den_f;
  auto* den = app.add_subcommand("emit-density", "Write the densities of A and B on a grid");
  den_f.pair.attach(den);
  den->add_option("--grid", den_f.grid, "Number of grid points")->capture_default_str();
  den->add_option("--out", den_f.out, "CSV path")->capture_default_str();

  std::string manifest, scratch;
  auto* rep = app.add_subcommand("replay", "Re-run a manifest and compare output digests");
  rep->add_option("--manifest", manifest, "Manifest written by an earlier run")->required();
  rep->add_option("--dir", scratch, "Scratch directory for the rerun (default: a temp directory)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    apply_thread_cap();
    if (rep->parsed()) return cmd_replay(manifest, scratch);

    Run run;
    run.argv = args;
    run.started = utc_now();
    int code = kExitOk;
    if (plan->parsed()) {
      run.command = "plan";
      run.output_flag = "--out";
      run.primary = plan_f.out;
      code = cmd_plan(plan_f, run);
    } else if (gen->parsed()) {
      run.command = "gen";
      run.output_flag = "--out";
      run.primary = gen_f.out + ".csv";
      run.seed = gen_f.seed;
      code = cmd_gen(gen_f, run);
    } else if (ver->parsed()) {
      run.command = "verify";
      run.output_flag = "--report";
      run.primary = ver_f.report;
      run.seed = ver_f.seed;
      code = cmd_verify(ver_f, run);
    } else if (exp->parsed()) {
      run.command = "experiment";
      run.output_flag = "--out";
      run.primary = exp_f.out;
      run.seed = exp_f.seed;
      code = cmd_experiment(exp_f, run);
    } else {
      run.command = "emit-density";
      run.output_flag = "--out";
      run.primary = den_f.out;
      code = cmd_emit_density(den_f, run);
    }
    write_manifest(run);
    if (!quiet) std::cerr << "manifest: " << run.primary.string() << ".manifest.json\n";
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InfeasiblePlan& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(std::vector<std::string>(argv + 1, argv + argc), false);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
