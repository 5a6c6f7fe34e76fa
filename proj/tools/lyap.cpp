// Command-line front end: wires JSON run configs to the estimators and
// verifiers and writes CSV/JSON artifacts plus a run manifest.
//
// Exit codes: 0 success, 1 computation error (e.g. mid-run blow-up, partial
// artifacts are flushed with a failure marker), 2 config error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lyap/exponents.hpp"
#include "lyap/model.hpp"
#include "lyap/parallel.hpp"
#include "lyap/projective.hpp"
#include "lyap/sde.hpp"
#include "lyap/spanning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct BundledConfig {
  const char* name;
  const char* description;
  const char* text;
};

const BundledConfig kBundled[] = {
    {"ou-benchmark", "2d Ornstein-Uhlenbeck spectrum benchmark (exact exponents -0.1, -0.2)",
     R"({
  "command": "spectrum",
  "model": {"kind": "linear", "damping": [[1.0, 0.0], [0.0, 2.0]], "q": [1.0, 1.0],
            "epsilon": 0.1, "scaling": "fluctuation-dissipation"},
  "integrator": {"dt": 1e-3, "T": 200.0, "seed": 1},
  "spectrum": {"m_vectors": 2, "n_seeds": 8}
})"},
    {"l96-n7", "Lorenz-96 n=7 trajectory sample in fluctuation-dissipation scaling",
     R"({
  "command": "simulate",
  "model": {"kind": "l96", "n": 7, "q": [1.0, 1.0], "epsilon": 0.1,
            "scaling": "fluctuation-dissipation"},
  "integrator": {"dt": 1e-3, "T": 200.0, "seed": 7, "record_stride": 100}
})"},
    {"l96-n10-sweep", "Lorenz-96 n=10 damping sweep for the lambda1/eps trend",
     R"({
  "command": "sweep",
  "model": {"kind": "l96", "n": 10, "q": [1.0, 1.0], "epsilon": 0.1,
            "scaling": "fluctuation-dissipation"},
  "integrator": {"dt": 1e-3, "T": 10000.0, "seed": 10},
  "sweep": {"eps": [0.5, 0.2, 0.1, 0.05], "n_seeds": 8}
})"},
    {"gnse-N2", "Galerkin Navier-Stokes N=2: exact Lie-algebra generation certificate",
     R"({
  "command": "verify-hk",
  "model": {"kind": "gnse", "N": 2, "r": "1", "epsilon": 0.1,
            "scaling": "fluctuation-dissipation",
            "forced": [{"k": [1, 0], "alpha": 1.0, "beta": 1.0},
                       {"k": [-1, 0], "alpha": 1.0, "beta": 1.0},
                       {"k": [0, 1], "alpha": 1.0, "beta": 1.0},
                       {"k": [0, -1], "alpha": 1.0, "beta": 1.0},
                       {"k": [1, 1], "alpha": 1.0, "beta": 1.0},
                       {"k": [-1, -1], "alpha": 1.0, "beta": 1.0}]}
})"},
    {"gnse-distinct-N8", "exhaustive distinctness certificate at N=8, r=1",
     R"({
  "command": "verify-distinctness",
  "distinctness": {"N": 8, "r": "1"}
})"},
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json load_config(const std::string& path_or_example) {
  for (const auto& b : kBundled)
    if (path_or_example == b.name) return json::parse(b.text);
  std::ifstream in(path_or_example);
  if (!in) throw ConfigError("cannot read config '" + path_or_example + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config " + path_or_example + ": " + e.what());
  }
}

/// Shared command-line state: config source, overrides, output directory.
struct Options {
  std::string config_source;
  std::string out_dir = "lyap-out";
  int jobs = lyap::hardware_jobs();
  std::optional<std::uint64_t> seed;
  std::optional<double> T, dt;
  std::optional<std::string> eps_csv;
  std::optional<int> N;
  std::optional<std::string> r_text;

  json effective_config(const std::string& command) const {
    json cfg = config_source.empty() ? json{{"command", command}} : load_config(config_source);
    cfg["command"] = command;
    if (seed) cfg["integrator"]["seed"] = *seed;
    if (T) cfg["integrator"]["T"] = *T;
    if (dt) cfg["integrator"]["dt"] = *dt;
    if (eps_csv) {
      std::vector<double> eps;
      std::stringstream ss(*eps_csv);
      std::string item;
      while (std::getline(ss, item, ',')) eps.push_back(std::stod(item));
      cfg["sweep"]["eps"] = eps;
    }
    if (N) cfg["distinctness"]["N"] = *N;
    if (r_text) cfg["distinctness"]["r"] = *r_text;
    return cfg;
  }
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config_source, "config file path or bundled example name");
  cmd->add_option("--out", opt.out_dir, "output directory");
  cmd->add_option("--jobs", opt.jobs, "worker pool size");
  cmd->add_option("--seed", opt.seed, "override integrator seed");
  cmd->add_option("--T", opt.T, "override horizon");
  cmd->add_option("--dt", opt.dt, "override step size");
}

lyap::IntegratorConfig integrator_from(const json& cfg) {
  lyap::IntegratorConfig ic;
  if (cfg.contains("integrator")) {
    const auto& j = cfg.at("integrator");
    if (j.contains("dt")) ic.dt = j.at("dt").get<double>();
    if (j.contains("T")) ic.T = j.at("T").get<double>();
    if (j.contains("burn_in")) ic.burn_in = j.at("burn_in").get<double>();
    if (j.contains("seed")) ic.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("scheme"))
      ic.scheme = lyap::scheme_from_string(j.at("scheme").get<std::string>());
    if (j.contains("record_stride")) ic.record_stride = j.at("record_stride").get<std::int64_t>();
  }
  return ic;
}

lyap::BilinearModel model_from(const json& cfg) {
  if (!cfg.contains("model")) throw ConfigError("config has no 'model' section");
  try {
    return lyap::model_from_json(cfg.at("model"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid model: ") + e.what());
  }
}

Eigen::VectorXd x0_from(const json& cfg, int n) {
  if (cfg.contains("x0")) {
    const auto v = cfg.at("x0").get<std::vector<double>>();
    if (static_cast<int>(v.size()) != n) throw ConfigError("x0 has the wrong dimension");
    return Eigen::Map<const Eigen::VectorXd>(v.data(), n);
  }
  return Eigen::VectorXd::Constant(n, 0.1);
}

/// Collects artifacts for one run and finalizes the manifest.
class RunDir {
 public:
  RunDir(const std::string& dir, const json& config)
      : dir_(dir), t0_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
    manifest_["version"] = kVersion;
    manifest_["command"] = config.at("command");
    manifest_["config"] = config;
    config_hash_ = lyap::hex64(lyap::fnv1a64(config.dump()));
    manifest_["config_hash"] = config_hash_;
    if (config.contains("integrator") && config.at("integrator").contains("seed"))
      manifest_["seed"] = config.at("integrator").at("seed");
  }

  const std::string& config_hash() const { return config_hash_; }
  fs::path path(const std::string& name) const { return fs::path(dir_) / name; }

  std::ofstream open_csv(const std::string& name, const std::string& header) {
    std::ofstream out(path(name));
    if (!out) throw std::runtime_error("cannot open " + path(name).string());
    out << "# config_hash=" << config_hash_;
    if (manifest_.contains("seed")) out << " seed=" << manifest_.at("seed");
    out << "\n" << header << "\n";
    out.precision(17);
    artifacts_.push_back(name);
    return out;
  }

  void write_json(const std::string& name, json payload) {
    payload["config_hash"] = config_hash_;
    if (manifest_.contains("seed")) payload["seed"] = manifest_.at("seed");
    std::ofstream out(path(name));
    if (!out) throw std::runtime_error("cannot open " + path(name).string());
    out << payload.dump(2) << "\n";
    artifacts_.push_back(name);
  }

  void note_artifact(const std::string& name) { artifacts_.push_back(name); }

  void finalize(const std::string& status, const std::string& error = "") {
    manifest_["status"] = status;
    if (!error.empty()) manifest_["error"] = error;
    manifest_["artifacts"] = artifacts_;
    manifest_["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    std::ofstream out(path("manifest.json"));
    out << manifest_.dump(2) << "\n";
  }

 private:
  std::string dir_;
  json manifest_;
  std::string config_hash_;
  std::vector<std::string> artifacts_;
  std::chrono::steady_clock::time_point t0_;
};

// ---- command bodies ----

void cmd_simulate(const json& cfg, RunDir& run) {
  const auto model = model_from(cfg);
  const auto ic = integrator_from(cfg);
  const auto x0 = x0_from(cfg, model.dim());
  // keep whatever was recorded if the run blows up: partial artifacts are
  // flushed before the failure is reported
  const auto [traj, blowup_time] = lyap::integrate_keep_partial(model, x0, ic);
  lyap::write_trajectory_csv(traj, run.path("trajectory.csv").string(), run.config_hash());
  run.note_artifact("trajectory.csv");
  lyap::write_trajectory_frames(traj, run.path("trajectory.bin").string(),
                                lyap::fnv1a64(cfg.dump()));
  run.note_artifact("trajectory.bin");
  run.write_json("simulate.json", json{{"model", model.fingerprint()},
                                       {"frames", traj.states.size()},
                                       {"dt", traj.dt},
                                       {"record_stride", traj.stride},
                                       {"max_abs_state", traj.max_abs_state},
                                       {"mean_sq_norm", traj.mean_sq_norm},
                                       {"complete", !blowup_time.has_value()}});
  if (blowup_time)
    throw lyap::BlowupError(*blowup_time,
                            "trajectory blew up at t = " + std::to_string(*blowup_time));
}

void cmd_spectrum(const json& cfg, RunDir& run, int jobs) {
  const auto model = model_from(cfg);
  const auto ic = integrator_from(cfg);
  int m_vectors = model.dim();
  int n_seeds = 4;
  if (cfg.contains("spectrum")) {
    const auto& j = cfg.at("spectrum");
    if (j.contains("m_vectors")) m_vectors = j.at("m_vectors").get<int>();
    if (j.contains("n_seeds")) n_seeds = j.at("n_seeds").get<int>();
  }
  const auto x0 = x0_from(cfg, model.dim());
  const auto est = lyap::lyapunov_spectrum(model, ic, m_vectors, n_seeds, jobs, x0);

  // running estimates along the first seed
  lyap::SpectrumOptions opts;
  opts.series_stride = std::max<std::int64_t>(1, lyap::step_count(ic) / 2000);
  const auto series = lyap::qr_spectrum(model, x0, ic, m_vectors, opts);
  std::string header = "t";
  for (int i = 1; i <= m_vectors; ++i) header += ",lambda" + std::to_string(i);
  auto csv = run.open_csv("spectrum.csv", header);
  for (std::size_t s = 0; s < series.series_times.size(); ++s) {
    csv << series.series_times[s];
    for (double v : series.series_estimates[s]) csv << ',' << v;
    csv << "\n";
  }

  run.write_json("spectrum.json", json{{"model", est.model_fingerprint},
                                       {"exponents", est.exponents},
                                       {"stderr", est.stderrs},
                                       {"lambda_sum", est.lambda_sum},
                                       {"lambda_sum_stderr", est.lambda_sum_stderr},
                                       {"minus_eps_trA", est.minus_eps_trA},
                                       {"T", est.T},
                                       {"dt", est.dt},
                                       {"n_seeds", est.n_seeds}});
  std::cout << "lambda1 = " << est.exponents.front() << " +- " << est.stderrs.front() << "\n";
}

void cmd_sweep(const json& cfg, RunDir& run, int jobs) {
  const auto model = model_from(cfg);
  const auto ic = integrator_from(cfg);
  if (!cfg.contains("sweep") || !cfg.at("sweep").contains("eps"))
    throw ConfigError("sweep needs a 'sweep.eps' list");
  const auto eps = cfg.at("sweep").at("eps").get<std::vector<double>>();
  const int n_seeds =
      cfg.at("sweep").contains("n_seeds") ? cfg.at("sweep").at("n_seeds").get<int>() : 4;
  const auto sweep = lyap::epsilon_sweep(model, eps, ic, n_seeds, jobs);

  auto csv = run.open_csv("sweep.csv", "epsilon,lambda1,stderr,ratio,lambda_sum,minus_eps_trA");
  json rows = json::array();
  for (const auto& row : sweep.rows) {
    csv << row.epsilon << ',' << row.lambda1.value << ',' << row.lambda1.stderr_ << ','
        << row.ratio << ',' << row.lambda_sum << ',' << row.minus_eps_trA << "\n";
    rows.push_back(json{{"epsilon", row.epsilon},
                        {"lambda1", row.lambda1.value},
                        {"stderr", row.lambda1.stderr_},
                        {"ratio", row.ratio},
                        {"ratio_stderr", row.ratio_stderr},
                        {"lambda_sum", row.lambda_sum},
                        {"minus_eps_trA", row.minus_eps_trA},
                        {"n_seeds", row.lambda1.n_seeds},
                        {"excluded_runs", row.lambda1.excluded_runs}});
  }
  run.write_json("sweep.json", json{{"model", model.fingerprint()},
                                    {"rows", rows},
                                    {"trend_statistic", sweep.trend_statistic},
                                    {"trend_stderr", sweep.trend_stderr},
                                    {"T", ic.T},
                                    {"dt", ic.dt}});
  std::cout << "trend statistic " << sweep.trend_statistic << " +- " << sweep.trend_stderr
            << "\n";
}

void cmd_moment(const json& cfg, RunDir& run, int jobs) {
  const auto model = model_from(cfg);
  const auto ic = integrator_from(cfg);
  if (!cfg.contains("moment") || !cfg.at("moment").contains("p"))
    throw ConfigError("moment needs a 'moment.p' list");
  const auto p = cfg.at("moment").at("p").get<std::vector<double>>();
  const int ensemble =
      cfg.at("moment").contains("ensemble") ? cfg.at("moment").at("ensemble").get<int>() : 200;
  const auto res = lyap::moment_lyapunov(model, ic, p, ensemble, jobs);
  auto csv = run.open_csv("moment.csv", "p,Lambda,stderr");
  json rows = json::array();
  for (const auto& est : res.estimates) {
    csv << est.p << ',' << est.value << ',' << est.stderr_ << "\n";
    rows.push_back(json{{"p", est.p}, {"Lambda", est.value}, {"stderr", est.stderr_}});
  }
  run.write_json("moment.json", json{{"model", model.fingerprint()},
                                     {"rows", rows},
                                     {"ensemble", res.ensemble},
                                     {"excluded_runs", res.excluded_runs},
                                     {"T_effective", res.T_effective}});
}

void cmd_fisher(const json& cfg, RunDir& run) {
  if (!cfg.contains("fisher")) throw ConfigError("fisher-check needs a 'fisher' section");
  const auto& j = cfg.at("fisher");
  const auto diag = j.at("damping").get<std::vector<double>>();
  const auto q = j.at("q").get<std::vector<double>>();
  const double eps = j.at("epsilon").get<double>();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) A(i, i) = diag[i];
  const auto check = lyap::gaussian_fisher_check(A, q, eps);
  run.write_json("fisher.json", json{{"FI_rho", check.fi_rho},
                                     {"minus_lambda_sum", check.minus_lambda_sum},
                                     {"residual", check.residual}});
  std::cout << "FI = " << check.fi_rho << ", eps tr A = " << check.minus_lambda_sum
            << ", residual " << check.residual << "\n";
}

void cmd_verify_hk(const json& cfg, RunDir& run) {
  lyap::HkFamily fam;
  if (cfg.contains("model")) {
    fam = lyap::build_Hk(model_from(cfg));
  } else if (cfg.contains("distinctness")) {
    const auto& j = cfg.at("distinctness");
    fam = lyap::build_gnse_Hk(j.at("N").get<int>(),
                              lyap::parse_rational(j.at("r").get<std::string>()));
  } else {
    throw ConfigError("verify-hk needs a 'model' section or --N/--r");
  }
  const auto closure = lyap::verify_sl_generation(fam);
  run.write_json("hk-certificate.json", lyap::spanning_certificate(fam, closure));
  std::cout << "dim " << closure.dim << " / " << fam.n * fam.n - 1
            << (closure.saturated ? " (saturated)" : " (not saturated)") << "\n";
}

void cmd_verify_distinctness(const json& cfg, RunDir& run, int jobs) {
  if (!cfg.contains("distinctness"))
    throw ConfigError("verify-distinctness needs 'distinctness' (or --N/--r)");
  const int N = cfg.at("distinctness").at("N").get<int>();
  const auto r = lyap::parse_rational(cfg.at("distinctness").at("r").get<std::string>());
  const long points = (2L * N + 1) * (2L * N + 1) - 1;
  if (N > 8)
    std::cerr << "cost estimate: " << points << "^3 = "
              << static_cast<double>(points) * points * points
              << " ordered triples before pruning; exact arithmetic throughout\n";
  const auto report = lyap::check_distinctness(N, r, jobs, &std::cerr);
  const bool verified = report.violations.empty() || lyap::reverify_violations(report, jobs);
  auto j = lyap::distinctness_to_json(report);
  j["violations_reverified"] = verified;
  run.write_json("distinctness.json", j);
  std::cout << "examined " << report.examined << ", excluded " << report.excluded
            << ", satisfied " << report.satisfied << ", violations "
            << report.violations.size() << "\n";
}

void cmd_verify_zn(const json& cfg, RunDir& run) {
  const auto model = model_from(cfg);
  if (model.kind() != lyap::ModelKind::GNSE || !model.gnse())
    throw ConfigError("verify-zn needs a gnse model");
  const auto zn = lyap::zn_propagation(*model.gnse());
  run.write_json("zn.json", lyap::zn_to_json(zn));
  std::cout << (zn.full ? "forcing propagates to the full lattice\n"
                        : "propagation stalls before the full lattice\n");
}

void cmd_shear(const json& cfg, RunDir& run) {
  // runs on the conservative part of the configured model; the library
  // operation itself insists on eps = 0
  const auto configured = model_from(cfg);
  const auto conservative = lyap::strip_forcing(configured).with_epsilon(0.0);
  double T = 5.0, dt = 1e-4;
  int samples = 50;
  if (cfg.contains("shear")) {
    const auto& j = cfg.at("shear");
    if (j.contains("T")) T = j.at("T").get<double>();
    if (j.contains("dt")) dt = j.at("dt").get<double>();
    if (j.contains("samples")) samples = j.at("samples").get<int>();
  }
  Eigen::VectorXd x0;
  if (cfg.contains("x0")) {
    x0 = x0_from(cfg, conservative.dim());
  } else {
    x0 = Eigen::VectorXd::Zero(conservative.dim());
    x0[0] = x0[1] = 1.0;
  }
  const auto report = lyap::shear_bound_check(conservative, x0, T, dt, samples);
  auto csv = run.open_csv("shear.csv", "t,op_norm,rhs,satisfied,residual");
  for (const auto& s : report.samples)
    csv << s.t << ',' << s.op_norm << ',' << s.rhs << ',' << (s.satisfied ? 1 : 0) << ','
        << s.decomposition_residual << "\n";
  run.write_json("shear.json", json{{"all_satisfied", report.all_satisfied},
                                    {"max_residual", report.max_residual},
                                    {"samples", report.samples.size()},
                                    {"T", T},
                                    {"dt", dt}});
  std::cout << (report.all_satisfied ? "shear bound satisfied at every sample\n"
                                     : "shear bound violated\n");
}

const std::map<std::string, const char*> kColumnDocs = {
    {"trajectory",
     "t: time; x1..xn: state coordinates (gnuplot: plot 'trajectory.csv' u 1:2 w l)"},
    {"spectrum", "t: time; lambda_i: running i-th exponent estimate (u 1:2 w l)"},
    {"sweep",
     "epsilon; lambda1; stderr; ratio=lambda1/epsilon; lambda_sum; minus_eps_trA (u 1:4 w lp)"},
    {"moment", "p; Lambda(p); jackknife stderr (u 1:2 w lp)"},
    {"shear", "t; op_norm=|D Phi^t|; rhs=t|B|/|x0|; satisfied; residual (u 1:2 w l)"},
};

int dispatch(const std::string& command, const json& cfg, const Options& opt) {
  RunDir run(opt.out_dir, cfg);
  try {
    if (command == "simulate") cmd_simulate(cfg, run);
    else if (command == "spectrum") cmd_spectrum(cfg, run, opt.jobs);
    else if (command == "sweep") cmd_sweep(cfg, run, opt.jobs);
    else if (command == "moment") cmd_moment(cfg, run, opt.jobs);
    else if (command == "fisher-check") cmd_fisher(cfg, run);
    else if (command == "verify-hk") cmd_verify_hk(cfg, run);
    else if (command == "verify-distinctness") cmd_verify_distinctness(cfg, run, opt.jobs);
    else if (command == "verify-zn") cmd_verify_zn(cfg, run);
    else if (command == "shear-check") cmd_shear(cfg, run);
    else throw ConfigError("unknown command '" + command + "'");
  } catch (const ConfigError& e) {
    run.finalize("config-error", e.what());
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    run.finalize("config-error", e.what());
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    run.finalize("failed", e.what());
    std::cerr << "computation failed: " << e.what() << "\n";
    return 1;
  }
  run.finalize("ok");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Lyapunov exponents and Lie-algebra spanning checks for weakly damped bilinear SDE"};
  app.require_subcommand(1);

  Options opt;
  std::string column_kind;

  auto* examples = app.add_subcommand("examples", "list bundled example configs");

  auto* columns = app.add_subcommand("columns", "describe the columns of an artifact kind");
  columns->add_option("kind", column_kind, "trajectory|spectrum|sweep|moment|shear")->required();

  auto* simulate = app.add_subcommand("simulate", "integrate the SDE and export the trajectory");
  add_common(simulate, opt);
  auto* spectrum = app.add_subcommand("spectrum", "Lyapunov spectrum by QR reorthonormalization");
  add_common(spectrum, opt);
  auto* sweep = app.add_subcommand("sweep", "top exponent across a damping sweep");
  add_common(sweep, opt);
  sweep->add_option("--eps", opt.eps_csv, "comma-separated descending damping values");
  auto* moment = app.add_subcommand("moment", "moment Lyapunov exponents Lambda(p)");
  add_common(moment, opt);
  auto* fisher = app.add_subcommand("fisher-check", "Gaussian Fisher-information identity check");
  add_common(fisher, opt);
  auto* verify_hk = app.add_subcommand("verify-hk", "exact sl-generation certificate for {H^k}");
  add_common(verify_hk, opt);
  verify_hk->add_option("--N", opt.N, "lattice truncation (gnse family without a model)");
  verify_hk->add_option("--r", opt.r_text, "aspect ratio as p/q");
  auto* verify_distinct =
      app.add_subcommand("verify-distinctness", "exhaustive distinctness condition scan");
  add_common(verify_distinct, opt);
  verify_distinct->add_option("--N", opt.N, "lattice truncation (>= 8)");
  verify_distinct->add_option("--r", opt.r_text, "aspect ratio as p/q");
  auto* verify_zn = app.add_subcommand("verify-zn", "forcing propagation to the full lattice");
  add_common(verify_zn, opt);
  auto* shear =
      app.add_subcommand("shear-check", "deterministic shear lower bound along the flow");
  add_common(shear, opt);
  auto* runcmd = app.add_subcommand("run", "execute the command named inside the config");
  add_common(runcmd, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems are config errors
  }

  try {
    if (examples->parsed()) {
      for (const auto& b : kBundled) std::cout << b.name << "  -  " << b.description << "\n";
      return 0;
    }
    if (columns->parsed()) {
      const auto it = kColumnDocs.find(column_kind);
      if (it == kColumnDocs.end()) {
        std::cerr << "unknown artifact kind '" << column_kind << "'\n";
        return 2;
      }
      std::cout << it->second << "\n";
      return 0;
    }

    std::string command;
    if (simulate->parsed()) command = "simulate";
    else if (spectrum->parsed()) command = "spectrum";
    else if (sweep->parsed()) command = "sweep";
    else if (moment->parsed()) command = "moment";
    else if (fisher->parsed()) command = "fisher-check";
    else if (verify_hk->parsed()) command = "verify-hk";
    else if (verify_distinct->parsed()) command = "verify-distinctness";
    else if (verify_zn->parsed()) command = "verify-zn";
    else if (shear->parsed()) command = "shear-check";
    else if (runcmd->parsed()) {
      if (opt.config_source.empty()) throw ConfigError("run needs --config");
      command = load_config(opt.config_source).at("command").get<std::string>();
    }

    json cfg = opt.effective_config(command);
    if (verify_hk->parsed() && opt.N) {
      cfg["distinctness"]["N"] = *opt.N;
      cfg["distinctness"]["r"] = opt.r_text.value_or("1");
      cfg.erase("model");
    }
    return dispatch(command, cfg, opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
