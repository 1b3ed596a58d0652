// Batch command-line surface: `fit` solves one regression from files,
// `simulate` runs the synthetic replication presets.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tgslope/tgslope.hpp"

namespace {

using nlohmann::json;
using tgslope::Index;
using tgslope::InvalidArgument;
using tgslope::IoError;
using tgslope::Mat;

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

json load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw IoError("config '" + path + "': " + e.what());
  }
  if (!j.is_object())
    throw InvalidArgument("config: top level must be a JSON object");
  return j;
}

void check_keys(const json& j, const std::set<std::string>& allowed) {
  for (const auto& item : j.items())
    if (allowed.find(item.key()) == allowed.end())
      throw InvalidArgument("config: unknown key '" + item.key() + "'");
}

std::string get_str(const json& j, const std::string& key) {
  if (!j.at(key).is_string())
    throw InvalidArgument("config: field '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

double get_num(const json& j, const std::string& key) {
  if (!j.at(key).is_number())
    throw InvalidArgument("config: field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

long long get_int(const json& j, const std::string& key) {
  if (!j.at(key).is_number_integer())
    throw InvalidArgument("config: field '" + key + "' must be an integer");
  return j.at(key).get<long long>();
}

std::uint64_t get_u64(const json& j, const std::string& key) {
  const long long v = get_int(j, key);
  if (v < 0)
    throw InvalidArgument("config: field '" + key + "' must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

// "auto" or a nonnegative number.
struct SigmaSpec {
  bool auto_plugin = false;
  double value = 1.0;
};

SigmaSpec parse_sigma(const std::string& text) {
  if (text == "auto") return {true, 0.0};
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !(v >= 0.0)) throw std::invalid_argument(text);
    return {false, v};
  } catch (const std::exception&) {
    throw InvalidArgument("sigma: expected a nonnegative number or 'auto', got '" +
                          text + "'");
  }
}

void make_out_dir(const std::string& out) {
  if (out.empty()) throw InvalidArgument("out: missing required --out");
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw IoError("out: cannot create directory '" + out + "': " +
                        ec.message());
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string x_path, y_path, out;
  long long k = -1;
  std::string method = "pdcae";
  double q = 0.1;
  bool q_given = false;
  std::string lambda_file;
  std::string sigma_text = "1";
  double eps = 1e-6;
  long long max_iter = 5000;
  std::uint64_t seed = 42;
  std::string config_path;
};

int run_fit(const CLI::App& cmd, FitArgs a) {
  if (!a.config_path.empty()) {
    const json cfg = load_config(a.config_path);
    check_keys(cfg, {"x", "y", "k", "method", "q", "lambda_file", "sigma",
                     "eps", "max_iter", "seed", "out"});
    const auto absent = [&](const std::string& flag) {
      return cmd.count(flag) == 0;
    };
    if (absent("--x") && cfg.contains("x")) a.x_path = get_str(cfg, "x");
    if (absent("--y") && cfg.contains("y")) a.y_path = get_str(cfg, "y");
    if (absent("--k") && cfg.contains("k")) a.k = get_int(cfg, "k");
    if (absent("--method") && cfg.contains("method"))
      a.method = get_str(cfg, "method");
    if (absent("--q") && cfg.contains("q")) {
      a.q = get_num(cfg, "q");
      a.q_given = true;
    }
    if (absent("--lambda-file") && cfg.contains("lambda_file"))
      a.lambda_file = get_str(cfg, "lambda_file");
    if (absent("--sigma") && cfg.contains("sigma"))
      a.sigma_text = cfg.at("sigma").is_string() ? get_str(cfg, "sigma")
                                                 : std::to_string(get_num(cfg, "sigma"));
    if (absent("--eps") && cfg.contains("eps")) a.eps = get_num(cfg, "eps");
    if (absent("--max-iter") && cfg.contains("max_iter"))
      a.max_iter = get_int(cfg, "max_iter");
    if (absent("--seed") && cfg.contains("seed")) a.seed = get_u64(cfg, "seed");
    if (absent("--out") && cfg.contains("out")) a.out = get_str(cfg, "out");
  }
  a.q_given = a.q_given || cmd.count("--q") > 0;

  if (a.x_path.empty()) throw InvalidArgument("x: missing required --x");
  if (a.y_path.empty()) throw InvalidArgument("y: missing required --y");
  if (a.k < 0) throw InvalidArgument("k: missing required --k");
  if (a.out.empty()) throw InvalidArgument("out: missing required --out");
  if (a.method != "pdcae" && a.method != "tbmm" && a.method != "tglasso" &&
      a.method != "tlrr")
    throw InvalidArgument("method: expected pdcae|tbmm|tglasso|tlrr, got '" +
                          a.method + "'");
  if (a.q_given && !a.lambda_file.empty())
    throw InvalidArgument("q: pass either --q or --lambda-file, not both");
  const SigmaSpec sigma = parse_sigma(a.sigma_text);

  const Mat x = tgslope::read_matrix_csv(a.x_path);
  const tgslope::Tensor3 y = tgslope::read_tensor_t3d(a.y_path);
  const Index p = x.cols();
  const Index p1p2 = y.dim1() * y.dim2();

  tgslope::SolverConfig solver_cfg;
  solver_cfg.epsilon = a.eps;
  if (a.max_iter < 1) throw InvalidArgument("max_iter: must be >= 1");
  solver_cfg.max_iter = static_cast<int>(a.max_iter);
  solver_cfg.validate();

  // Resolve the penalty sequence.
  std::string lambda_source;
  double sigma_used = std::numeric_limits<double>::quiet_NaN();
  tgslope::LambdaSeq lambda = tgslope::LambdaSeq::zeros(p);
  const auto warn_unused = [&](const char* flag) {
    std::cerr << "warning: --method " << a.method << " ignores " << flag
              << "\n";
  };
  if (a.method == "tlrr") {
    if (a.q_given) warn_unused("--q");
    if (!a.lambda_file.empty()) warn_unused("--lambda-file");
    lambda_source = "zero";
  } else if (a.method == "tglasso") {
    if (a.q_given) warn_unused("--q");
    if (!a.lambda_file.empty()) warn_unused("--lambda-file");
    lambda_source = "cv";
  } else if (!a.lambda_file.empty()) {
    lambda = tgslope::read_lambda_file(a.lambda_file);
    lambda_source = "file";
  } else {
    if (sigma.auto_plugin) {
      const tgslope::Problem plain = tgslope::make_problem(
          x, y, static_cast<Index>(a.k), tgslope::LambdaSeq::zeros(p));
      const tgslope::SolverResult base = tgslope::solve_tlrr(plain, solver_cfg);
      const double rss_sq =
          (plain.y_unfolded - (x * base.factors.g) * base.factors.h.transpose())
              .squaredNorm();
      const double df =
          static_cast<double>(a.k) * static_cast<double>(p + p1p2 - a.k);
      const double denom =
          std::max(static_cast<double>(x.rows() * p1p2) - df, 1.0);
      sigma_used = std::sqrt(rss_sq / denom);
    } else {
      sigma_used = sigma.value;
    }
    tgslope::ChiQuantileParams params;
    params.k_dof = static_cast<int>(a.k);
    params.q = a.q;
    params.sigma = sigma_used;
    params.p = p;
    lambda = tgslope::lambda_chi_sequence(params);
    lambda_source = "chi";
  }

  const tgslope::Problem prob =
      tgslope::make_problem(x, y, static_cast<Index>(a.k), lambda);

  tgslope::SolverResult res;
  double lambda_cv = std::numeric_limits<double>::quiet_NaN();
  if (a.method == "pdcae") {
    res = tgslope::solve_pdcae(prob, solver_cfg);
  } else if (a.method == "tbmm") {
    res = tgslope::solve_tbmm(prob, solver_cfg);
  } else if (a.method == "tlrr") {
    res = tgslope::solve_tlrr(prob, solver_cfg);
  } else {
    tgslope::TglassoSelection sel;
    tgslope::Rng fold_rng(a.seed);
    res = tgslope::solve_tglasso(prob, solver_cfg, 5, &sel, nullptr, &fold_rng);
    lambda_cv = sel.lambda;
  }

  make_out_dir(a.out);
  const std::filesystem::path out(a.out);
  tgslope::write_tensor_t3d((out / "b_hat.t3d").string(), res.b_hat);
  const std::string meta = tgslope::metadata_line(a.seed);
  tgslope::write_matrix_csv((out / "g.csv").string(), res.factors.g, meta);
  tgslope::write_matrix_csv((out / "h.csv").string(), res.factors.h, meta);

  json diag;
  diag["method"] = a.method;
  diag["k"] = a.k;
  diag["eps"] = a.eps;
  diag["max_iter"] = a.max_iter;
  diag["seed"] = a.seed;
  diag["version"] = tgslope::kVersion;
  diag["iterations"] = res.iterations;
  diag["converged"] = res.converged;
  diag["objective_trace"] = res.objective_trace;
  diag["rank_deficient"] = res.rank_deficient;
  diag["discovery"] =
      static_cast<long long>(tgslope::support_of(res.b_hat).size());
  diag["final_step"] = res.final_step;  // NaN serializes as null
  diag["lambda_source"] = lambda_source;
  if (lambda_source == "chi") {
    diag["q"] = a.q;
    diag["sigma_used"] = sigma_used;
  }
  if (lambda_source == "cv") diag["lambda_cv"] = lambda_cv;
  std::ofstream diag_os(out / "diagnostics.json");
  if (!diag_os)
    throw IoError("fit: cannot open '" + (out / "diagnostics.json").string() +
                  "'");
  diag_os << diag.dump(2) << '\n';
  if (!diag_os) throw IoError("fit: write failed for diagnostics.json");
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimArgs {
  std::string preset, scale = "desk", out;
  long long reps = -1;  // -1 keeps the preset's count
  std::uint64_t seed = 42;
  long long threads = 1;
  // SimulationSpec field overrides
  long long n = -1, p = -1, p1 = -1, p2 = -1, k = -1, s = -1;
  double sigma = -1.0, q = -1.0;
  std::string design;
  std::string config_path;
};

bool same_spec(const tgslope::SimulationSpec& a,
               const tgslope::SimulationSpec& b) {
  return a.n == b.n && a.p == b.p && a.p1 == b.p1 && a.p2 == b.p2 &&
         a.k_rank == b.k_rank && a.s == b.s && a.design == b.design &&
         a.sigma == b.sigma && a.q == b.q && a.reps == b.reps &&
         a.base_seed == b.base_seed;
}

std::string grid_label(const std::string& sweep_key,
                       const tgslope::SimulationSpec& spec) {
  std::ostringstream os;
  os << sweep_key << '=';
  if (sweep_key == "s")
    os << spec.s;
  else if (sweep_key == "p")
    os << spec.p;
  else
    os << spec.k_rank;
  return os.str();
}

int run_simulate(const CLI::App& cmd, SimArgs a) {
  if (!a.config_path.empty()) {
    const json cfg = load_config(a.config_path);
    check_keys(cfg, {"preset", "scale", "reps", "seed", "out", "threads", "n",
                     "p", "p1", "p2", "k", "s", "sigma", "q", "design"});
    const auto absent = [&](const std::string& flag) {
      return cmd.count(flag) == 0;
    };
    if (absent("--preset") && cfg.contains("preset"))
      a.preset = get_str(cfg, "preset");
    if (absent("--scale") && cfg.contains("scale"))
      a.scale = get_str(cfg, "scale");
    if (absent("--reps") && cfg.contains("reps")) a.reps = get_int(cfg, "reps");
    if (absent("--seed") && cfg.contains("seed")) a.seed = get_u64(cfg, "seed");
    if (absent("--out") && cfg.contains("out")) a.out = get_str(cfg, "out");
    if (absent("--threads") && cfg.contains("threads"))
      a.threads = get_int(cfg, "threads");
    if (absent("--n") && cfg.contains("n")) a.n = get_int(cfg, "n");
    if (absent("--p") && cfg.contains("p")) a.p = get_int(cfg, "p");
    if (absent("--p1") && cfg.contains("p1")) a.p1 = get_int(cfg, "p1");
    if (absent("--p2") && cfg.contains("p2")) a.p2 = get_int(cfg, "p2");
    if (absent("--k") && cfg.contains("k")) a.k = get_int(cfg, "k");
    if (absent("--s") && cfg.contains("s")) a.s = get_int(cfg, "s");
    if (absent("--sigma") && cfg.contains("sigma"))
      a.sigma = get_num(cfg, "sigma");
    if (absent("--q") && cfg.contains("q")) a.q = get_num(cfg, "q");
    if (absent("--design") && cfg.contains("design"))
      a.design = get_str(cfg, "design");
  }

  if (a.preset.empty()) throw InvalidArgument("preset: missing required --preset");
  if (a.out.empty()) throw InvalidArgument("out: missing required --out");
  if (a.threads < 1) throw InvalidArgument("threads: must be >= 1");

  tgslope::Preset preset = tgslope::make_preset(a.preset, a.scale, a.seed);

  for (auto& point : preset.points) {
    tgslope::SimulationSpec& s = point.spec;
    if (a.reps >= 0) s.reps = static_cast<int>(a.reps);
    if (a.n >= 0) s.n = static_cast<Index>(a.n);
    if (a.p >= 0) s.p = static_cast<Index>(a.p);
    if (a.p1 >= 0) s.p1 = static_cast<Index>(a.p1);
    if (a.p2 >= 0) s.p2 = static_cast<Index>(a.p2);
    if (a.k >= 0) s.k_rank = static_cast<Index>(a.k);
    if (a.s >= 0) s.s = static_cast<Index>(a.s);
    if (a.sigma >= 0.0) s.sigma = a.sigma;
    if (a.q >= 0.0) s.q = a.q;
    if (!a.design.empty()) {
      if (a.design == "orthogonal")
        s.design = tgslope::Design::orthogonal;
      else if (a.design == "gaussian")
        s.design = tgslope::Design::gaussian;
      else
        throw InvalidArgument("design: expected orthogonal|gaussian, got '" +
                              a.design + "'");
    }
    point.grid_label = grid_label(preset.sweep_key, s);
    s.validate();
  }
  // Overriding the swept field collapses the sweep to one point.
  std::vector<tgslope::PresetPoint> points;
  for (const auto& point : preset.points) {
    bool dup = false;
    for (const auto& kept : points)
      dup = dup || same_spec(kept.spec, point.spec);
    if (!dup) points.push_back(point);
  }

  tgslope::SolverConfig solver_cfg;
  tgslope::StudyOptions opts;
  opts.threads = static_cast<int>(a.threads);

  tgslope::SummaryTable table;
  std::vector<std::pair<std::string, tgslope::StudyResult>> studies;
  for (const auto& point : points) {
    for (tgslope::Method method : preset.methods) {
      tgslope::StudyResult study =
          tgslope::run_fdr_study(point.spec, method, solver_cfg, opts);
      table.push_back(tgslope::summarize(study, point.grid_label));
      studies.emplace_back(point.grid_label, std::move(study));
    }
  }

  make_out_dir(a.out);
  const std::filesystem::path out(a.out);
  tgslope::write_summary_csv((out / "summary.csv").string(), table, a.seed);
  tgslope::write_reps_csv((out / "reps.csv").string(), studies, a.seed);

  // Resolved invocation, so any run can be repeated from its artifacts.
  json rc;
  rc["command"] = "simulate";
  rc["preset"] = a.preset;
  rc["scale"] = a.scale;
  rc["seed"] = a.seed;
  rc["threads"] = a.threads;
  rc["version"] = tgslope::kVersion;
  json pts = json::array();
  for (const auto& point : points) {
    json p;
    p["grid"] = point.grid_label;
    p["n"] = point.spec.n;
    p["p"] = point.spec.p;
    p["p1"] = point.spec.p1;
    p["p2"] = point.spec.p2;
    p["k"] = point.spec.k_rank;
    p["s"] = point.spec.s;
    p["design"] = tgslope::design_name(point.spec.design);
    p["sigma"] = point.spec.sigma;
    p["q"] = point.spec.q;
    p["reps"] = point.spec.reps;
    pts.push_back(p);
  }
  rc["points"] = pts;
  json methods = json::array();
  for (tgslope::Method m : preset.methods) methods.push_back(tgslope::method_name(m));
  rc["methods"] = methods;
  std::ofstream rc_os(out / "run_config.json");
  if (!rc_os)
    throw IoError("simulate: cannot open '" +
                  (out / "run_config.json").string() + "'");
  rc_os << rc.dump(2) << '\n';
  if (!rc_os) throw IoError("simulate: write failed for run_config.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group-SLOPE penalized low-rank tensor regression"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "Fit one model from a design and a response");
  fit_cmd->add_option("--x", fit_args.x_path, "Design matrix CSV (n x p)");
  fit_cmd->add_option("--y", fit_args.y_path,
                      "Response tensor .t3d (p1 x p2 x n)");
  fit_cmd->add_option("--k", fit_args.k, "CP rank K");
  fit_cmd->add_option("--method", fit_args.method,
                      "pdcae|tbmm|tglasso|tlrr (default pdcae)");
  fit_cmd->add_option("--q", fit_args.q, "Nominal FDR level (default 0.1)");
  fit_cmd->add_option("--lambda-file", fit_args.lambda_file,
                      "Penalty sequence file, one value per line");
  fit_cmd->add_option("--sigma", fit_args.sigma_text,
                      "Noise level for the chi sequence, or 'auto'");
  fit_cmd->add_option("--eps", fit_args.eps,
                      "Relative-step stopping tolerance (default 1e-6)");
  fit_cmd->add_option("--max-iter", fit_args.max_iter,
                      "Iteration cap (default 5000)");
  fit_cmd->add_option("--seed", fit_args.seed,
                      "Seed stamped into outputs (default 42)");
  fit_cmd->add_option("--out", fit_args.out, "Output directory");
  fit_cmd->add_option("--config", fit_args.config_path,
                      "JSON config; explicit flags override it");

  SimArgs sim_args;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Run a synthetic replication study");
  sim_cmd->add_option("--preset", sim_args.preset, "fdr|sparsity|size|rank");
  sim_cmd->add_option("--scale", sim_args.scale,
                      "desk|paper (default desk)");
  sim_cmd->add_option("--reps", sim_args.reps, "Replications per grid point");
  sim_cmd->add_option("--seed", sim_args.seed, "Base seed (default 42)");
  sim_cmd->add_option("--out", sim_args.out, "Output directory");
  sim_cmd->add_option("--threads", sim_args.threads,
                      "Worker threads (default 1)");
  sim_cmd->add_option("--n", sim_args.n, "Override: sample count");
  sim_cmd->add_option("--p", sim_args.p, "Override: predictor count");
  sim_cmd->add_option("--p1", sim_args.p1, "Override: tensor dim 1");
  sim_cmd->add_option("--p2", sim_args.p2, "Override: tensor dim 2");
  sim_cmd->add_option("--k", sim_args.k, "Override: CP rank");
  sim_cmd->add_option("--s", sim_args.s, "Override: support size");
  sim_cmd->add_option("--sigma", sim_args.sigma, "Override: noise level");
  sim_cmd->add_option("--q", sim_args.q, "Override: nominal FDR level");
  sim_cmd->add_option("--design", sim_args.design,
                      "Override: orthogonal|gaussian");
  sim_cmd->add_option("--config", sim_args.config_path,
                      "JSON config; explicit flags override it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(*fit_cmd, fit_args);
    return run_simulate(*sim_cmd, sim_args);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const tgslope::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
