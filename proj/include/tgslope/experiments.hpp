#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tgslope/core.hpp"
#include "tgslope/metrics.hpp"
#include "tgslope/penalty.hpp"
#include "tgslope/random.hpp"
#include "tgslope/solver.hpp"
#include "tgslope/tensor.hpp"

namespace tgslope {

enum class Design { orthogonal, gaussian };
enum class Method { tgslope, tbmm, tglasso, tlrr };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::tgslope: return "tgslope";
    case Method::tbmm: return "tbmm";
    case Method::tglasso: return "tglasso";
    case Method::tlrr: return "tlrr";
  }
  return "?";
}

inline const char* design_name(Design d) {
  return d == Design::orthogonal ? "orthogonal" : "gaussian";
}

/// One synthetic-experiment regime.
struct SimulationSpec {
  Index n = 0, p = 0, p1 = 0, p2 = 0, k_rank = 0, s = 0;
  Design design = Design::orthogonal;
  double sigma = 1.0;
  double q = 0.1;
  int reps = 1;
  std::uint64_t base_seed = 0;

  void validate() const {
    detail::require(n >= 1 && p >= 1 && p1 >= 1 && p2 >= 1,
                    "SimulationSpec: dimensions must be positive");
    detail::require(s >= 0 && s <= p, "SimulationSpec: need 0 <= s <= p");
    detail::require(k_rank >= 1 && k_rank <= std::min(p, p1 * p2),
                    "SimulationSpec: need 1 <= K <= min(p, p1*p2)");
    detail::require(design != Design::orthogonal || n == p,
                    "SimulationSpec: orthogonal design requires n = p");
    detail::require(sigma >= 0.0, "SimulationSpec: sigma must be nonnegative");
    detail::require(q > 0.0 && q < 1.0, "SimulationSpec: q must lie in (0,1)");
    detail::require(reps >= 1, "SimulationSpec: reps must be >= 1");
  }
};

/// Planted truth of one replication.
struct GroundTruth {
  Mat g_star;                  // p x K, s nonzero rows of norm a*sqrt(K)
  Mat h_star;                  // p1p2 x K, orthonormal columns
  Tensor3 b_star;              // p1 x p2 x p
  std::vector<Index> support;  // sorted, size s
  double signal_a = 0.0;
};

/// Design draw: Haar orthogonal for n = p, else i.i.d. N(0, 1/n) entries.
inline Mat gen_design(const SimulationSpec& spec, Rng& rng) {
  spec.validate();
  if (spec.design == Design::orthogonal) return random_orthogonal(rng, spec.n);
  return random_gaussian(rng, spec.n, spec.p,
                         1.0 / std::sqrt(static_cast<double>(spec.n)));
}

/// Planted factors: the support is s indices drawn uniformly without
/// replacement; each support row of G* is i.i.d. U[0.1, 1.1] entries
/// rescaled to norm a*sqrt(K) with a = sqrt(4 ln p / (1 - p^{-2/K}) - K);
/// H* is the first K left singular vectors of an i.i.d. standard-Gaussian
/// p1p2 x p1p2 matrix.  Draw order (support indices, then support rows in
/// ascending index order, then the H* seed matrix) is part of the
/// reproducibility contract.
inline GroundTruth gen_truth(const SimulationSpec& spec, Rng& rng) {
  spec.validate();
  const double lead =
      4.0 * std::log(static_cast<double>(spec.p)) /
      (1.0 - std::pow(static_cast<double>(spec.p),
                      -2.0 / static_cast<double>(spec.k_rank)));
  detail::require(
      lead > static_cast<double>(spec.k_rank),
      "gen_truth: signal scale a undefined, need 4 ln(p)/(1-p^(-2/K)) > K");

  GroundTruth truth;
  truth.signal_a = std::sqrt(lead - static_cast<double>(spec.k_rank));

  std::vector<Index> idx(static_cast<std::size_t>(spec.p));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < spec.s; ++i) {
    const Index j =
        i + static_cast<Index>(rng.uniform_index(
                static_cast<std::uint64_t>(spec.p - i)));
    std::swap(idx[static_cast<std::size_t>(i)],
              idx[static_cast<std::size_t>(j)]);
  }
  truth.support.assign(idx.begin(), idx.begin() + spec.s);
  std::sort(truth.support.begin(), truth.support.end());

  const double target =
      truth.signal_a * std::sqrt(static_cast<double>(spec.k_rank));
  truth.g_star = Mat::Zero(spec.p, spec.k_rank);
  for (Index j : truth.support) {
    Vec row(spec.k_rank);
    for (Index k = 0; k < spec.k_rank; ++k) row(k) = rng.uniform(0.1, 1.1);
    truth.g_star.row(j) = row.transpose() * (target / row.norm());
  }

  const Mat seed_mat = random_gaussian(rng, spec.p1 * spec.p2, spec.p1 * spec.p2);
  truth.h_star = thin_svd(seed_mat).u.leftCols(spec.k_rank);
  truth.b_star =
      mode3_fold(truth.g_star * truth.h_star.transpose(), spec.p1, spec.p2);
  return truth;
}

/// Response tensor b_star x3 X + sigma * noise with i.i.d. standard-normal
/// noise entries.
inline Tensor3 gen_response(const GroundTruth& truth, const Mat& x,
                            double sigma, Rng& rng) {
  detail::require(x.cols() == truth.b_star.dim3(),
                  "gen_response: x.cols must equal p");
  detail::require(sigma >= 0.0, "gen_response: sigma must be nonnegative");
  Mat m3y = x * mode3_unfold(truth.b_star);
  if (sigma > 0.0)
    m3y += sigma * random_gaussian(rng, x.rows(),
                                   truth.b_star.dim1() * truth.b_star.dim2());
  return mode3_fold(m3y, truth.b_star.dim1(), truth.b_star.dim2());
}

/// Per-replication outcome.
struct ReplicationResult {
  double fdp = std::numeric_limits<double>::quiet_NaN();
  double tp = std::numeric_limits<double>::quiet_NaN();
  double rgee = std::numeric_limits<double>::quiet_NaN();
  double mse = std::numeric_limits<double>::quiet_NaN();
  double time_s = 0.0;
  int iterations = 0;
  bool converged = false;
  bool failed = false;
};

struct MetricStats {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
};

inline MetricStats metric_stats(const std::vector<double>& xs) {
  MetricStats st;
  if (xs.empty()) return st;
  const double n = static_cast<double>(xs.size());
  st.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() >= 2) {
    double ssq = 0.0;
    for (double v : xs) ssq += (v - st.mean) * (v - st.mean);
    st.sd = std::sqrt(ssq / (n - 1.0));
    st.se = st.sd / std::sqrt(n);
  } else {
    st.sd = 0.0;
    st.se = 0.0;
  }
  return st;
}

/// All replications of one (regime, method) pair.
struct StudyResult {
  SimulationSpec spec;
  Method method = Method::tgslope;
  std::vector<ReplicationResult> reps;
  int failures = 0;

  MetricStats stats(double ReplicationResult::*field) const {
    std::vector<double> xs;
    xs.reserve(reps.size());
    for (const auto& r : reps)
      if (!r.failed) xs.push_back(r.*field);
    return metric_stats(xs);
  }
};

/// Aggregated line of a summary table.
struct SummaryRow {
  std::string grid;
  std::string method;
  int reps = 0;
  int failures = 0;
  MetricStats fdp, tp, rgee, mse, time_s;
};

using SummaryTable = std::vector<SummaryRow>;

inline SummaryRow summarize(const StudyResult& study, std::string grid_label) {
  SummaryRow row;
  row.grid = std::move(grid_label);
  row.method = method_name(study.method);
  row.reps = static_cast<int>(study.reps.size());
  row.failures = study.failures;
  row.fdp = study.stats(&ReplicationResult::fdp);
  row.tp = study.stats(&ReplicationResult::tp);
  row.rgee = study.stats(&ReplicationResult::rgee);
  row.mse = study.stats(&ReplicationResult::mse);
  row.time_s = study.stats(&ReplicationResult::time_s);
  return row;
}

/// Default cross-validation grid for the flat-lambda baseline: `points`
/// log-spaced values spanning [1e-3, 1] times lambda_max, where lambda_max
/// is the largest row norm of X^T M3(Y) H at the spectral warm start -- the
/// smallest flat lambda that zeroes the warm-start G entirely.
inline Vec default_cv_grid(const Problem& prob, int points = 30) {
  detail::require(points >= 1, "default_cv_grid: points must be >= 1");
  SolverConfig cfg;
  const detail::DesignOps d = detail::precompute_design(prob, cfg);
  const Mat g0 = detail::warm_start(d, prob.k_rank);
  const Mat h0 = procrustes_h(Mat(d.xtm.transpose() * g0)).h;
  const double lam_max = (d.xtm * h0).rowwise().norm().maxCoeff();
  detail::require(lam_max > 0.0, "default_cv_grid: degenerate problem");
  Vec grid(points);
  if (points == 1) {
    grid(0) = lam_max;
    return grid;
  }
  for (int i = 0; i < points; ++i) {
    const double e = -3.0 + 3.0 * static_cast<double>(i) /
                                static_cast<double>(points - 1);
    grid(i) = lam_max * std::pow(10.0, e);
  }
  return grid;
}

namespace detail {

inline Mat select_rows(const Mat& m, const std::vector<Index>& rows) {
  Mat out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

}  // namespace detail

/// 5-fold (by default) cross-validation for a flat lambda: samples are
/// shuffled once, split into contiguous folds, and each grid value is
/// scored by held-out MSPE (fits warm-started down the lambda path).
/// Returns the grid value with the smallest mean MSPE; ties go to the
/// larger lambda.
inline double cv_select_lambda(const Problem& prob, const Vec& grid,
                               int folds, Rng& rng,
                               const SolverConfig& cfg = {}) {
  prob.validate();
  detail::require(grid.size() >= 1, "cv_select_lambda: empty grid");
  for (Index i = 0; i < grid.size(); ++i)
    detail::require(grid(i) >= 0.0,
                    "cv_select_lambda: grid values must be nonnegative");
  detail::require(folds >= 2, "cv_select_lambda: folds must be >= 2");
  const Index n = prob.x.rows();
  detail::require(n >= folds,
                  "cv_select_lambda: need at least `folds` samples");

  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    const Index j = static_cast<Index>(
        rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(j)]);
  }

  // Evaluate from the largest lambda downward so each fit warm-starts the
  // next; errors are indexed by descending-sorted position.
  std::vector<Index> desc(static_cast<std::size_t>(grid.size()));
  std::iota(desc.begin(), desc.end(), Index{0});
  std::stable_sort(desc.begin(), desc.end(),
                   [&](Index a, Index b) { return grid(a) > grid(b); });

  Vec mean_err = Vec::Zero(grid.size());
  Index start = 0;
  for (int f = 0; f < folds; ++f) {
    const Index size = n / folds + (f < n % folds ? 1 : 0);
    detail::require(size >= 1, "cv_select_lambda: degenerate empty fold");
    std::vector<Index> test(perm.begin() + start, perm.begin() + start + size);
    std::vector<Index> train;
    train.reserve(static_cast<std::size_t>(n - size));
    train.insert(train.end(), perm.begin(), perm.begin() + start);
    train.insert(train.end(), perm.begin() + start + size, perm.end());
    start += size;

    Problem sub;
    sub.x = detail::select_rows(prob.x, train);
    sub.y_unfolded = detail::select_rows(prob.y_unfolded, train);
    sub.p1 = prob.p1;
    sub.p2 = prob.p2;
    sub.k_rank = prob.k_rank;
    const Mat x_test = detail::select_rows(prob.x, test);
    const Mat y_test = detail::select_rows(prob.y_unfolded, test);

    Mat warm;
    bool have_warm = false;
    for (Index pos = 0; pos < grid.size(); ++pos) {
      sub.lambda = LambdaSeq::flat(grid(desc[static_cast<std::size_t>(pos)]),
                                   prob.x.cols());
      const SolverResult res = detail::solve_pdcae_impl(
          sub, cfg, have_warm ? &warm : nullptr);
      warm = res.factors.g;
      have_warm = true;
      const Mat resid =
          y_test - (x_test * res.factors.g) * res.factors.h.transpose();
      mean_err(desc[static_cast<std::size_t>(pos)]) +=
          resid.squaredNorm() /
          static_cast<double>(prob.p1 * prob.p2 *
                              static_cast<Index>(test.size()));
    }
  }
  mean_err /= static_cast<double>(folds);

  // Scan candidates from the largest lambda down with a strict comparison:
  // exact ties keep the larger lambda.
  Index best = desc[0];
  for (std::size_t i = 1; i < desc.size(); ++i)
    if (mean_err(desc[i]) < mean_err(best)) best = desc[i];
  return grid(best);
}

/// Diagnostics of the flat-lambda selection.
struct TglassoSelection {
  double lambda = 0.0;
  Vec grid;
};

// Fold-shuffle stream for solve_tglasso; fixed so the solver surface stays
// seed-free and deterministic given the Problem.
inline constexpr std::uint64_t kTglassoFoldSeed = 0x7c5f0d1e2b3a4958ull;

/// Group-LASSO baseline: pDCAe with a flat lambda sequence whose level is
/// chosen by 5-fold cross-validation over the default log-spaced grid.
inline SolverResult solve_tglasso(const Problem& prob, const SolverConfig& cfg,
                                  int folds = 5,
                                  TglassoSelection* selection = nullptr,
                                  const Vec* grid_override = nullptr,
                                  Rng* fold_rng = nullptr) {
  prob.validate();
  const Vec grid =
      (grid_override != nullptr) ? *grid_override : default_cv_grid(prob);
  Rng local(kTglassoFoldSeed);
  Rng& rng = (fold_rng != nullptr) ? *fold_rng : local;
  const double lam = cv_select_lambda(prob, grid, folds, rng, cfg);
  if (selection != nullptr) {
    selection->lambda = lam;
    selection->grid = grid;
  }
  Problem flat = prob;
  flat.lambda = LambdaSeq::flat(lam, prob.x.cols());
  return solve_pdcae(flat, cfg);
}

/// Options of a replication study beyond the regime itself.
struct StudyOptions {
  int threads = 1;
  std::optional<LambdaSeq> lambda_override;  // e.g. corrected sequences
  int cv_grid_points = 30;                   // tglasso only
  int cv_folds = 5;                          // tglasso only
  std::optional<SolverConfig> cv_config;     // looser tolerance for CV fits
};

namespace detail {

inline ReplicationResult run_one_rep(const SimulationSpec& spec, Method method,
                                     const SolverConfig& cfg,
                                     const StudyOptions& opts,
                                     std::uint64_t rep) {
  Rng rng = Rng::child(spec.base_seed, rep);
  const Mat x = gen_design(spec, rng);
  const GroundTruth truth = gen_truth(spec, rng);
  const Tensor3 y = gen_response(truth, x, spec.sigma, rng);

  LambdaSeq lambda;
  if (opts.lambda_override) {
    require(opts.lambda_override->size() == spec.p,
            "run_fdr_study: lambda override length must equal p");
    lambda = *opts.lambda_override;
  } else {
    // Chi-quantile schedule; gaussian designs reuse it unchanged (no
    // correlated-design correction is applied).
    lambda = lambda_chi_sequence(
        {static_cast<int>(spec.k_rank), spec.q, spec.sigma, spec.p});
  }

  Problem prob = make_problem(x, y, spec.k_rank, std::move(lambda));

  ReplicationResult out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    SolverResult res;
    switch (method) {
      case Method::tgslope:
        res = solve_pdcae(prob, cfg);
        break;
      case Method::tbmm:
        res = solve_tbmm(prob, cfg);
        break;
      case Method::tglasso: {
        const Vec grid = default_cv_grid(prob, opts.cv_grid_points);
        const SolverConfig cv_cfg = opts.cv_config ? *opts.cv_config : cfg;
        const double lam = cv_select_lambda(prob, grid, opts.cv_folds, rng,
                                            cv_cfg);
        Problem flat = prob;
        flat.lambda = LambdaSeq::flat(lam, spec.p);
        res = solve_pdcae(flat, cfg);
        break;
      }
      case Method::tlrr:
        res = solve_tlrr(prob, cfg);
        break;
    }
    const auto t1 = std::chrono::steady_clock::now();
    out.time_s = std::chrono::duration<double>(t1 - t0).count();
    out.iterations = res.iterations;
    out.converged = res.converged;
    const SupportComparison c = compare_support(res.b_hat, truth.b_star, 0.0);
    out.fdp = fdp(c);
    out.tp = tp_rate(c);
    out.rgee = rgee(res.b_hat, truth.b_star);
    out.mse = mse(res.b_hat, truth.b_star, x);
  } catch (const NumericalError&) {
    out.failed = true;
  }
  return out;
}

}  // namespace detail

/// Replication harness: for rep r it derives child stream (base_seed, r),
/// generates design/truth/response, builds lambda (chi sequence or the
/// override), solves with the chosen method, and records metrics.  Results
/// are written into indexed slots, so the outcome is byte-identical for any
/// worker count.  Numerical failures are recorded per rep, never fatal.
inline StudyResult run_fdr_study(const SimulationSpec& spec, Method method,
                                 const SolverConfig& cfg = {},
                                 const StudyOptions& opts = {}) {
  spec.validate();
  detail::require(opts.threads >= 1, "run_fdr_study: threads must be >= 1");
  StudyResult study;
  study.spec = spec;
  study.method = method;
  study.reps.assign(static_cast<std::size_t>(spec.reps), ReplicationResult{});

  if (opts.threads == 1) {
    for (int r = 0; r < spec.reps; ++r)
      study.reps[static_cast<std::size_t>(r)] = detail::run_one_rep(
          spec, method, cfg, opts, static_cast<std::uint64_t>(r));
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= spec.reps) return;
        study.reps[static_cast<std::size_t>(r)] = detail::run_one_rep(
            spec, method, cfg, opts, static_cast<std::uint64_t>(r));
      }
    };
    std::vector<std::thread> pool;
    const int nw = std::min<int>(opts.threads, spec.reps);
    pool.reserve(static_cast<std::size_t>(nw));
    for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const auto& r : study.reps)
    if (r.failed) ++study.failures;
  return study;
}

/// BIC candidate diagnostics: values are reported for every K, not just
/// the winner.
struct BicCandidate {
  int k = 0;
  double bic = std::numeric_limits<double>::quiet_NaN();
  LambdaSeq lambda;
  SolverResult result;
  bool failed = false;
  std::string error;
};

struct BicSelection {
  int best = -1;  // index into candidates
  std::vector<BicCandidate> candidates;

  const BicCandidate& winner() const { return candidates[best]; }
};

/// Model selection over a rank grid: for each K, lambda_builder supplies
/// the sequence (typically the chi-quantile schedule with a plug-in sigma),
/// prob_builder assembles the instance, and the BIC of the pDCAe fit is
/// recorded.
/// Returns the minimizer; ties go to the smaller K.
inline BicSelection bic_select(
    const std::function<Problem(int, const LambdaSeq&)>& prob_builder,
    const std::vector<int>& k_grid,
    const std::function<LambdaSeq(int)>& lambda_builder,
    const SolverConfig& cfg = {}) {
  detail::require(!k_grid.empty(), "bic_select: empty rank grid");
  BicSelection sel;
  for (int k : k_grid) {
    BicCandidate cand;
    cand.k = k;
    try {
      cand.lambda = lambda_builder(k);
      const Problem prob = prob_builder(k, cand.lambda);
      cand.result = solve_pdcae(prob, cfg);
      const int discovery =
          static_cast<int>(support_of(cand.result.b_hat, 0.0).size());
      const Tensor3 y = mode3_fold(prob.y_unfolded, prob.p1, prob.p2);
      cand.bic = bic(y, prob.x, cand.result.b_hat, discovery, k);
    } catch (const NumericalError& e) {
      cand.failed = true;
      cand.error = e.what();
    }
    sel.candidates.push_back(std::move(cand));
  }
  for (std::size_t i = 0; i < sel.candidates.size(); ++i) {
    const BicCandidate& c = sel.candidates[i];
    if (c.failed) continue;
    if (sel.best < 0) {
      sel.best = static_cast<int>(i);
      continue;
    }
    const BicCandidate& b = sel.candidates[static_cast<std::size_t>(sel.best)];
    if (c.bic < b.bic || (c.bic == b.bic && c.k < b.k))
      sel.best = static_cast<int>(i);
  }
  if (sel.best < 0) {
    std::ostringstream msg;
    msg << "bic_select: every candidate failed:";
    for (const auto& c : sel.candidates)
      msg << " [K=" << c.k << ": " << c.error << "]";
    throw NumericalError(msg.str());
  }
  return sel;
}

/// A named point of a preset sweep.
struct PresetPoint {
  std::string grid_label;
  SimulationSpec spec;
};

struct Preset {
  std::string name;
  std::string sweep_key;  // which SimulationSpec field the points vary
  std::vector<PresetPoint> points;
  std::vector<Method> methods;
};

/// Versioned preset regimes.  Desk scale is the CI-sized reduction used by
/// the acceptance suite; paper scale mirrors the published setups and is
/// long-running by design.
inline Preset make_preset(const std::string& name, const std::string& scale,
                          std::uint64_t base_seed) {
  detail::require(scale == "desk" || scale == "paper",
                  "make_preset: scale must be 'desk' or 'paper'");
  const bool desk = (scale == "desk");
  Preset preset;
  preset.name = name;

  const auto label = [](const char* key, Index v) {
    std::ostringstream os;
    os << key << "=" << v;
    return os.str();
  };

  if (name == "fdr") {
    // Orthogonal-design TgFDR control sweep over sparsity.
    preset.sweep_key = "s";
    SimulationSpec base;
    base.design = Design::orthogonal;
    base.sigma = 1.0;
    base.q = 0.1;
    base.base_seed = base_seed;
    std::vector<Index> ss;
    if (desk) {
      base.n = base.p = 200;
      base.p1 = base.p2 = 5;
      base.k_rank = 5;
      base.reps = 200;
      ss = {10, 20, 40};
    } else {
      base.n = base.p = 1000;
      base.p1 = base.p2 = 10;
      base.k_rank = 20;
      base.reps = 100;
      ss = {25, 50, 75, 100, 125, 150, 175, 200, 225, 250};
    }
    for (Index s : ss) {
      SimulationSpec spec = base;
      spec.s = s;
      preset.points.push_back({label("s", s), spec});
    }
    preset.methods = {Method::tgslope};
  } else if (name == "sparsity") {
    preset.sweep_key = "s";
    SimulationSpec base;
    base.design = Design::gaussian;
    base.sigma = 1.0;
    base.q = 0.05;
    base.base_seed = base_seed;
    std::vector<Index> ss;
    if (desk) {
      base.n = 600;
      base.p = 200;
      base.p1 = base.p2 = 5;
      base.k_rank = 5;
      base.reps = 100;
      ss = {10, 20, 40};
    } else {
      base.n = 3000;
      base.p = 1000;
      base.p1 = base.p2 = 10;
      base.k_rank = 20;
      base.reps = 100;
      ss = {25, 50, 75, 100, 125, 150, 175, 200, 225, 250};
    }
    for (Index s : ss) {
      SimulationSpec spec = base;
      spec.s = s;
      preset.points.push_back({label("s", s), spec});
    }
    preset.methods = {Method::tgslope, Method::tbmm, Method::tglasso,
                      Method::tlrr};
  } else if (name == "size") {
    preset.sweep_key = "p";
    SimulationSpec base;
    base.design = Design::gaussian;
    base.sigma = 1.0;
    base.q = 0.05;
    base.base_seed = base_seed;
    std::vector<Index> ps;
    if (desk) {
      base.n = 600;
      base.p1 = base.p2 = 5;
      base.k_rank = 5;
      base.reps = 50;
      ps = {200, 400, 600};
    } else {
      base.n = 3000;
      base.p1 = base.p2 = 10;
      base.k_rank = 20;
      base.reps = 100;
      ps = {2000, 4000, 6000};
    }
    for (Index p : ps) {
      SimulationSpec spec = base;
      spec.p = p;
      spec.s = p / 50;  // s = 0.02 p
      preset.points.push_back({label("p", p), spec});
    }
    preset.methods = {Method::tgslope, Method::tbmm, Method::tglasso,
                      Method::tlrr};
  } else if (name == "rank") {
    preset.sweep_key = "K";
    SimulationSpec base;
    base.design = Design::gaussian;
    base.sigma = 1.0;
    base.q = 0.05;
    base.base_seed = base_seed;
    std::vector<Index> ks;
    if (desk) {
      base.n = 600;
      base.p = 200;
      base.p1 = base.p2 = 5;
      base.s = 10;
      base.reps = 50;
      ks = {4, 8, 16};
    } else {
      base.n = 1000;
      base.p = 2000;
      base.p1 = base.p2 = 10;
      base.s = 40;  // s = 0.02 p
      base.reps = 100;
      ks = {5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
    }
    for (Index k : ks) {
      SimulationSpec spec = base;
      spec.k_rank = k;
      preset.points.push_back({label("K", k), spec});
    }
    preset.methods = {Method::tgslope};
  } else {
    throw InvalidArgument("make_preset: unknown preset '" + name +
                          "' (expected fdr|sparsity|size|rank)");
  }
  return preset;
}

}  // namespace tgslope
