#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "tgslope/core.hpp"
#include "tgslope/linalg.hpp"
#include "tgslope/penalty.hpp"
#include "tgslope/tensor.hpp"

namespace tgslope {

/// One regression instance of the simplified problem
///   min over (G, H^T H = I_K) of 1/2 ||M3(Y) - X G H^T||_F^2 + P_lambda([[G]]).
struct Problem {
  Mat x;           // n x p design
  Mat y_unfolded;  // n x (p1*p2), rows index samples (M3(Y))
  Index p1 = 0, p2 = 0;
  Index k_rank = 0;
  LambdaSeq lambda;

  void validate() const {
    detail::require(x.size() > 0 && x.allFinite(),
                    "Problem: design matrix must be nonempty and finite");
    detail::require(x.norm() > 0.0, "Problem: design matrix must be nonzero");
    detail::require(y_unfolded.allFinite(), "Problem: responses must be finite");
    detail::require(y_unfolded.rows() == x.rows(),
                    "Problem: sample counts of x and y must agree");
    detail::require(p1 >= 1 && p2 >= 1, "Problem: slice dims must be positive");
    detail::require(y_unfolded.cols() == p1 * p2,
                    "Problem: y_unfolded column count must equal p1*p2");
    detail::require(k_rank >= 1 && k_rank <= std::min(x.cols(), p1 * p2),
                    "Problem: k_rank must satisfy 1 <= K <= min(p, p1*p2)");
    detail::require(lambda.size() == x.cols(),
                    "Problem: lambda length must equal the predictor count");
  }
};

/// Convenience constructor from the tensor response.
inline Problem make_problem(Mat x, const Tensor3& y, Index k_rank,
                            LambdaSeq lambda) {
  Problem prob;
  prob.x = std::move(x);
  prob.y_unfolded = mode3_unfold(y);
  prob.p1 = y.dim1();
  prob.p2 = y.dim2();
  prob.k_rank = k_rank;
  prob.lambda = std::move(lambda);
  prob.validate();
  return prob;
}

enum class Extrapolation { none, nesterov };

/// Solver knobs.  Deterministic given a Problem: no seeds here.
struct SolverConfig {
  double epsilon = 1e-6;  // relative-step stopping tolerance
  int max_iter = 5000;
  Extrapolation extrapolation = Extrapolation::nesterov;
  int restart_every = 200;  // periodic theta reset; 0 disables
  std::optional<double> lipschitz_override;  // skip the spectral-norm estimate
  // The DC subgradient is taken at the current iterate G^(k) by default;
  // set to evaluate it at the extrapolated point A^(k) instead.
  bool subgrad_at_extrapolated = false;
  Index trace_dense_limit = 2000;  // record every iteration while p <= this
  int trace_stride_large = 10;     // recording stride beyond that

  void validate() const {
    detail::require(epsilon > 0.0, "SolverConfig: epsilon must be positive");
    detail::require(max_iter >= 1, "SolverConfig: max_iter must be >= 1");
    detail::require(restart_every >= 0,
                    "SolverConfig: restart_every must be >= 0");
    detail::require(!lipschitz_override || *lipschitz_override > 0.0,
                    "SolverConfig: lipschitz_override must be positive");
    detail::require(trace_stride_large >= 1,
                    "SolverConfig: trace_stride_large must be >= 1");
  }
};

/// The (G, H) factor pair; H has orthonormal columns.
struct FactorPair {
  Mat g;  // p x K
  Mat h;  // p1p2 x K
};

/// Solver output and diagnostics.  objective_trace records the DC objective
/// F(G) at the recorded iterates (initial point first); step_trace and
/// g_norm_trace record the relative step and ||G||_F on the same schedule
/// (step_trace starts at the first iteration, so it is one shorter).
struct SolverResult {
  FactorPair factors;
  Tensor3 b_hat;  // p1 x p2 x p
  int iterations = 0;
  std::vector<double> objective_trace;
  std::vector<double> step_trace;
  std::vector<double> g_norm_trace;
  double final_step = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  bool rank_deficient = false;
};

/// DC objective (the model residual with the H factor maximised out):
///   F(G) = 1/2 ||X G||_F^2 + P_lambda([[G]]) - ||M3(Y)^T X G||_*.
inline double dc_objective(const Mat& g, const Problem& prob) {
  const Mat xg = prob.x * g;
  const double fit = 0.5 * xg.squaredNorm();
  const double pen = penalty_value(g, prob.lambda);
  const double nuc = nuclear_norm(prob.y_unfolded.transpose() * xg);
  return fit + pen - nuc;
}

/// The original objective of the simplified problem at a concrete (G, H):
///   1/2 ||M3(Y) - X G H^T||_F^2 + P_lambda([[G]]).
/// With H = procrustes_h(M3(Y)^T X G).h this equals
/// dc_objective(G) + 1/2 ||M3(Y)||_F^2.
inline double full_objective(const Mat& g, const Mat& h, const Problem& prob) {
  const Mat resid = prob.y_unfolded - (prob.x * g) * h.transpose();
  return 0.5 * resid.squaredNorm() + penalty_value(g, prob.lambda);
}

/// The W = 0 member of the subdifferential of N(G) = ||M3(Y)^T X G||_*:
/// X^T M3(Y) U V^T with (U, V) from the thin SVD of M3(Y)^T X G.  Valid
/// at rank-deficient points too (the deterministic completion corresponds
/// to a zero-spectral-norm W).
inline Mat nuclear_subgradient(const Mat& g, const Problem& prob) {
  const Mat c = prob.y_unfolded.transpose() * (prob.x * g);
  const ProcrustesResult pr = procrustes_h(c);
  return prob.x.transpose() * (prob.y_unfolded * pr.h);
}

namespace detail {

/// Quantities shared by every iteration of one solver run.
struct DesignOps {
  Mat xtx;      // p x p
  Mat xtm;      // p x (p1*p2), X^T M3(Y)
  double lips;  // Lipschitz modulus L >= ||X^T X||_2
};

inline DesignOps precompute_design(const Problem& prob,
                                   const SolverConfig& cfg) {
  DesignOps d;
  d.xtx = prob.x.transpose() * prob.x;
  d.xtm = prob.x.transpose() * prob.y_unfolded;
  if (cfg.lipschitz_override) {
    d.lips = *cfg.lipschitz_override;
  } else {
    // Tiny inflation keeps the majorization valid if the power iteration
    // stops marginally below the true spectral norm.
    d.lips = spectral_norm(d.xtx, 1e-12) * (1.0 + 1e-10);
  }
  require(d.lips > 0.0, "solver: Lipschitz modulus must be positive");
  return d;
}

/// Unpenalized rank-K spectral warm start: with X^T M3(Y) = U D V^T, take
/// G0 = U[:,1..K] diag(D[1..K]).
inline Mat warm_start(const DesignOps& d, Index k_rank) {
  const ThinSvd svd = thin_svd(d.xtm);
  return svd.u.leftCols(k_rank) * svd.s.head(k_rank).asDiagonal();
}

inline bool svd_rank_deficient(const ThinSvd& svd, Index rows, Index cols) {
  const double smax = svd.s(0);
  const double tiny = static_cast<double>(std::max(rows, cols)) *
                      std::numeric_limits<double>::epsilon() * smax;
  return smax == 0.0 || svd.s(svd.s.size() - 1) <= tiny;
}

/// Trace recorder honouring the dense/strided schedule.
struct TraceRecorder {
  SolverResult* out;
  int stride;
  void initial(double f, double gnorm) const {
    out->objective_trace.push_back(f);
    out->g_norm_trace.push_back(gnorm);
  }
  void record(int iter, double f, double step, double gnorm, bool final) const {
    if (final || iter % stride == 0) {
      out->objective_trace.push_back(f);
      out->step_trace.push_back(step);
      out->g_norm_trace.push_back(gnorm);
    }
  }
};

inline int trace_stride(const Problem& prob, const SolverConfig& cfg) {
  return prob.x.cols() <= cfg.trace_dense_limit ? 1 : cfg.trace_stride_large;
}

inline void finish_result(SolverResult& res, const Problem& prob, const Mat& g,
                          const ThinSvd& csvd, bool sticky_rank_deficient) {
  res.factors.g = g;
  res.factors.h = csvd.u * csvd.v.transpose();
  res.rank_deficient =
      sticky_rank_deficient ||
      svd_rank_deficient(csvd, prob.p1 * prob.p2, prob.k_rank);
  res.b_hat = mode3_fold(res.factors.g * res.factors.h.transpose(), prob.p1,
                         prob.p2);
}

/// pDCAe core; g_init overrides the spectral warm start (used by
/// cross-validation to warm-start along a lambda path).
inline SolverResult solve_pdcae_impl(const Problem& prob,
                                     const SolverConfig& cfg,
                                     const Mat* g_init) {
  prob.validate();
  cfg.validate();
  const DesignOps d = precompute_design(prob, cfg);
  const double L = d.lips;
  const LambdaSeq lam_step = prob.lambda.scaled(1.0 / L);

  Mat g = (g_init != nullptr) ? *g_init : warm_start(d, prob.k_rank);
  detail::require(g_init == nullptr || (g.rows() == prob.x.cols() &&
                                        g.cols() == prob.k_rank),
                  "solve_pdcae: g_init has wrong shape");
  Mat g_prev = g;  // G^(-1) = G^(0)
  Mat xtx_g = d.xtx * g;
  Mat xtx_gprev = xtx_g;
  ThinSvd csvd = thin_svd(Mat(d.xtm.transpose() * g));
  bool sticky_rank =
      svd_rank_deficient(csvd, prob.p1 * prob.p2, prob.k_rank);

  double f_cur = 0.5 * g.cwiseProduct(xtx_g).sum() +
                 penalty_value(g, prob.lambda) - csvd.s.sum();

  SolverResult res;
  const TraceRecorder trace{&res, trace_stride(prob, cfg)};
  trace.initial(f_cur, g.norm());

  double theta_prev = 1.0;
  double step = std::numeric_limits<double>::quiet_NaN();

  for (int k = 0; k < cfg.max_iter; ++k) {
    if (cfg.extrapolation == Extrapolation::nesterov && cfg.restart_every > 0 &&
        k > 0 && k % cfg.restart_every == 0)
      theta_prev = 1.0;
    const double theta =
        0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta_prev * theta_prev));
    const double beta = (cfg.extrapolation == Extrapolation::nesterov)
                            ? (theta_prev - 1.0) / theta
                            : 0.0;

    const Mat a = g + beta * (g - g_prev);

    Mat q1;
    if (cfg.subgrad_at_extrapolated) {
      const ThinSvd asvd = thin_svd(Mat(d.xtm.transpose() * a));
      sticky_rank = sticky_rank ||
                    svd_rank_deficient(asvd, prob.p1 * prob.p2, prob.k_rank);
      q1 = d.xtm * (asvd.u * asvd.v.transpose());
    } else {
      q1 = d.xtm * (csvd.u * csvd.v.transpose());
    }

    const Mat xtx_a = xtx_g + beta * (xtx_g - xtx_gprev);
    const Mat q = a - (xtx_a - q1) / L;
    Mat g_next = group_slope_prox(q, lam_step);

    step = (g_next - g).norm() / std::max(g.norm(), 1.0);

    xtx_gprev = xtx_g;
    xtx_g = d.xtx * g_next;
    csvd = thin_svd(Mat(d.xtm.transpose() * g_next));
    sticky_rank = sticky_rank ||
                  svd_rank_deficient(csvd, prob.p1 * prob.p2, prob.k_rank);
    const double f_next = 0.5 * g_next.cwiseProduct(xtx_g).sum() +
                          penalty_value(g_next, prob.lambda) - csvd.s.sum();
    if (!std::isfinite(f_next))
      throw NumericalError("solve_pdcae: objective diverged");

    res.iterations = k + 1;
    const bool done = (step <= cfg.epsilon) || (k + 1 == cfg.max_iter);
    trace.record(k + 1, f_next, step, g_next.norm(), done);

    // Adaptive restart: drop the momentum whenever the objective rises.
    theta_prev = (f_next > f_cur) ? 1.0 : theta;

    g_prev = g;
    g = std::move(g_next);
    f_cur = f_next;
    if (step <= cfg.epsilon) {
      res.converged = true;
      break;
    }
  }

  res.final_step = step;
  finish_result(res, prob, g, csvd, sticky_rank);
  return res;
}

}  // namespace detail

/// Proximal difference-of-convex iteration with Nesterov-style
/// extrapolation:
///   Q1 = X^T M3(Y) H(G^(k))                (subgradient of the nuclear term)
///   A  = G^(k) + beta_k (G^(k) - G^(k-1))
///   G^(k+1) = group_slope_prox(A - (X^T X A - Q1)/L, lambda/L)
/// with beta_k = (theta_{k-1} - 1)/theta_k,
/// theta_k = (1 + sqrt(1 + 4 theta_{k-1}^2))/2, theta reset on the schedule
/// in SolverConfig.  Stops when the relative step drops below epsilon.
inline SolverResult solve_pdcae(const Problem& prob, const SolverConfig& cfg) {
  return detail::solve_pdcae_impl(prob, cfg, nullptr);
}

/// Block majorization-minimization baseline: G gradient-prox step with H
/// held fixed, then the exact H (Procrustes) step.
inline SolverResult solve_tbmm(const Problem& prob, const SolverConfig& cfg) {
  prob.validate();
  cfg.validate();
  const detail::DesignOps d = detail::precompute_design(prob, cfg);
  const double L = d.lips;
  const LambdaSeq lam_step = prob.lambda.scaled(1.0 / L);

  Mat g = detail::warm_start(d, prob.k_rank);
  ThinSvd csvd = thin_svd(Mat(d.xtm.transpose() * g));
  bool sticky_rank =
      detail::svd_rank_deficient(csvd, prob.p1 * prob.p2, prob.k_rank);
  Mat h = csvd.u * csvd.v.transpose();
  Mat xtx_g = d.xtx * g;
  double f_cur = 0.5 * g.cwiseProduct(xtx_g).sum() +
                 penalty_value(g, prob.lambda) - csvd.s.sum();

  SolverResult res;
  const detail::TraceRecorder trace{&res, detail::trace_stride(prob, cfg)};
  trace.initial(f_cur, g.norm());

  double step = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < cfg.max_iter; ++k) {
    const Mat r = g - (xtx_g - d.xtm * h) / L;
    Mat g_next = group_slope_prox(r, lam_step);

    step = (g_next - g).norm() / std::max(g.norm(), 1.0);

    csvd = thin_svd(Mat(d.xtm.transpose() * g_next));
    sticky_rank = sticky_rank || detail::svd_rank_deficient(
                                     csvd, prob.p1 * prob.p2, prob.k_rank);
    h = csvd.u * csvd.v.transpose();
    xtx_g = d.xtx * g_next;
    const double f_next = 0.5 * g_next.cwiseProduct(xtx_g).sum() +
                          penalty_value(g_next, prob.lambda) - csvd.s.sum();
    if (!std::isfinite(f_next))
      throw NumericalError("solve_tbmm: objective diverged");

    res.iterations = k + 1;
    const bool done = (step <= cfg.epsilon) || (k + 1 == cfg.max_iter);
    trace.record(k + 1, f_next, step, g_next.norm(), done);

    g = std::move(g_next);
    f_cur = f_next;
    if (step <= cfg.epsilon) {
      res.converged = true;
      break;
    }
  }

  res.final_step = step;
  detail::finish_result(res, prob, g, csvd, sticky_rank);
  return res;
}

/// Unpenalized low-rank regression baseline: the pDCAe path with an
/// all-zero lambda sequence.
inline SolverResult solve_tlrr(const Problem& prob, const SolverConfig& cfg) {
  Problem unpenalized = prob;
  unpenalized.lambda = LambdaSeq::zeros(prob.x.cols());
  return solve_pdcae(unpenalized, cfg);
}

/// Alternation specialised to orthonormal designs (X^T X = I_p), where the
/// G subproblem has the closed form G = group_slope_prox(X^T M3(Y) H, lambda).
/// Serves as an independent oracle against solve_pdcae.
inline SolverResult orthogonal_fast_path(const Problem& prob,
                                         const SolverConfig& cfg) {
  prob.validate();
  cfg.validate();
  const Index p = prob.x.cols();
  Mat xtx = prob.x.transpose() * prob.x;
  detail::require((xtx - Mat::Identity(p, p)).norm() <= 1e-8,
                  "orthogonal_fast_path: design is not orthonormal");

  detail::DesignOps d;
  d.xtx = std::move(xtx);
  d.xtm = prob.x.transpose() * prob.y_unfolded;
  d.lips = 1.0;

  Mat g = detail::warm_start(d, prob.k_rank);
  ThinSvd csvd = thin_svd(Mat(d.xtm.transpose() * g));
  bool sticky_rank =
      detail::svd_rank_deficient(csvd, prob.p1 * prob.p2, prob.k_rank);
  Mat h = csvd.u * csvd.v.transpose();
  double f_cur = 0.5 * g.squaredNorm() + penalty_value(g, prob.lambda) -
                 csvd.s.sum();

  SolverResult res;
  const detail::TraceRecorder trace{&res, detail::trace_stride(prob, cfg)};
  trace.initial(f_cur, g.norm());

  double step = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < cfg.max_iter; ++k) {
    Mat g_next = group_slope_prox(d.xtm * h, prob.lambda);

    step = (g_next - g).norm() / std::max(g.norm(), 1.0);

    csvd = thin_svd(Mat(d.xtm.transpose() * g_next));
    sticky_rank = sticky_rank || detail::svd_rank_deficient(
                                     csvd, prob.p1 * prob.p2, prob.k_rank);
    h = csvd.u * csvd.v.transpose();
    const double f_next = 0.5 * g_next.squaredNorm() +
                          penalty_value(g_next, prob.lambda) - csvd.s.sum();
    if (!std::isfinite(f_next))
      throw NumericalError("orthogonal_fast_path: objective diverged");

    res.iterations = k + 1;
    const bool done = (step <= cfg.epsilon) || (k + 1 == cfg.max_iter);
    trace.record(k + 1, f_next, step, g_next.norm(), done);

    g = std::move(g_next);
    f_cur = f_next;
    if (step <= cfg.epsilon) {
      res.converged = true;
      break;
    }
  }

  res.final_step = step;
  detail::finish_result(res, prob, g, csvd, sticky_rank);
  return res;
}

/// Stationarity diagnostic: the relative distance between G and one
/// prox-gradient step from G using the same L as the solvers.  Near zero at
/// fixed points of the iteration.
inline double prox_fixed_point_residual(const Mat& g, const Problem& prob,
                                        const SolverConfig& cfg = {}) {
  prob.validate();
  const detail::DesignOps d = detail::precompute_design(prob, cfg);
  const ThinSvd csvd = thin_svd(Mat(d.xtm.transpose() * g));
  const Mat q1 = d.xtm * (csvd.u * csvd.v.transpose());
  const Mat q = g - (d.xtx * g - q1) / d.lips;
  const Mat g_step = group_slope_prox(q, prob.lambda.scaled(1.0 / d.lips));
  return (g_step - g).norm() / std::max(g.norm(), 1.0);
}

}  // namespace tgslope
