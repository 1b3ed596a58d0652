#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "tgslope/core.hpp"

namespace tgslope {

namespace detail {

/// Regularized lower incomplete gamma P(a, x), series branch (x < a+1).
inline double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 1; n <= 800; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw NumericalError("gamma_p: series failed to converge");
}

/// Regularized upper incomplete gamma Q(a, x) via Lentz's continued
/// fraction (x >= a+1).
inline double gamma_q_cf(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 800; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw NumericalError("gamma_q: continued fraction failed to converge");
}

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
/// Series for small x, continued fraction for large, switching at x = a+1.
inline double gamma_p(double a, double x) {
  require(a > 0.0 && x >= 0.0, "gamma_p: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

inline double chi_cdf(int k_dof, double x) {
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * k_dof, 0.5 * x * x);
}

inline double chi_log_pdf(int k_dof, double x) {
  const double a = 0.5 * k_dof;
  return (k_dof - 1) * std::log(x) - 0.5 * x * x - (a - 1.0) * std::log(2.0) -
         std::lgamma(a);
}

}  // namespace detail

/// Quantile of the chi distribution with k_dof degrees of freedom:
/// the x with P(k/2, x^2/2) = alpha, found by safeguarded Newton/bisection
/// on the incomplete-gamma evaluation.  Absolute accuracy ~1e-12 on the
/// bracket, comfortably inside the 1e-10 contract for k_dof <= 200.
inline double chi_quantile(int k_dof, double alpha) {
  detail::require(k_dof >= 1, "chi_quantile: k_dof must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidArgument("chi_quantile: alpha must lie in (0,1)");

  double lo = 0.0;
  double hi = std::sqrt(static_cast<double>(k_dof)) + 1.0;
  int guard = 0;
  while (detail::chi_cdf(k_dof, hi) < alpha) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 200)
      throw NumericalError("chi_quantile: bracket expansion failed");
  }

  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = detail::chi_cdf(k_dof, x) - alpha;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    if (hi - lo <= 1e-13 * (1.0 + hi)) break;
    double xn;
    const double logpdf = detail::chi_log_pdf(k_dof, x);
    if (x > 0.0 && logpdf > -690.0) {
      xn = x - f / std::exp(logpdf);
      if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    } else {
      xn = 0.5 * (lo + hi);
    }
    if (std::abs(xn - x) <= 1e-14 * (1.0 + x)) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x;
}

/// Construction parameters of the chi-quantile lambda sequence:
/// lambda_j = sigma * F_chi(k)^{-1}(1 - q j / p), j = 1..p.
struct ChiQuantileParams {
  int k_dof = 1;      // CP rank K (degrees of freedom)
  double q = 0.1;     // target level in (0,1)
  double sigma = 1.0; // noise standard deviation
  Index p = 1;        // group (slice) count

  void validate() const {
    detail::require(k_dof >= 1, "ChiQuantileParams: k_dof must be >= 1");
    detail::require(q > 0.0 && q < 1.0, "ChiQuantileParams: q must lie in (0,1)");
    detail::require(sigma > 0.0, "ChiQuantileParams: sigma must be positive");
    detail::require(p >= 1, "ChiQuantileParams: p must be >= 1");
  }
};

/// Nonincreasing, nonnegative regularization sequence.  Either the leading
/// value is positive (penalized mode) or the whole sequence is zero.
class LambdaSeq {
 public:
  LambdaSeq() = default;

  explicit LambdaSeq(Vec values) : values_(std::move(values)) {
    detail::require(values_.size() >= 1, "LambdaSeq: empty sequence");
    detail::require(values_(values_.size() - 1) >= 0.0,
                    "LambdaSeq: values must be nonnegative");
    for (Index j = 1; j < values_.size(); ++j)
      detail::require(values_(j - 1) >= values_(j),
                      "LambdaSeq: values must be nonincreasing");
  }

  static LambdaSeq zeros(Index p) {
    detail::require(p >= 1, "LambdaSeq::zeros: p must be >= 1");
    return LambdaSeq(Vec::Zero(p));
  }

  static LambdaSeq flat(double value, Index p) {
    detail::require(value >= 0.0, "LambdaSeq::flat: value must be nonnegative");
    detail::require(p >= 1, "LambdaSeq::flat: p must be >= 1");
    return LambdaSeq(Vec::Constant(p, value));
  }

  const Vec& values() const { return values_; }
  Index size() const { return values_.size(); }
  double operator[](Index j) const { return values_(j); }
  bool is_zero() const { return values_.size() == 0 || values_(0) == 0.0; }

  /// Sequence scaled by c >= 0 (used for lambda/L); monotone by construction.
  LambdaSeq scaled(double c) const {
    detail::require(c >= 0.0, "LambdaSeq::scaled: factor must be nonnegative");
    return LambdaSeq(Vec(values_ * c));
  }

 private:
  Vec values_;
};

/// The chi-quantile sequence lambda_j = sigma * chi_quantile(K, 1 - q j/p).
/// Nonincreasing by construction; adjacent values are clamped to guard
/// against sub-1e-12 quantile-solver jitter on near-equal arguments.
inline LambdaSeq lambda_chi_sequence(const ChiQuantileParams& params) {
  params.validate();
  Vec v(params.p);
  for (Index j = 0; j < params.p; ++j) {
    const double alpha =
        1.0 - params.q * static_cast<double>(j + 1) / static_cast<double>(params.p);
    v(j) = params.sigma * chi_quantile(params.k_dof, alpha);
    if (j > 0 && v(j) > v(j - 1)) v(j) = v(j - 1);
  }
  return LambdaSeq(v);
}

/// Proximal operator of the SLOPE penalty sum_j lambda_j |x|_(j):
/// argmin_x 1/2||x - y||^2 + P_lambda(x).
///
/// Magnitudes are sorted (stable on ties, by original index), lambda is
/// subtracted, and a single stack-based pool-adjacent-violators pass
/// enforces a nonincreasing nonnegative solution before the permutation
/// and signs are undone.  O(p log p).
inline Vec slope_prox(const Vec& y, const Vec& lambda) {
  const Index p = y.size();
  detail::require(lambda.size() == p, "slope_prox: length mismatch");
  detail::require(p >= 1, "slope_prox: empty input");
  detail::require(lambda(p - 1) >= 0.0, "slope_prox: lambda must be nonnegative");
  for (Index j = 1; j < p; ++j)
    detail::require(lambda(j - 1) >= lambda(j),
                    "slope_prox: lambda must be nonincreasing");

  std::vector<Index> order(p);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(y(a)) > std::abs(y(b));
  });

  // Stack of blocks [idx_lo, idx_hi] with running sum s and average w.
  std::vector<Index> idx_lo(p), idx_hi(p);
  std::vector<double> s(p), w(p);
  Index k = 0;
  for (Index i = 0; i < p; ++i) {
    idx_lo[k] = i;
    idx_hi[k] = i;
    s[k] = std::abs(y(order[i])) - lambda(i);
    w[k] = s[k];
    while (k > 0 && w[k - 1] <= w[k]) {
      --k;
      idx_hi[k] = i;
      s[k] += s[k + 1];
      w[k] = s[k] / static_cast<double>(i - idx_lo[k] + 1);
    }
    ++k;
  }

  Vec x(p);
  for (Index block = 0; block < k; ++block) {
    const double v = std::max(w[block], 0.0);
    for (Index i = idx_lo[block]; i <= idx_hi[block]; ++i) {
      const Index src = order[i];
      x(src) = (y(src) < 0.0) ? -v : v;
    }
  }
  return x;
}

inline Vec slope_prox(const Vec& y, const LambdaSeq& lambda) {
  return slope_prox(y, lambda.values());
}

/// Two-step proximal operator of G -> P_lambda([[G]]) on row-normed groups:
/// eta = slope_prox of the row norms (nonnegative input, nonnegative
/// output), then each row is rescaled to norm eta_j along its own
/// direction, with 0/0 -> zero row.
inline Mat group_slope_prox(const Mat& q_mat, const LambdaSeq& lambda) {
  detail::require(lambda.size() == q_mat.rows(),
                  "group_slope_prox: lambda length must equal row count");
  Vec norms = q_mat.rowwise().norm();
  Vec eta = slope_prox(norms, lambda.values());
  Mat out(q_mat.rows(), q_mat.cols());
  for (Index j = 0; j < q_mat.rows(); ++j) {
    if (norms(j) > 0.0 && eta(j) > 0.0)
      out.row(j) = q_mat.row(j) * (eta(j) / norms(j));
    else
      out.row(j).setZero();
  }
  return out;
}

/// SLOPE penalty of the row norms: sum_j lambda_j * (sorted row norms)_j.
inline double penalty_value(const Mat& g, const LambdaSeq& lambda) {
  detail::require(lambda.size() == g.rows(),
                  "penalty_value: lambda length must equal row count");
  std::vector<double> norms(static_cast<std::size_t>(g.rows()));
  for (Index j = 0; j < g.rows(); ++j)
    norms[static_cast<std::size_t>(j)] = g.row(j).norm();
  std::sort(norms.begin(), norms.end(), std::greater<double>());
  double total = 0.0;
  for (Index j = 0; j < g.rows(); ++j)
    total += lambda[j] * norms[static_cast<std::size_t>(j)];
  return total;
}

}  // namespace tgslope
