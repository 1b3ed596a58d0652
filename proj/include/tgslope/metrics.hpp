#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tgslope/core.hpp"
#include "tgslope/tensor.hpp"

namespace tgslope {

/// Frontal-slice selection counts.  v false discoveries, r discoveries,
/// t true discoveries (t = r - v), s true support size, p slice count.
struct SupportComparison {
  int v = 0;
  int r = 0;
  int t = 0;
  int s = 0;
  int p = 0;
};

/// Indices of frontal slices with Frobenius norm strictly above tol.
/// The group-SLOPE prox produces exact zero rows, so tol = 0 is the
/// faithful default; use relative_support_tol for externally loaded
/// estimates that went through lossy round trips.
inline std::vector<Index> support_of(const Tensor3& b, double tol = 0.0) {
  detail::require(tol >= 0.0, "support_of: tol must be nonnegative");
  const Vec norms = frontal_slice_norms(b);
  std::vector<Index> out;
  for (Index k = 0; k < norms.size(); ++k)
    if (norms(k) > tol) out.push_back(k);
  return out;
}

/// A forgiving tolerance for estimates not produced in-process:
/// 1e-10 times the largest slice norm.
inline double relative_support_tol(const Tensor3& b) {
  return 1e-10 * frontal_slice_norms(b).maxCoeff();
}

inline SupportComparison compare_support(const Tensor3& b_hat,
                                         const Tensor3& b_star,
                                         double tol = 0.0) {
  detail::require(b_hat.dim3() == b_star.dim3(),
                  "compare_support: slice counts must agree");
  const std::vector<Index> sel = support_of(b_hat, tol);
  const std::vector<Index> truth = support_of(b_star, tol);
  SupportComparison c;
  c.p = static_cast<int>(b_hat.dim3());
  c.r = static_cast<int>(sel.size());
  c.s = static_cast<int>(truth.size());
  // Both sets are sorted ascending by construction.
  std::vector<Index> hits;
  std::set_intersection(sel.begin(), sel.end(), truth.begin(), truth.end(),
                        std::back_inserter(hits));
  c.t = static_cast<int>(hits.size());
  c.v = c.r - c.t;
  return c;
}

/// False discovery proportion V / max(R, 1).
inline double fdp(const SupportComparison& c) {
  return static_cast<double>(c.v) / std::max(c.r, 1);
}

/// True positive rate T / s, zero when s = 0.
inline double tp_rate(const SupportComparison& c) {
  return c.s == 0 ? 0.0 : static_cast<double>(c.t) / c.s;
}

/// Relative group estimate error between the slice-norm vectors:
/// ||[[b_hat]]_F - [[b_star]]_F||^2 / ||[[b_star]]_F||^2.
inline double rgee(const Tensor3& b_hat, const Tensor3& b_star) {
  detail::require(b_hat.dim1() == b_star.dim1() &&
                      b_hat.dim2() == b_star.dim2() &&
                      b_hat.dim3() == b_star.dim3(),
                  "rgee: dimensions must agree");
  const Vec u = frontal_slice_norms(b_hat);
  const Vec v = frontal_slice_norms(b_star);
  const double denom = v.squaredNorm();
  detail::require(denom > 0.0, "rgee: b_star must be nonzero");
  return (u - v).squaredNorm() / denom;
}

/// Mean squared estimation error ||(b_hat - b_star) x3 X||_F^2 / (n p1 p2).
inline double mse(const Tensor3& b_hat, const Tensor3& b_star, const Mat& x) {
  detail::require(b_hat.dim1() == b_star.dim1() &&
                      b_hat.dim2() == b_star.dim2() &&
                      b_hat.dim3() == b_star.dim3(),
                  "mse: coefficient dimensions must agree");
  detail::require(x.cols() == b_hat.dim3(),
                  "mse: x.cols must equal the coefficient slice count");
  const Mat diff = x * (mode3_unfold(b_hat) - mode3_unfold(b_star));
  return diff.squaredNorm() /
         static_cast<double>(x.rows() * b_hat.dim1() * b_hat.dim2());
}

/// Mean squared prediction error
/// ||y_test - b_hat x3 x_test||_F^2 / (p1 p2 n_test).
inline double mspe(const Tensor3& y_test, const Tensor3& b_hat,
                   const Mat& x_test) {
  detail::require(y_test.dim1() == b_hat.dim1() &&
                      y_test.dim2() == b_hat.dim2(),
                  "mspe: slice dimensions must agree");
  detail::require(x_test.cols() == b_hat.dim3(),
                  "mspe: x_test.cols must equal the coefficient slice count");
  detail::require(x_test.rows() == y_test.dim3(),
                  "mspe: x_test rows must match test sample count");
  const Mat resid = mode3_unfold(y_test) - x_test * mode3_unfold(b_hat);
  return resid.squaredNorm() /
         static_cast<double>(y_test.dim1() * y_test.dim2() * y_test.dim3());
}

namespace detail {

/// BIC formula on precomputed components; natural logarithms.
inline double bic_value(double rss_sq, double n_total, double group_count,
                        int discovery, int k_rank) {
  return std::log(rss_sq) +
         (static_cast<double>(discovery) + group_count) *
             static_cast<double>(k_rank) * std::log(n_total);
}

}  // namespace detail

/// BIC-type criterion
///   log ||y - b_hat x3 x||_F^2 + (Discovery + p1 p2) K log(n p1 p2).
inline double bic(const Tensor3& y, const Mat& x, const Tensor3& b_hat,
                  int discovery, int k_rank) {
  detail::require(discovery >= 0, "bic: discovery must be nonnegative");
  detail::require(k_rank >= 1, "bic: k_rank must be positive");
  const double rss_sq = mspe(y, b_hat, x) * static_cast<double>(y.dim1() *
                                                                y.dim2() *
                                                                y.dim3());
  if (!(rss_sq > 0.0))
    throw NumericalError(
        "bic: zero residual; the fit interpolates the data -- audit lambda "
        "and K before trusting model selection");
  const double n_total =
      static_cast<double>(y.dim1() * y.dim2() * y.dim3());
  const double group_count = static_cast<double>(y.dim1() * y.dim2());
  return detail::bic_value(rss_sq, n_total, group_count, discovery, k_rank);
}

}  // namespace tgslope
