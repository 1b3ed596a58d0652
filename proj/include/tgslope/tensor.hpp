#pragma once

#include <cassert>
#include <cmath>
#include <utility>
#include <vector>

#include "tgslope/core.hpp"

namespace tgslope {

/// Dense order-3 real tensor.
///
/// Storage is k-major with each frontal slice contiguous and column-major
/// inside the slice: entry (i, j, k) lives at data()[k*p1*p2 + j*p1 + i]
/// (all indices 0-based).  Row k of the mode-3 unfolding, whose column
/// index is l = i + j*p1, is therefore exactly slice k read in storage
/// order, so unfolding is a reshape rather than a gather.
class Tensor3 {
 public:
  Tensor3() = default;

  /// Zero-initialised tensor with the given positive dimensions.
  Tensor3(Index p1, Index p2, Index p3) : p1_(p1), p2_(p2), p3_(p3) {
    detail::require(p1 >= 1 && p2 >= 1 && p3 >= 1,
                    "Tensor3: dimensions must be positive");
    buf_.assign(static_cast<std::size_t>(p1) * static_cast<std::size_t>(p2) *
                    static_cast<std::size_t>(p3),
                0.0);
  }

  Index dim1() const { return p1_; }
  Index dim2() const { return p2_; }
  Index dim3() const { return p3_; }
  Index size() const { return static_cast<Index>(buf_.size()); }

  double& operator()(Index i, Index j, Index k) {
    assert(i >= 0 && i < p1_ && j >= 0 && j < p2_ && k >= 0 && k < p3_);
    return buf_[static_cast<std::size_t>((k * p2_ + j) * p1_ + i)];
  }
  double operator()(Index i, Index j, Index k) const {
    assert(i >= 0 && i < p1_ && j >= 0 && j < p2_ && k >= 0 && k < p3_);
    return buf_[static_cast<std::size_t>((k * p2_ + j) * p1_ + i)];
  }

  double* data() { return buf_.data(); }
  const double* data() const { return buf_.data(); }

  bool all_finite() const {
    for (double v : buf_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double fro_norm() const {
    return Eigen::Map<const Vec>(buf_.data(), size()).norm();
  }

 private:
  Index p1_ = 0, p2_ = 0, p3_ = 0;
  std::vector<double> buf_;
};

/// Mode-3 unfolding: the p3 x (p1*p2) matrix whose entry (k, l) is
/// t(i, j, k) with l = i + j*p1.
inline Mat mode3_unfold(const Tensor3& t) {
  detail::require(t.size() > 0, "mode3_unfold: empty tensor");
  using RowMajorMat =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajorMat>(t.data(), t.dim3(),
                                       t.dim1() * t.dim2());
}

/// Inverse of mode3_unfold for the given slice dimensions.
inline Tensor3 mode3_fold(const Mat& m, Index p1, Index p2) {
  detail::require(p1 >= 1 && p2 >= 1, "mode3_fold: slice dims must be positive");
  detail::require(m.cols() == p1 * p2,
                  "mode3_fold: column count must equal p1*p2");
  detail::require(m.rows() >= 1, "mode3_fold: empty matrix");
  Tensor3 t(p1, p2, m.rows());
  using RowMajorMat =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<RowMajorMat>(t.data(), m.rows(), p1 * p2) = m;
  return t;
}

/// Mode-3 product with a matrix: result(i, j, l) = sum_k t(i, j, k) x(l, k),
/// i.e. mode3_unfold(result) = x * mode3_unfold(t).
inline Tensor3 mode3_product(const Tensor3& t, const Mat& x) {
  detail::require(x.cols() == t.dim3(),
                  "mode3_product: x.cols must equal the tensor's third dim");
  detail::require(x.rows() >= 1, "mode3_product: empty matrix");
  return mode3_fold(x * mode3_unfold(t), t.dim1(), t.dim2());
}

/// Columnwise Kronecker (Khatri-Rao) product: column q of the result is
/// kron(a.col(q), b.col(q)), laid out so entry (i*b.rows + j) = a(i,q) b(j,q).
inline Mat khatri_rao(const Mat& a, const Mat& b) {
  detail::require(a.cols() == b.cols(),
                  "khatri_rao: factors must have equal column counts");
  const Index m = a.rows(), n = b.rows(), k = a.cols();
  Mat out(m * n, k);
  for (Index q = 0; q < k; ++q)
    for (Index i = 0; i < m; ++i)
      out.block(i * n, q, n, 1) = a(i, q) * b.col(q);
  return out;
}

/// Frobenius norm of each frontal slice, as a length-p3 vector.
inline Vec frontal_slice_norms(const Tensor3& t) {
  const Index slice = t.dim1() * t.dim2();
  Vec out(t.dim3());
  for (Index k = 0; k < t.dim3(); ++k)
    out(k) = Eigen::Map<const Vec>(t.data() + k * slice, slice).norm();
  return out;
}

}  // namespace tgslope
