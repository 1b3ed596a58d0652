#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "tgslope/core.hpp"

namespace tgslope {

/// Thin SVD factors: m = u * s.asDiagonal() * v^T with r = min(rows, cols)
/// columns, singular values nonincreasing.
struct ThinSvd {
  Mat u;
  Vec s;
  Mat v;
};

/// Thin SVD with a fixed sign convention: the largest-magnitude entry of
/// each left singular vector (first such index on ties) is made
/// nonnegative, with the matching right vector flipped along.  This breaks
/// the +-pair ambiguity so repeated calls and downstream factors are
/// byte-identical.
inline ThinSvd thin_svd(const Mat& m) {
  detail::require(m.size() > 0, "thin_svd: empty matrix");
  detail::require(m.allFinite(), "thin_svd: non-finite input");
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw NumericalError("thin_svd: iteration failed to converge");
  ThinSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  for (Index j = 0; j < out.u.cols(); ++j) {
    Index imax = 0;
    out.u.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.u(imax, j) < 0.0) {
      out.u.col(j) = -out.u.col(j);
      out.v.col(j) = -out.v.col(j);
    }
  }
  return out;
}

/// Largest singular value via power iteration on m^T m.
///
/// Deterministic: the start vector is normalised all-ones, with a fixed
/// alternating-sign perturbation as fallback if the iteration stalls (the
/// start can be orthogonal to the top singular space).  The returned value
/// carries a mild upward bias of tol/(1-tol) as a safeguard for use as a
/// Lipschitz modulus, clamped by the Frobenius norm, which always bounds
/// the spectral norm from above.
inline double spectral_norm(const Mat& m, double tol = 1e-10) {
  detail::require(m.size() > 0, "spectral_norm: empty matrix");
  detail::require(tol > 0.0 && tol < 1.0, "spectral_norm: tol must be in (0,1)");
  const double fro = m.norm();
  if (fro == 0.0) return 0.0;

  const Index nc = m.cols();
  const auto run = [&](Vec v) -> double {
    v.normalize();
    double est = 0.0;
    int stable = 0;
    for (int it = 0; it < 20000; ++it) {
      Vec w = m * v;
      const double wn = w.norm();
      if (wn == 0.0) return 0.0;  // v in the null space; caller perturbs
      Vec z = m.transpose() * (w / wn);
      const double zn = z.norm();
      if (zn == 0.0) return 0.0;
      v = z / zn;
      if (std::abs(zn - est) <= tol * std::max(zn, 1e-300)) {
        if (++stable >= 2) return zn;
      } else {
        stable = 0;
      }
      est = zn;
    }
    return est;
  };

  double est = run(Vec::Ones(nc));
  // Fallback start: alternating signs with an index-dependent taper, chosen
  // to be linearly independent of all-ones.
  Vec pert(nc);
  for (Index i = 0; i < nc; ++i)
    pert(i) = ((i % 2 == 0) ? 1.0 : -1.0) / static_cast<double>(i + 1);
  if (nc == 1) pert(0) = 1.0;
  est = std::max(est, run(pert));
  return std::min(est / (1.0 - tol), fro);
}

/// Sum of singular values.
inline double nuclear_norm(const Mat& m) {
  return thin_svd(m).s.sum();
}

/// Result of the orthogonal Procrustes step.  rank_deficient is set when
/// the K-th singular value of the input vanishes relative to the largest,
/// in which case the maximiser is non-unique and the deterministic SVD
/// completion is returned.
struct ProcrustesResult {
  Mat h;
  bool rank_deficient = false;
};

/// Maximiser of trace(H^T c) over column-orthogonal H: H = U V^T from the
/// thin SVD c = U diag(s) V^T.  The optimum value is the nuclear norm of c.
inline ProcrustesResult procrustes_h(const Mat& c) {
  ThinSvd svd = thin_svd(c);
  ProcrustesResult out;
  out.h = svd.u * svd.v.transpose();
  const Index r = svd.s.size();
  const double smax = svd.s(0);
  const double tiny = static_cast<double>(std::max(c.rows(), c.cols())) *
                      std::numeric_limits<double>::epsilon() * smax;
  out.rank_deficient = (smax == 0.0) || (svd.s(r - 1) <= tiny);
  return out;
}

}  // namespace tgslope
