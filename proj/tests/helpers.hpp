#pragma once

// Shared fixtures and oracles for the unit and acceptance suites.

#include <filesystem>
#include <string>
#include <vector>

#include "tgslope/tgslope.hpp"

namespace testutil {

using tgslope::GroundTruth;
using tgslope::Index;
using tgslope::Mat;
using tgslope::Rng;
using tgslope::Tensor3;
using tgslope::Vec;

/// Fresh directory under the system temp root.
inline std::string temp_dir(const std::string& tag) {
  static int counter = 0;
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() /
      ("tgslope_test_" + tag + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

/// One synthetic instance: design, truth, response, assembled problem.
struct Instance {
  Mat x;
  GroundTruth truth;
  Tensor3 y;
  tgslope::Problem prob;
};

inline Instance make_instance(const tgslope::SimulationSpec& spec, Rng& rng) {
  Instance inst;
  inst.x = tgslope::gen_design(spec, rng);
  inst.truth = tgslope::gen_truth(spec, rng);
  inst.y = tgslope::gen_response(inst.truth, inst.x, spec.sigma, rng);
  inst.prob = tgslope::make_problem(
      inst.x, inst.y, spec.k_rank,
      tgslope::lambda_chi_sequence({static_cast<int>(spec.k_rank), spec.q,
                                    spec.sigma > 0.0 ? spec.sigma : 1.0,
                                    spec.p}));
  return inst;
}

inline double orthonormality_error(const Mat& h) {
  return (h.transpose() * h -
          Mat::Identity(h.cols(), h.cols())).cwiseAbs().maxCoeff();
}

/// Sorted-l1 objective 0.5*||x-y||^2 + sum_j lambda_j |x|_(j).
inline double slope_objective(const Vec& x, const Vec& y, const Vec& lambda) {
  Vec a = x.cwiseAbs();
  std::sort(a.data(), a.data() + a.size(), std::greater<double>());
  return 0.5 * (x - y).squaredNorm() + a.dot(lambda);
}

/// slope_objective(c) - slope_objective(z), computed without the catastrophic
/// cancellation of subtracting two O(f) values: the quadratic part uses the
/// identity (c-y)^2 - (z-y)^2 = (c-z)((c-y)+(z-y)), and the penalty part
/// differences the two sorted magnitude vectors element-wise (order statistics
/// of nearby vectors are nearby, and subtracting nearby doubles is exact).
/// Resolves objective changes far below machine epsilon of the objective
/// itself, which is what lets a perturbation descent certify the minimizer to
/// ~1e-8 instead of ~sqrt(eps * f).
inline double slope_objective_diff(const Vec& cand, const Vec& z, const Vec& y,
                                   const Vec& lambda) {
  double quad = 0.0;
  for (Index i = 0; i < z.size(); ++i)
    quad += (cand(i) - z(i)) * (0.5 * ((cand(i) - y(i)) + (z(i) - y(i))));
  Vec a = cand.cwiseAbs();
  Vec b = z.cwiseAbs();
  std::sort(a.data(), a.data() + a.size(), std::greater<double>());
  std::sort(b.data(), b.data() + b.size(), std::greater<double>());
  double pen = 0.0;
  for (Index j = 0; j < lambda.size(); ++j) pen += lambda(j) * (a(j) - b(j));
  return quad + pen;
}

/// Brute-force proximal oracle: pattern descent over shrinking perturbation
/// radii. Directions are the signed axes, signed two-coordinate combinations,
/// `random_dirs` seeded random unit vectors per radius level, and — crucially
/// for the sorted-l1 geometry — joint sign-aligned moves over clusters of
/// coordinates whose magnitudes are currently tied (within a radius-scaled
/// tolerance). Without the cluster moves the search stalls on the tie
/// manifolds where the minimizer lives, because any single-coordinate step
/// breaks a tie and the sorted penalty punishes it.
inline Vec perturbation_descent_prox(const Vec& y, const Vec& lambda, Rng& rng,
                                     double tol = 1e-8, int random_dirs = 64) {
  const Index p = y.size();
  std::vector<Vec> dirs;
  for (Index i = 0; i < p; ++i) {
    Vec d = Vec::Zero(p);
    d(i) = 1.0;
    dirs.push_back(d);
    dirs.push_back(-d);
  }
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j)
      for (double si : {1.0, -1.0})
        for (double sj : {1.0, -1.0}) {
          Vec d = Vec::Zero(p);
          d(i) = si;
          d(j) = sj;
          dirs.push_back(d / d.norm());
        }

  // Joint magnitude moves over every maximal run of near-tied |z| values,
  // including runs obtained by merging adjacent clusters.
  const auto cluster_dirs = [&](const Vec& z, double radius) {
    std::vector<Vec> out;
    std::vector<Index> order(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](Index a, Index b) { return std::abs(z(a)) > std::abs(z(b)); });
    const double gap = 4.0 * radius;
    for (std::size_t lo = 0; lo < order.size(); ++lo) {
      for (std::size_t hi = lo; hi < order.size(); ++hi) {
        if (hi > lo && std::abs(std::abs(z(order[hi - 1])) -
                                std::abs(z(order[hi]))) > gap)
          break;
        if (hi == lo) continue;  // singletons are already axis moves
        Vec d = Vec::Zero(p);
        for (std::size_t t = lo; t <= hi; ++t) {
          const Index i = order[t];
          const double s = z(i) != 0.0 ? (z(i) > 0.0 ? 1.0 : -1.0)
                                       : (y(i) >= 0.0 ? 1.0 : -1.0);
          d(i) = s;
        }
        d /= d.norm();
        out.push_back(d);
        out.push_back(-d);
      }
    }
    return out;
  };

  Vec z = y;
  // Each direction is probed at several step lengths per radius level; the
  // terminal accuracy of a pattern search is a small multiple of the finest
  // probed step, so the shortest probe keeps it well under the tolerance.
  // Acceptance uses the cancellation-free objective difference so that the
  // final refinement is not drowned by roundoff of the absolute objective.
  const auto try_dir = [&](const Vec& d, double radius) {
    bool improved = false;
    for (double len : {radius, radius / 4.0, radius / 16.0}) {
      const Vec cand = z + len * d;
      if (slope_objective_diff(cand, z, y, lambda) < 0.0) {
        z = cand;
        improved = true;
      }
    }
    return improved;
  };
  double radius = 1.0 + y.cwiseAbs().maxCoeff();
  while (radius > tol) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (const Vec& d : dirs) improved = try_dir(d, radius) || improved;
      for (const Vec& d : cluster_dirs(z, radius))
        improved = try_dir(d, radius) || improved;
      for (int r = 0; r < random_dirs; ++r) {
        Vec d(p);
        for (Index i = 0; i < p; ++i) d(i) = rng.normal();
        d /= d.norm();
        improved = try_dir(d, radius) || improved;
      }
    }
    radius *= 0.5;
  }
  return z;
}

/// Matrix-level group objective 0.5*||Z-Y||_F^2 + P_lambda(row norms of Z).
inline double group_objective(const Mat& z, const Mat& y, const Vec& lambda) {
  Vec norms = z.rowwise().norm();
  std::sort(norms.data(), norms.data() + norms.size(), std::greater<double>());
  return 0.5 * (z - y).squaredNorm() + norms.dot(lambda);
}

}  // namespace testutil
