#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "tgslope/core.hpp"

namespace tgslope {

namespace detail {

// splitmix64 step; used purely as a seed scrambler so that nearby seeds and
// (base, stream) pairs land far apart in the engine's state space.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Deterministic random stream.
///
/// The engine is std::mt19937_64, whose output sequence for a given seed is
/// fixed by the C++ standard, seeded through a splitmix64 scrambler.
/// Uniform doubles take the top 53 bits of one engine output; normal draws
/// use Box-Muller on those uniforms.  std::*_distribution is avoided on
/// purpose: its mapping from engine output to variates is
/// implementation-defined, and every experiment table here must be
/// bit-reproducible across platforms.
///
/// A stream is single-owner mutable.  Parallel replications must each
/// derive their own stream via child(base_seed, stream_index), never share.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    engine_.seed(detail::splitmix64(s));
  }

  /// Independent child stream for replication `stream` of a run seeded by
  /// `base_seed`: results never depend on scheduling order.
  static Rng child(std::uint64_t base_seed, std::uint64_t stream) {
    std::uint64_t s = base_seed;
    std::uint64_t mixed = detail::splitmix64(s);
    s = mixed ^ (0x9e3779b97f4a7c15ull * (stream + 1));
    return Rng(detail::splitmix64(s));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Unbiased uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    detail::require(n > 0, "Rng::uniform_index: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  /// Standard normal draw via Box-Muller (second variate cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Matrix of i.i.d. N(0, sd^2) entries, filled in column-major order.
inline Mat random_gaussian(Rng& rng, Index rows, Index cols, double sd = 1.0) {
  detail::require(rows >= 1 && cols >= 1,
                  "random_gaussian: dimensions must be positive");
  detail::require(sd >= 0.0, "random_gaussian: sd must be nonnegative");
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = sd * rng.normal();
  return m;
}

/// Haar-distributed n x n orthogonal matrix: QR of a standard-Gaussian
/// draw with R's diagonal signs normalised positive.
inline Mat random_orthogonal(Rng& rng, Index n) {
  detail::require(n >= 1, "random_orthogonal: n must be positive");
  Mat a = random_gaussian(rng, n, n, 1.0);
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  const Mat& packed = qr.matrixQR();
  for (Index j = 0; j < n; ++j)
    if (packed(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace tgslope
