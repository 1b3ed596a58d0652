#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "tgslope/tgslope.hpp"

using namespace tgslope;

namespace {

Tensor3 counting_tensor() {
  // t(i,j,k) = 4(k-1) + 2(j-1) + i in 1-based indexing.
  Tensor3 t(2, 2, 2);
  for (Index k = 0; k < 2; ++k)
    for (Index j = 0; j < 2; ++j)
      for (Index i = 0; i < 2; ++i)
        t(i, j, k) = static_cast<double>(4 * k + 2 * j + (i + 1));
  return t;
}

Tensor3 random_tensor(Rng& rng, Index p1, Index p2, Index p3) {
  Tensor3 t(p1, p2, p3);
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = rng.normal();
  return t;
}

}  // namespace

TEST_CASE("Tensor3 stores and validates", "[tensor]") {
  Tensor3 t(2, 3, 4);
  REQUIRE(t.size() == 24);
  REQUIRE(t.fro_norm() == 0.0);
  t(1, 2, 3) = -7.0;
  REQUIRE(t(1, 2, 3) == -7.0);
  REQUIRE(t.all_finite());
  t(0, 0, 0) = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_FALSE(t.all_finite());
  REQUIRE_THROWS_AS(Tensor3(0, 1, 1), InvalidArgument);
}

TEST_CASE("mode3_unfold lays slices out as rows", "[tensor]") {
  const Tensor3 t = counting_tensor();
  const Mat m = mode3_unfold(t);
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 4);
  // Row k=1 is (1,2,3,4); row k=2 is (5,6,7,8).
  for (Index c = 0; c < 4; ++c) {
    REQUIRE(m(0, c) == static_cast<double>(c + 1));
    REQUIRE(m(1, c) == static_cast<double>(c + 5));
  }
}

TEST_CASE("mode3_unfold of 1x1xn is the entry column", "[tensor]") {
  Tensor3 t(1, 1, 5);
  for (Index k = 0; k < 5; ++k) t(0, 0, k) = static_cast<double>(k * k);
  const Mat m = mode3_unfold(t);
  REQUIRE(m.rows() == 5);
  REQUIRE(m.cols() == 1);
  for (Index k = 0; k < 5; ++k) REQUIRE(m(k, 0) == static_cast<double>(k * k));
}

TEST_CASE("mode3_fold inverts the counting example", "[tensor]") {
  const Tensor3 t = counting_tensor();
  const Tensor3 back = mode3_fold(mode3_unfold(t), 2, 2);
  for (Index k = 0; k < 2; ++k)
    for (Index j = 0; j < 2; ++j)
      for (Index i = 0; i < 2; ++i) REQUIRE(back(i, j, k) == t(i, j, k));
}

TEST_CASE("mode3_fold of zero matrix is the zero tensor", "[tensor]") {
  const Tensor3 z = mode3_fold(Mat::Zero(3, 8), 2, 4);
  REQUIRE(z.fro_norm() == 0.0);
}

TEST_CASE("mode3 round trip is exact on random tensors", "[tensor]") {
  Rng rng(1234);
  for (int rep = 0; rep < 100; ++rep) {
    const Index p1 = 1 + static_cast<Index>(rng.uniform_index(4));
    const Index p2 = 1 + static_cast<Index>(rng.uniform_index(4));
    const Index p3 = 1 + static_cast<Index>(rng.uniform_index(4));
    const Tensor3 t = random_tensor(rng, p1, p2, p3);
    const Tensor3 back = mode3_fold(mode3_unfold(t), p1, p2);
    for (Index i = 0; i < t.size(); ++i)
      REQUIRE(back.data()[i] == t.data()[i]);
  }
  REQUIRE_THROWS_AS(mode3_fold(Mat::Zero(2, 7), 2, 4), InvalidArgument);
}

TEST_CASE("mode3_product with identity is a copy", "[tensor]") {
  Rng rng(77);
  const Tensor3 t = random_tensor(rng, 3, 2, 4);
  const Tensor3 r = mode3_product(t, Mat::Identity(4, 4));
  for (Index i = 0; i < t.size(); ++i) REQUIRE(r.data()[i] == t.data()[i]);
}

TEST_CASE("mode3_product sums slices for an all-ones row", "[tensor]") {
  Tensor3 t(2, 2, 3);
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = 1.0;
  const Tensor3 r = mode3_product(t, Mat::Ones(1, 3));
  REQUIRE(r.dim1() == 2);
  REQUIRE(r.dim2() == 2);
  REQUIRE(r.dim3() == 1);
  for (Index i = 0; i < r.size(); ++i) REQUIRE(r.data()[i] == 3.0);
}

TEST_CASE("mode3_product matches unfold-multiply-fold", "[tensor]") {
  Rng rng(99);
  for (int rep = 0; rep < 20; ++rep) {
    const Tensor3 t = random_tensor(rng, 3, 4, 5);
    const Mat x = random_gaussian(rng, 6, 5);
    const Tensor3 direct = mode3_product(t, x);
    const Mat expected = x * mode3_unfold(t);
    const Mat got = mode3_unfold(direct);
    REQUIRE((got - expected).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("khatri_rao of identities picks e1 and e4", "[tensor]") {
  const Mat kr = khatri_rao(Mat::Identity(2, 2), Mat::Identity(2, 2));
  REQUIRE(kr.rows() == 4);
  REQUIRE(kr.cols() == 2);
  Mat expected = Mat::Zero(4, 2);
  expected(0, 0) = 1.0;  // e1
  expected(3, 1) = 1.0;  // e4
  REQUIRE((kr - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("khatri_rao of column-orthogonal factors is column-orthogonal",
          "[tensor]") {
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const Mat a = random_orthogonal(rng, 5).leftCols(3);
    const Mat b = random_orthogonal(rng, 4).leftCols(3);
    const Mat kr = khatri_rao(a, b);
    REQUIRE(testutil::orthonormality_error(kr) <= 1e-12);
  }
}

TEST_CASE("khatri_rao Gram identity (a⊙b)'(a⊙b) = (a'a)∘(b'b)", "[tensor]") {
  Rng rng(6);
  for (int rep = 0; rep < 10; ++rep) {
    const Mat a = random_gaussian(rng, 5, 3);
    const Mat b = random_gaussian(rng, 4, 3);
    const Mat kr = khatri_rao(a, b);
    const Mat lhs = kr.transpose() * kr;
    const Mat rhs = ((a.transpose() * a).array() *
                     (b.transpose() * b).array()).matrix();
    REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("frontal_slice_norms basics", "[tensor]") {
  REQUIRE(frontal_slice_norms(Tensor3(2, 2, 3)).isZero());

  Tensor3 t(1, 1, 2);
  t(0, 0, 0) = 3.0;
  t(0, 0, 1) = -4.0;
  const Vec norms = frontal_slice_norms(t);
  REQUIRE(norms(0) == 3.0);
  REQUIRE(norms(1) == 4.0);

  Rng rng(8);
  const Tensor3 r = random_tensor(rng, 3, 4, 5);
  const Vec n = frontal_slice_norms(r);
  REQUIRE(n.squaredNorm() ==
          Catch::Approx(r.fro_norm() * r.fro_norm()).epsilon(1e-12));
}
