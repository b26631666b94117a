#include <gtest/gtest.h>

#include <random>

#include "cdef/errors.hpp"
#include "cdef/linalg.hpp"
#include "support/rational_oracle.hpp"

namespace cdef {
namespace {

struct LinalgTest : ::testing::Test {
  ScalarProduct minkowski = ScalarProduct::diagonal({-1, 1, 1, 1});
  ScalarProduct cone = ScalarProduct::light_cone(3);
};

TEST_F(LinalgTest, ScalarProductIndex) {
  EXPECT_EQ(minkowski.index(), 1);
  EXPECT_EQ(cone.index(), 1);
  EXPECT_EQ(ScalarProduct::euclidean(5).index(), 0);
  EXPECT_THROW(ScalarProduct(Mat::Zero(2, 2)), DegenerateSubspace);
}

TEST_F(LinalgTest, NullLineIsDegenerate) {
  Vec v(4);
  v << 1, 1, 0, 0;
  const Subspace L = Subspace::span(minkowski, v);
  EXPECT_EQ(L.signature().null, 1);
  EXPECT_EQ(radical(L).rank(), 1);
  EXPECT_THROW(projector(L), DegenerateSubspace);
}

TEST_F(LinalgTest, LorentzPlaneAndComplement) {
  Mat b = Mat::Zero(4, 2);
  b(0, 0) = 1;
  b(1, 1) = 1;
  const Subspace P = Subspace::span(minkowski, b);
  EXPECT_TRUE(P.signature().lorentzian());
  const Subspace Q = orthogonal_complement(P);
  EXPECT_EQ(Q.rank(), 2);
  EXPECT_TRUE(Q.signature().riemannian());
  const Mat pr = projector(P);
  EXPECT_LT((pr * pr - pr).norm(), 1e-12);
}

TEST_F(LinalgTest, DegenerateComplementContainsRadical) {
  // A null line is contained in its own orthogonal complement.
  Vec v(4);
  v << 1, 0, 0, 1;
  const Subspace L = Subspace::span(minkowski, v);
  const Subspace Lperp = orthogonal_complement(L);
  EXPECT_EQ(Lperp.rank(), 3);
  EXPECT_EQ(intersect(L, Lperp).rank(), 1);
  EXPECT_EQ(Lperp.signature().null, 1);
}

TEST_F(LinalgTest, IntersectAndSum) {
  const ScalarProduct e = ScalarProduct::euclidean(5);
  Mat a = Mat::Zero(5, 3), b = Mat::Zero(5, 3);
  a(0, 0) = a(1, 1) = a(2, 2) = 1;
  b(2, 0) = b(3, 1) = b(4, 2) = 1;
  const Subspace U = Subspace::span(e, a), V = Subspace::span(e, b);
  EXPECT_EQ(intersect(U, V).rank(), 1);
  EXPECT_EQ(sum(U, V).rank(), 5);
}

TEST_F(LinalgTest, NullitySpaceOfDiagonalForm) {
  // beta(e_i, e_j) = delta_ij k_i N, with k = (1, 0, 2): nullity is e_2.
  const ScalarProduct t = ScalarProduct::euclidean(2);
  BilinearSample beta(3, 3, t, true);
  Vec N = Vec::Unit(2, 0);
  beta(0, 0) = N;
  beta(2, 2) = 2 * N;
  const Subspace nu = nullity_space(beta);
  ASSERT_EQ(nu.rank(), 1);
  EXPECT_NEAR(std::abs(nu.basis()(1, 0)), 1.0, 1e-12);
  EXPECT_EQ(span_of_image(beta).rank(), 1);
}

TEST_F(LinalgTest, NullityWithDegenerateTarget) {
  // Projection-free: T may be a null line.
  BilinearSample beta(2, 2, minkowski, true);
  Vec a(4), b(4);
  a << 1, 1, 0, 0;
  b << 0, 0, 1, 0;
  beta(0, 0) = a;
  beta(1, 1) = b;
  Vec w(4);
  w << 1, 1, 0, 0;
  const Subspace T = Subspace::span(minkowski, w);
  // <a, w> = 0 and <b, w> = 0 so everything is in the nullity.
  EXPECT_EQ(nullity_space(beta, T).rank(), 2);
}

TEST_F(LinalgTest, RestrictedLeftCarriesMetric) {
  BilinearSample beta(2, 2, ScalarProduct::euclidean(1), true);
  beta.left = ScalarProduct::diagonal({1, -1});
  Mat b(2, 1);
  b << 1, 0;
  const BilinearSample r = beta.restricted_left(b);
  EXPECT_EQ(r.left_dim, 1);
  EXPECT_DOUBLE_EQ(r.left.gram()(0, 0), 1.0);
}

TEST_F(LinalgTest, RankAndInertiaMatchRationalOracle) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> dim(1, 8), entry(-3, 3);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = dim(rng), k = dim(rng);
    std::vector<std::vector<long>> f(n, std::vector<long>(k));
    Mat m(n, k);
    // Low-rank product so that rank deficiency is common.
    const int r = std::uniform_int_distribution<int>(0, std::min(n, k))(rng);
    Mat a(n, r), b(r, k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < r; ++j) a(i, j) = entry(rng);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < k; ++j) b(i, j) = entry(rng);
    m = a * b;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j) f[i][j] = static_cast<long>(m(i, j));
    if (numerical_rank(m, Tolerance{}) != oracle::rank(oracle::from_ints(f))) ++mismatches;

    const Mat g = a * a.transpose() - (a.rightCols(r > 0 ? 1 : 0) * a.rightCols(r > 0 ? 1 : 0).transpose()) * 2.0;
    std::vector<std::vector<long>> gi(n, std::vector<long>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) gi[i][j] = static_cast<long>(g(i, j));
    const auto ex = oracle::inertia(oracle::from_ints(gi));
    const Signature s = signature_of(g, 1e-9 * std::max(1.0, g.cwiseAbs().maxCoeff()));
    if (s.pos != ex.pos || s.neg != ex.neg || s.null != ex.null) ++mismatches;
  }
  EXPECT_EQ(mismatches, 0);
}

} // namespace
} // namespace cdef
