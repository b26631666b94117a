#include <gtest/gtest.h>

#include <cmath>

#include "cdef/builtins.hpp"
#include "cdef/errors.hpp"
#include "cdef/pair.hpp"

namespace cdef {
namespace {

Mat rotation4() {
  Mat A(4, 4);
  A << 0.3, -1.2, 0.5, 0.1, 0.7, 0.2, -0.4, 1.1, -0.5, 0.9, 0.8, 0.3, 1.0, 0.1, 0.2, -0.6;
  Eigen::HouseholderQR<Mat> qr(A);
  return qr.householderQ();
}

struct PairTest : ::testing::Test {
  PairOptions opt;
  PairTest() { opt.exec = Exec::serial; }
  Grid small2 = Grid((Vec(2) << -0.1, -0.1).finished(), (Vec(2) << 0.1, 0.1).finished(), {3, 3});
};

TEST_F(PairTest, JointSpaceOfIdenticalPairIsNull) {
  const auto f = quadric_graph((Mat(2, 2) << 1.0, 2.0, 0.5, -1.0).finished());
  const Vec u = Vec::Zero(2);
  const JointNormalSpace js = build_joint(f->ambient(), f->point(u, 2), f->ambient(), f->point(u, 2), opt);
  EXPECT_EQ(js.span.rank(), 2);
  EXPECT_LT(js.span.gram().cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(js.radical.rank(), 2);
  EXPECT_FALSE(degeneracy_test(js).degenerate);
}

TEST_F(PairTest, PlanarAgainstCurvedIsNegativeDefinite) {
  const auto f = plane(2, 3);
  const auto g = sphere(2, 2.0);
  const Vec u = Vec::Zero(2);
  const JointNormalSpace js = build_joint(f->ambient(), f->point(u, 2), g->ambient(), g->point(u, 2), opt);
  EXPECT_EQ(js.span.rank(), 1);
  EXPECT_EQ(js.span.signature().neg, 1);
  EXPECT_EQ(js.radical.rank(), 0);
}

TEST_F(PairTest, NonIsometricPairRejected) {
  const auto f = plane(2, 3);
  const auto g = sphere(2, 1.0);
  const Vec u = (Vec(2) << 0.3, 0.2).finished();
  EXPECT_THROW(build_joint(f->ambient(), f->point(u, 2), g->ambient(), g->point(u, 2), opt), NotIsometricPair);
}

TEST_F(PairTest, CongruentPair) {
  const auto f = quadric_graph((Mat(2, 2) << 1.0, 2.0, 0.5, -1.0).finished());
  const auto g = rigid_motion(f, rotation4(), (Vec(4) << 1.0, -2.0, 0.5, 3.0).finished());
  const PairPipeline pipe(f, g, opt);
  const ConstructionState st = construct_TD(pipe, small2);
  EXPECT_EQ(st.branch, Branch::nondegenerate);
  ASSERT_EQ(st.regions.size(), 1u);
  for (const PairPoint& p : st.points) {
    ASSERT_TRUE(p.error.empty()) << p.error;
    EXPECT_EQ(p.split.Gamma.rank(), 0);
    EXPECT_EQ(p.Theta.cols(), 2);
    EXPECT_EQ(p.L.rank(), 2);   // the whole normal bundle
    EXPECT_EQ(p.D.cols(), 2);
    EXPECT_LT(p.split.star_residual, 1e-10);
  }
  const C1C2Report r = verify_C1C2(st);
  EXPECT_LT(r.max(), 1e-8);
  EXPECT_TRUE(st.frames_built);
}

TEST_F(PairTest, CorruptedIsometryFailsC1) {
  const auto f = quadric_graph((Mat(2, 2) << 1.0, 2.0, 0.5, -1.0).finished());
  const auto g = rigid_motion(f, rotation4(), (Vec(4) << 1.0, -2.0, 0.5, 3.0).finished());
  PairOptions bad = opt;
  bad.corrupt_isometry = 0.7;
  const PairPoint p = PairPipeline(f, g, bad).at(Vec::Zero(2));
  ASSERT_TRUE(p.error.empty()) << p.error;
  EXPECT_GT(std::max(p.c1_sff_residual, p.c1_parallel_residual), 1e-2);
}

TEST_F(PairTest, FlatPlaneAndCylinder) {
  const auto f = plane(3, 4);
  const auto g = cylinder(3, 1.0);
  const Grid grid(Vec::Constant(3, -0.2), Vec::Constant(3, 0.2), {3, 3, 3});
  const ConstructionState st = construct_TD(PairPipeline(f, g, opt), grid);
  EXPECT_EQ(st.branch, Branch::nondegenerate);
  ASSERT_EQ(st.regions.size(), 1u);
  const PairPoint& p = st.points[grid.center()];
  EXPECT_EQ(p.split.Omega.rank(), 0);
  EXPECT_EQ(p.split.GammaHat.rank(), 1);
  EXPECT_EQ(p.L.rank(), 0);
  ASSERT_EQ(p.D.cols(), 2);
  // D is spanned by the rulings d/dy_1, d/dy_2.
  EXPECT_LT(p.D.row(0).norm(), 1e-12);
  const DimensionBound b = check_dimension_bound(BoundKind::isometric_nondegenerate, 3, 1, 1, 0, 0, 0, 2);
  EXPECT_TRUE(b.holds);
  EXPECT_EQ(b.slack, 1);
}

TEST_F(PairTest, GeneratedPairIsDegenerate) {
  const GeneratedPair gp = generated_pair(1.0);
  const Grid grid((Vec(4) << 0.5, -0.2, -0.2, -0.2).finished(), (Vec(4) << 1.5, 0.2, 0.2, 0.2).finished(),
                  {3, 3, 1, 1});
  const PairPipeline pipe(gp.f, gp.f_hat, opt);
  const ConstructionState st = construct_TD(pipe, grid);
  EXPECT_EQ(st.branch, Branch::degenerate);
  EXPECT_EQ(st.branch_mismatches, 0);
  ASSERT_EQ(st.regions.size(), 1u);
  for (const PairPoint& p : st.points) {
    ASSERT_TRUE(p.error.empty()) << p.error;
    ASSERT_TRUE(p.claims.has_value());
    const ClaimReport& c = *p.claims;
    EXPECT_TRUE(p.degeneracy.normalized);
    EXPECT_NEAR(p.degeneracy.position_pairing, 1.0, 1e-12);
    EXPECT_TRUE(c.claim1);
    EXPECT_TRUE(c.claim2) << c.K_theta_residual;
    EXPECT_TRUE(c.claim3) << c.s1_span_residual;
    EXPECT_TRUE(c.claim4);
    EXPECT_TRUE(c.position_in_L) << c.position_residual;
    EXPECT_LT(c.th0_residual, 1e-6);
    EXPECT_LT(c.J_position_residual, 1e-8);
    EXPECT_LT(c.J_e0_residual, 1e-8);
    EXPECT_EQ(p.Theta.cols(), 3);
    EXPECT_EQ(p.S.rank(), 2);
    EXPECT_EQ(p.L.rank(), 2);
    EXPECT_EQ(p.D.cols(), 3);
    EXPECT_LT(std::abs(p.D.row(1).norm()), 1e-8);   // X2 = 0
  }
  EXPECT_LT(verify_C1C2(st).max(), 1e-6);
}

TEST_F(PairTest, DimensionBoundExamples) {
  EXPECT_EQ(check_dimension_bound(BoundKind::isometric_nondegenerate, 8, 2, 2, 0, 0, 1, 7).required, 7);
  EXPECT_EQ(check_dimension_bound(BoundKind::isometric_nondegenerate, 7, 2, 2, 0, 0, 0, 3).required, 3);
  EXPECT_EQ(check_dimension_bound(BoundKind::isometric_degenerate, 9, 1, 1, 0, 0, 2, 9).required, 9);
  EXPECT_FALSE(check_dimension_bound(BoundKind::isometric_nondegenerate, 8, 2, 2, 0, 0, 1, 6).holds);
  const DimensionBound ex = check_dimension_bound(BoundKind::isometric_nondegenerate, 14, 6, 6, 0, 0, 0, 1);
  EXPECT_TRUE(ex.exceptional);
  EXPECT_EQ(ex.required, 1);
  EXPECT_THROW(check_dimension_bound(BoundKind::isometric_nondegenerate, 4, 2, 2, 0, 0, 0, 0), HypothesisOutOfRange);
  EXPECT_THROW(check_dimension_bound(BoundKind::conformal, 6, 2, 2, 0, 0, 0, 0), HypothesisOutOfRange);
}

TEST_F(PairTest, SegmentationSplitsRankChanges) {
  const Grid grid(Vec::Zero(2), Vec::Ones(2), {3, 3});
  std::vector<std::array<int, 9>> ranks(9);
  for (std::size_t k = 0; k < 9; ++k) {
    ranks[k].fill(1);
    if (grid.multi_index(k)[0] == 2) ranks[k][7] = 0;
  }
  const auto regions = segment(grid, ranks);
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_EQ(regions[0].points.size(), 6u);
  EXPECT_EQ(regions[1].points.size(), 3u);
}

TEST_F(PairTest, SerialAndParallelAgree) {
  const auto f = plane(3, 4);
  const auto g = cylinder(3, 1.0);
  const Grid grid(Vec::Constant(3, -0.2), Vec::Constant(3, 0.2), {2, 2, 2});
  PairOptions par = opt;
  par.exec = Exec::parallel;
  const ConstructionState a = construct_TD(PairPipeline(f, g, opt), grid);
  const ConstructionState b = construct_TD(PairPipeline(f, g, par), grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_EQ(a.points[k].ranks(), b.points[k].ranks());
    EXPECT_EQ(a.points[k].D, b.points[k].D);
  }
}

} // namespace
} // namespace cdef
