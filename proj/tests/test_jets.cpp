#include <gtest/gtest.h>

#include <cmath>

#include "cdef/errors.hpp"
#include "cdef/jets.hpp"

namespace cdef {
namespace {

ImmersionPtr sphere_polar(double radius) {
  // (theta, phi) -> radius * (sin t cos p, sin t sin p, cos t)
  return std::make_shared<ClosedFormImmersion>(
      "sphere", 2, ScalarProduct::euclidean(3), [radius](const JetVec& x) {
        return JetVec{radius * sin(x[0]) * cos(x[1]), radius * sin(x[0]) * sin(x[1]),
                      radius * cos(x[0])};
      });
}

ImmersionPtr unit_sphere_graph(int n) {
  // Upper hemisphere over the unit ball, as a graph.
  return std::make_shared<ClosedFormImmersion>(
      "hemisphere", n, ScalarProduct::euclidean(n + 1), [n](const JetVec& x) {
        JetVec out(x.begin(), x.end());
        Jet r2 = x[0] * x[0];
        for (int i = 1; i < n; ++i) r2 += x[i] * x[i];
        out.push_back(sqrt(1.0 - r2));
        return out;
      });
}

ImmersionPtr cylinder(int n) {
  // (s, y_1..y_{n-1}) -> (cos s, sin s, y)
  return std::make_shared<ClosedFormImmersion>(
      "cylinder", n, ScalarProduct::euclidean(n + 1), [](const JetVec& x) {
        JetVec out{cos(x[0]), sin(x[0])};
        for (std::size_t i = 1; i < x.size(); ++i) out.push_back(x[i]);
        return out;
      });
}

ImmersionPtr torus(double R, double r) {
  return std::make_shared<ClosedFormImmersion>(
      "torus", 2, ScalarProduct::euclidean(3), [R, r](const JetVec& x) {
        const Jet rho = R + r * cos(x[1]);
        return JetVec{rho * cos(x[0]), rho * sin(x[0]), r * sin(x[1])};
      });
}

struct JetsTest : ::testing::Test {
  Grid small2 = Grid((Vec(2) << 0.4, 0.2).finished(), (Vec(2) << 1.2, 1.0).finished(), {4, 4});
  CalculusOptions serial{Tolerance{}, 2e-3, Exec::serial};
};

TEST_F(JetsTest, GridIndexing) {
  const Grid g((Vec(3) << 0, 0, 0).finished(), (Vec(3) << 1, 2, 3).finished(), {2, 3, 4});
  EXPECT_EQ(g.size(), 24u);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(g.flat(g.multi_index(k)), k);
  EXPECT_EQ(g.nearest(g.point(17)), 17u);
  EXPECT_DOUBLE_EQ(g.spacing(2), 1.0);
}

TEST_F(JetsTest, PlaneMetricIsIdentity) {
  auto plane = std::make_shared<ClosedFormImmersion>(
      "plane", 2, ScalarProduct::euclidean(3),
      [](const JetVec& x) { return JetVec{x[0], x[1], Jet(2, x[0].order(), 0.0)}; });
  for (const Mat& g : induced_metric(sample(plane, small2)))
    EXPECT_LT((g - Mat::Identity(2, 2)).norm(), 1e-14);
  const FundamentalData fd = fundamental_data(sample(plane, small2), serial);
  for (std::size_t k = 0; k < fd.alpha.size(); ++k) {
    EXPECT_LT(fd.alpha[k][0].norm(), 1e-14);
    EXPECT_LT(fd.normal_connection[k][0].norm(), 1e-10);
  }
}

TEST_F(JetsTest, SphereRadiusTwoMetric) {
  const auto j = sample(sphere_polar(2.0), small2);
  const auto g = induced_metric(j);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = j.grid.point(k)(0);
    EXPECT_NEAR(g[k](0, 0), 4.0, 1e-12);
    EXPECT_NEAR(g[k](1, 1), 4.0 * std::sin(t) * std::sin(t), 1e-12);
    EXPECT_NEAR(g[k](0, 1), 0.0, 1e-12);
  }
}

TEST_F(JetsTest, UnitSphereUmbilic) {
  const Grid g((Vec(3) << -0.3, -0.3, -0.3).finished(), (Vec(3) << 0.3, 0.3, 0.3).finished(), {3, 3, 3});
  const auto j = sample(unit_sphere_graph(3), g);
  const FundamentalData fd = fundamental_data(j, serial);
  for (std::size_t k = 0; k < g.size(); ++k) {
    // alpha(X,Y) = -<X,Y> nu with the outward normal nu = f.
    const Vec nu = j.points[k].x;
    const double s = nu.dot(fd.normal_frame[k].col(0));
    EXPECT_NEAR(std::abs(s), 1.0, 1e-10);
    EXPECT_LT((fd.shape_operators[k][0] * s + Mat::Identity(3, 3)).norm(), 1e-9);
  }
  EXPECT_LT(fd.symmetry_residual, 1e-12);
  EXPECT_LT(fd.shape_residual, 1e-10);
}

TEST_F(JetsTest, CylinderPrincipalCurvatures) {
  const Grid g((Vec(3) << 0.1, -0.5, -0.5).finished(), (Vec(3) << 1.1, 0.5, 0.5).finished(), {3, 2, 2});
  const auto j = sample(cylinder(3), g);
  const FundamentalData fd = fundamental_data(j, serial);
  for (std::size_t k = 0; k < g.size(); ++k) {
    Vec outward = Vec::Zero(4);
    outward.head(2) = j.points[k].x.head(2);
    const double s = outward.dot(fd.normal_frame[k].col(0));
    Eigen::EigenSolver<Mat> es(fd.shape_operators[k][0] * s);
    std::vector<double> ev;
    for (int i = 0; i < 3; ++i) ev.push_back(es.eigenvalues()(i).real());
    std::sort(ev.begin(), ev.end());
    EXPECT_NEAR(ev[0], -1.0, 1e-10);
    EXPECT_NEAR(ev[1], 0.0, 1e-10);
    EXPECT_NEAR(ev[2], 0.0, 1e-10);
  }
}

TEST_F(JetsTest, NormalConnectionOfCurveInSpace) {
  // Helix (cos t, sin t, b t): the principal normal N satisfies
  // nabla^perp_t N = tau |gamma'| B with tau = b / (1 + b^2).
  const double b = 0.5;
  auto helix = std::make_shared<ClosedFormImmersion>(
      "helix", 1, ScalarProduct::euclidean(3),
      [b](const JetVec& x) { return JetVec{cos(x[0]), sin(x[0]), b * x[0]}; });
  const Grid g((Vec(1) << 0.0).finished(), (Vec(1) << 1.0).finished(), {5});
  const FundamentalData fd = fundamental_data(sample(helix, g), serial);
  EXPECT_LT(fd.compatibility_residual, 1e-9);
  const NormalFrameField frame(helix, g.point(g.center()));
  const double speed = std::sqrt(1.0 + b * b), tau = b / (1.0 + b * b);
  auto N = [](double t) { return Vec((Vec(3) << -std::cos(t), -std::sin(t), 0.0).finished()); };
  auto coeff = [&](const Vec& u) {
    const Mat xi = frame.at(u);
    return Mat(frame.signs().asDiagonal() * (xi.transpose() * N(u(0))));
  };
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec u = g.point(k);
    const double t = u(0);
    const Vec dc = stencil_derivative(coeff, u, 0, 2e-3);
    const Vec cov = fd.normal_frame[k] * (dc + fd.normal_connection[k][0] * coeff(u));
    const Eigen::Vector3d T = Eigen::Vector3d(-std::sin(t), std::cos(t), b) / speed;
    const Vec B = T.cross(Eigen::Vector3d(N(t)));
    EXPECT_LT((cov - tau * speed * B).norm(), 1e-9);
  }
}

TEST_F(JetsTest, FiniteDifferenceAgreesWithClosedForm) {
  auto f = torus(2.0, 0.7);
  auto fdiff = std::make_shared<FiniteDifferenceImmersion>(f, 1e-2);
  const FundamentalData a = fundamental_data(sample(f, small2), serial);
  const FundamentalData b = fundamental_data(sample(fdiff, small2), serial);
  for (std::size_t k = 0; k < a.metric.size(); ++k) {
    EXPECT_LT((a.metric[k] - b.metric[k]).norm(), 1e-4);
    EXPECT_LT((a.normal_frame[k] - b.normal_frame[k]).norm(), 1e-4);
    EXPECT_LT((a.alpha[k][0] - b.alpha[k][0]).norm(), 1e-4);
    EXPECT_LT((a.shape_operators[k][0] - b.shape_operators[k][0]).norm(), 1e-4);
  }
}

TEST_F(JetsTest, SerialAndParallelAgree) {
  auto f = torus(2.0, 0.7);
  const auto j = sample(f, small2, 3, Exec::parallel);
  const auto js = sample(f, small2, 3, Exec::serial);
  CalculusOptions par = serial;
  par.exec = Exec::parallel;
  const FundamentalData a = fundamental_data(js, serial);
  const FundamentalData b = fundamental_data(j, par);
  for (std::size_t k = 0; k < a.metric.size(); ++k) {
    EXPECT_EQ(a.normal_frame[k], b.normal_frame[k]);
    EXPECT_EQ(a.shape_operators[k][0], b.shape_operators[k][0]);
    EXPECT_EQ(a.normal_connection[k][1], b.normal_connection[k][1]);
  }
}

TEST_F(JetsTest, ConformalFactors) {
  auto f = torus(2.0, 0.7);
  auto scaled = std::make_shared<ClosedFormImmersion>(
      "scaled", 2, ScalarProduct::euclidean(3), [f](const JetVec& x) {
        JetVec y = std::static_pointer_cast<const ClosedFormImmersion>(f)->map()(x);
        for (auto& c : y) c *= 3.0;
        return y;
      });
  const Vec c = (Vec(3) << 0.3, -0.2, 2.5).finished();
  auto inverted = std::make_shared<ClosedFormImmersion>(
      "inverted", 2, ScalarProduct::euclidean(3), [f, c](const JetVec& x) {
        JetVec y = std::static_pointer_cast<const ClosedFormImmersion>(f)->map()(x);
        Jet r2 = square(y[0] - c(0)) + square(y[1] - c(1)) + square(y[2] - c(2));
        JetVec out;
        for (int a = 0; a < 3; ++a) out.push_back(c(a) + (y[a] - c(a)) / r2);
        return out;
      });
  const auto jf = sample(f, small2);
  const auto one = conformal_factor(jf, jf);
  for (double p : one.phi) EXPECT_NEAR(p, 1.0, 1e-14);
  const auto three = conformal_factor(jf, sample(scaled, small2));
  for (double p : three.phi) EXPECT_NEAR(p, 3.0, 1e-12);
  const auto inv = conformal_factor(jf, sample(inverted, small2));
  for (std::size_t k = 0; k < inv.phi.size(); ++k)
    EXPECT_NEAR(inv.phi[k], 1.0 / (jf.points[k].x - c).squaredNorm(), 1e-12);
  EXPECT_THROW(conformal_factor(jf, sample(sphere_polar(1.0), small2)), NotConformal);
}

TEST_F(JetsTest, LeafMeanCurvature) {
  auto f = torus(2.0, 0.7);
  const auto j = sample(f, small2);
  const auto D = DistributionFrame::build(small2, [](const Vec&) { return Mat(Vec::Unit(2, 0)); });
  const auto eta = leaf_mean_curvature(j, D);
  for (std::size_t k = 0; k < eta.size(); ++k) {
    const Vec u = small2.point(k);
    const double rho = 2.0 + 0.7 * std::cos(u(1));
    const Vec N = (Vec(3) << std::cos(u(1)) * std::cos(u(0)), std::cos(u(1)) * std::sin(u(0)),
                   std::sin(u(1))).finished();
    EXPECT_LT((eta[k] + std::cos(u(1)) / rho * N).norm(), 1e-12);
  }
  // Rulings of a cylinder are straight.
  const Grid g((Vec(2) << 0.0, 0.0).finished(), (Vec(2) << 1.0, 1.0).finished(), {3, 3});
  const auto ruled = DistributionFrame::build(g, [](const Vec&) { return Mat(Vec::Unit(2, 1)); });
  for (const Vec& e : leaf_mean_curvature(sample(cylinder(2), g), ruled)) EXPECT_LT(e.norm(), 1e-14);
}

TEST_F(JetsTest, BracketResiduals) {
  const Grid g((Vec(3) << -0.5, -0.5, -0.5).finished(), (Vec(3) << 0.5, 0.5, 0.5).finished(), {3, 3, 3});
  const auto coord = DistributionFrame::build(g, [](const Vec&) {
    Mat b = Mat::Zero(3, 2);
    b(0, 0) = b(1, 1) = 1;
    return b;
  });
  for (double r : coord.integrability_residual) EXPECT_LT(r, 1e-10);
  const auto rotated = DistributionFrame::build(g, [](const Vec& u) {
    // A rotating frame of the same coordinate plane.
    Mat b = Mat::Zero(3, 2);
    b(0, 0) = std::cos(u(2) + u(0));
    b(1, 0) = std::sin(u(2) + u(0));
    b(0, 1) = -std::sin(u(2) + u(0));
    b(1, 1) = std::cos(u(2) + u(0));
    return b;
  });
  for (double r : rotated.integrability_residual) EXPECT_LT(r, 1e-9);
  auto contact = [](const Vec& u) {
    Mat b = Mat::Zero(3, 2);
    b(1, 0) = 1;
    b(0, 1) = 1;
    b(2, 1) = u(1);
    return b;
  };
  const auto c = DistributionFrame::build(g, contact);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double y = g.point(k)(1);
    // [X1, X2] = d/dz; for the orthonormalised frame its part outside D
    // scales by 1/|X2|, giving 1/(1+y^2).
    EXPECT_NEAR(c.integrability_residual[k], 1.0 / (1.0 + y * y), 1e-8);
  }
  // Grid-difference variant: coarse, but still separates the two cases.
  const Grid fine((Vec(3) << -0.5, -0.5, -0.5).finished(), (Vec(3) << 0.5, 0.5, 0.5).finished(), {9, 9, 9});
  std::vector<Mat> bases;
  for (std::size_t k = 0; k < fine.size(); ++k) bases.push_back(contact(fine.point(k)));
  const auto sampled = DistributionFrame::from_samples(fine, bases);
  EXPECT_GT(*std::min_element(sampled.integrability_residual.begin(), sampled.integrability_residual.end()), 0.5);
}

TEST_F(JetsTest, RankJumpDetected) {
  const Grid g((Vec(1) << -1.0).finished(), (Vec(1) << 1.0).finished(), {3});
  EXPECT_THROW(DistributionFrame::build(g, [](const Vec& u) { return Mat::Constant(1, 1, u(0)); }),
               RankJump);
}

TEST_F(JetsTest, GaussEquation) {
  const Vec u = (Vec(2) << 0.7, 0.4).finished();
  EXPECT_LT(gauss_residual(*torus(2.0, 0.7), u), 1e-10);
  EXPECT_LT(gauss_residual(*sphere_polar(1.5), u), 1e-10);
  auto plane = std::make_shared<ClosedFormImmersion>(
      "plane", 2, ScalarProduct::euclidean(3),
      [](const JetVec& x) { return JetVec{x[0], x[1], 0.0 * x[0]}; });
  EXPECT_LT(gauss_residual(*plane, u), 1e-14);
}

TEST_F(JetsTest, NotImmersionRaised) {
  auto folded = std::make_shared<ClosedFormImmersion>(
      "fold", 2, ScalarProduct::euclidean(3),
      [](const JetVec& x) { return JetVec{x[0] * x[0], x[1], 0.0 * x[0]}; });
  const Grid g((Vec(2) << 0.0, 0.0).finished(), (Vec(2) << 0.0, 1.0).finished(), {1, 2});
  EXPECT_THROW(induced_metric(sample(folded, g)), NotImmersion);
}

} // namespace
} // namespace cdef
