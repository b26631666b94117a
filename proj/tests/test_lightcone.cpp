#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cdef/errors.hpp"
#include "cdef/lightcone.hpp"

namespace cdef {
namespace {

ImmersionPtr cylinder2() {
  return std::make_shared<ClosedFormImmersion>(
      "cylinder", 2, ScalarProduct::euclidean(3),
      [](const JetVec& x) { return JetVec{cos(x[0]), sin(x[0]), x[1]}; });
}

ImmersionPtr inverted(const ImmersionPtr& f, const Vec& c) {
  const int m = f->ambient().dim();
  return std::make_shared<ComposedImmersion>(
      "inverted", [c, m](const JetVec& y) {
        Jet r2 = square(y[0] - c(0));
        for (int a = 1; a < m; ++a) r2 += square(y[a] - c(a));
        JetVec out;
        for (int a = 0; a < m; ++a) out.push_back(c(a) + (y[a] - c(a)) / r2);
        return out;
      },
      f->ambient(), f);
}

struct LightConeTest : ::testing::Test {
  LightConeModel model{4};
  Grid grid{(Vec(2) << 0.2, -0.4).finished(), (Vec(2) << 1.0, 0.4).finished(), {3, 3}};
};

TEST_F(LightConeTest, PsiExamples) {
  EXPECT_EQ(model.psi(Vec::Zero(4)), model.e(1));
  const Vec g = model.psi(Vec::Unit(4, 0));
  EXPECT_EQ(g, (-0.5 * model.e(0) + model.e(1) + model.e(2)).eval());
}

TEST_F(LightConeTest, PsiIdentitiesOnRandomPoints) {
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  const ScalarProduct& L = model.ambient();
  for (int t = 0; t < 200; ++t) {
    Vec x(4), y(4), v(4), w(4);
    for (int i = 0; i < 4; ++i) x(i) = nd(rng), y(i) = nd(rng), v(i) = nd(rng), w(i) = nd(rng);
    EXPECT_NEAR(L.norm2(model.psi(x)), 0.0, 1e-12);
    EXPECT_NEAR(L(model.psi(x), model.e(0)), 1.0, 1e-12);
    EXPECT_NEAR(L(model.dpsi(x, v), model.dpsi(x, w)), v.dot(w), 1e-12);
    EXPECT_NEAR(L(model.psi(x), model.psi(y)), -0.5 * (x - y).squaredNorm(), 1e-12);
  }
}

TEST_F(LightConeTest, DoubledIdentityRepresentative) {
  auto base = std::make_shared<ClosedFormImmersion>("id", 2, ScalarProduct::euclidean(2),
                                                    [](const JetVec& x) { return x; });
  auto twice = std::make_shared<ClosedFormImmersion>(
      "2id", 2, ScalarProduct::euclidean(2),
      [](const JetVec& x) { return JetVec{2.0 * x[0], 2.0 * x[1]}; });
  const auto rep = isometric_representative(twice, base);
  const LightConeModel m2(2);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec u = grid.point(k);
    const PointJet p = rep->point(u, 2);
    EXPECT_LT((p.x - 0.5 * m2.psi(2.0 * u)).norm(), 1e-14);
    EXPECT_LT((p.d1.transpose() * m2.ambient().gram() * p.d1 - Mat::Identity(2, 2)).norm(), 1e-10);
    EXPECT_NEAR(LightConeModel::e0_pairing(p.x), 0.5, 1e-14);
  }
}

TEST_F(LightConeTest, InversionRoundTrip) {
  const Vec c = (Vec(3) << 0.2, 0.1, 3.0).finished();
  const auto f = inverted(cylinder2(), c);
  const auto rep = isometric_representative(f, cylinder2());
  const auto back = cone_projection(rep);
  const auto rep_self = isometric_representative(back, nullptr);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec u = grid.point(k);
    const PointJet a = f->point(u, 2), b = back->point(u, 2);
    EXPECT_LT((a.x - b.x).norm(), 1e-12);
    EXPECT_LT((a.d1 - b.d1).norm(), 1e-11);
    EXPECT_LT((a.second(0, 1) - b.second(0, 1)).norm(), 1e-10);
    const PointJet r = rep->point(u, 1);
    const Mat gr = r.d1.transpose() * rep->ambient().gram() * r.d1;
    const PointJet cyl = cylinder2()->point(u, 1);
    EXPECT_LT((gr - cyl.d1.transpose() * cyl.d1).norm(), 1e-10);
    // <I(f), e0> = 1/phi and phi = 1/|y - c|^2 for the inversion.
    const double phi = 1.0 / (cyl.x - c).squaredNorm();
    EXPECT_NEAR(LightConeModel::e0_pairing(r.x), 1.0 / phi, 1e-10);
    // Conformality of C(g) and g with factor <g,e0>^{-1}.
    const Mat gb = b.d1.transpose() * b.d1;
    const double s = LightConeModel::e0_pairing(r.x);
    EXPECT_LT((gb - gr / (s * s)).norm(), 1e-8);
    (void)rep_self;
  }
}

TEST_F(LightConeTest, ScaledConeImmersionProjects) {
  const auto lift = psi_lift(cylinder2());
  auto scaled = std::make_shared<ComposedImmersion>(
      "scaled", [](const JetVec& g) {
        JetVec out;
        for (const Jet& c : g) out.push_back(2.5 * c);
        return out;
      },
      lift->ambient(), lift);
  const auto back = cone_projection(scaled);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec u = grid.point(k);
    EXPECT_LT((back->position(u) - cylinder2()->position(u)).norm(), 1e-14);
  }
  auto on_ray = std::make_shared<ClosedFormImmersion>(
      "ray", 1, ScalarProduct::light_cone(1), [](const JetVec& x) {
        return JetVec{1.0 + 0.0 * x[0], 0.0 * x[0], 0.0 * x[0]};
      });
  EXPECT_THROW(cone_projection(on_ray)->position(Vec::Zero(1)), OnExceptionalRay);
}

TEST_F(LightConeTest, PositionIdentities) {
  auto id = std::make_shared<ClosedFormImmersion>("id", 2, ScalarProduct::euclidean(2),
                                                  [](const JetVec& x) { return x; });
  const auto a = position_identities(psi_lift(id), grid);
  EXPECT_LT(a.shape_plus_identity, 1e-10);
  EXPECT_LT(a.witness_shape, 1e-10);
  auto sphere = std::make_shared<ClosedFormImmersion>(
      "sphere", 2, ScalarProduct::euclidean(3), [](const JetVec& x) {
        return JetVec{sin(x[0]) * cos(x[1]), sin(x[0]) * sin(x[1]), cos(x[0])};
      });
  const auto b = position_identities(psi_lift(sphere), grid);
  EXPECT_LT(b.shape_plus_identity, 1e-8);
  EXPECT_LT(b.witness_shape, 1e-8);
  auto off_cone = std::make_shared<ClosedFormImmersion>(
      "off", 2, ScalarProduct::light_cone(2),
      [](const JetVec& x) { return JetVec{x[0], 1.0 + 0.0 * x[0], x[0], x[1]}; });
  EXPECT_THROW(position_identities(off_cone, grid), NotInCone);
}

TEST_F(LightConeTest, SffTransferIsometric) {
  const auto D = DistributionFrame::build(grid, [](const Vec&) { return Mat(Vec::Unit(2, 1)); });
  const auto t = sff_transfer_check(cylinder2(), nullptr, D);
  EXPECT_LT(t.sffs_residual, 1e-8);
  EXPECT_LT(t.sffs3_residual, 1e-8);
  for (const Vec& xi : t.xi) EXPECT_LT((xi - Vec::Unit(5, 0)).norm(), 1e-12);
}

TEST_F(LightConeTest, SffTransferCylinderWithInversion) {
  const Vec c = (Vec(3) << 0.2, 0.1, 3.0).finished();
  const auto f = inverted(cylinder2(), c);
  const auto D = DistributionFrame::build(grid, [](const Vec&) { return Mat(Vec::Unit(2, 1)); });
  const auto closed = sff_transfer_check(f, cylinder2(), D, HessianMode::closed_form);
  EXPECT_LT(closed.sffs_residual, 1e-7);
  EXPECT_LT(closed.sffs3_residual, 1e-7);
  EXPECT_LT(closed.lambda_spread, 1e-6);
  const auto fd = sff_transfer_check(f, cylinder2(), D, HessianMode::finite_difference);
  EXPECT_LT(fd.sffs_residual, 1e-5);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    // lambda = Hess phi(Z,Z) for the unit ruling Z = d/dy, where now
    // phi = |y - c|^2 since f' = phi Psi o f.
    const Vec u = grid.point(k);
    const double h = 1e-4;
    auto phi = [&](double y) {
      const Vec p = cylinder2()->position((Vec(2) << u(0), y).finished());
      return (p - c).squaredNorm();
    };
    const double second = (phi(u(1) + h) - 2 * phi(u(1)) + phi(u(1) - h)) / (h * h);
    EXPECT_NEAR(closed.lambda[k], second, 1e-5);
    EXPECT_NEAR(closed.phi[k], phi(u(1)), 1e-12);
  }
}

TEST_F(LightConeTest, NotConformallyRuledRaised) {
  auto sphere = std::make_shared<ClosedFormImmersion>(
      "torus", 2, ScalarProduct::euclidean(3), [](const JetVec& x) {
        const Jet rho = 2.0 + cos(x[1]);
        return JetVec{rho * cos(x[0]), rho * sin(x[0]), sin(x[1])};
      });
  // Both coordinate directions together: principal curvatures differ.
  const auto D = DistributionFrame::build(grid, [](const Vec&) { return Mat(Mat::Identity(2, 2)); });
  EXPECT_THROW(sff_transfer_check(sphere, nullptr, D), NotConformallyRuled);
}

} // namespace
} // namespace cdef
