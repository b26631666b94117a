#include "cdef/lightcone.hpp"

#include <algorithm>
#include <cmath>

#include "cdef/errors.hpp"

namespace cdef {

LightConeModel::LightConeModel(int N) : N_(N), ambient_(ScalarProduct::light_cone(N)) {}

Vec LightConeModel::psi(const Vec& x) const {
  if (x.size() != N_) throw DimensionMismatch("psi: point has wrong dimension");
  Vec g = Vec::Zero(N_ + 2);
  g(0) = -0.5 * x.squaredNorm();
  g(1) = 1.0;
  g.tail(N_) = x;
  return g;
}

Vec LightConeModel::dpsi(const Vec& x, const Vec& v) const {
  Vec g = Vec::Zero(N_ + 2);
  g(0) = -x.dot(v);
  g.tail(N_) = v;
  return g;
}

JetVec LightConeModel::psi(const JetVec& x) const {
  if (static_cast<int>(x.size()) != N_) throw DimensionMismatch("psi: point has wrong dimension");
  Jet r2 = x[0] * x[0];
  for (int i = 1; i < N_; ++i) r2 += x[i] * x[i];
  JetVec out;
  out.push_back(-0.5 * r2);
  out.push_back(Jet(x[0].vars(), x[0].order(), 1.0));
  for (const Jet& c : x) out.push_back(c);
  return out;
}

Vec LightConeModel::project(const Vec& g, double tau) const {
  const double s = e0_pairing(g);
  if (!(s > tau)) throw OnExceptionalRay("<g, e0> is not positive");
  return g.tail(N_) / s;
}

// --- I(f) -----------------------------------------------------------------

namespace {

// sum_i <d_i x, d_i x> as a jet of order (order of x) - 1.
Jet metric_trace(const JetVec& x, const ScalarProduct& G, int n) {
  const int m = static_cast<int>(x.size());
  Jet t(n, std::max(0, x.front().order() - 1), 0.0);
  for (int i = 0; i < n; ++i) {
    JetVec d;
    for (int a = 0; a < m; ++a) d.push_back(x[a].partial(i));
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        if (G.gram()(a, b) != 0.0) t += G.gram()(a, b) * (d[a] * d[b]);
  }
  return t;
}

Mat metric_value(const JetVec& x, const ScalarProduct& G, int n) {
  Mat d1(x.size(), n);
  for (std::size_t a = 0; a < x.size(); ++a)
    for (int i = 0; i < n; ++i) d1(a, i) = x[a].d(i);
  return d1.transpose() * G.gram() * d1;
}

} // namespace

IsometricRepresentative::IsometricRepresentative(ImmersionPtr f, ImmersionPtr base, double tol)
    : f_(std::move(f)), base_(std::move(base)), model_(f_->ambient().dim()), tol_(tol) {
  if (f_->ambient().index() != 0) throw DimensionMismatch("I(f) needs a Euclidean target");
  if (base_ && base_->dim() != f_->dim()) throw DimensionMismatch("base has a different chart dimension");
}

Jet IsometricRepresentative::conformal_factor(const Vec& u, int order) const {
  const int n = dim();
  const JetVec fj = f_->jets(u, order + 1);
  if (!base_) return Jet(n, order, 1.0);
  const JetVec bj = base_->jets(u, order + 1);
  const Mat gf = metric_value(fj, f_->ambient(), n);
  const Mat gb = metric_value(bj, base_->ambient(), n);
  const double phi2 = gf.trace() / gb.trace();
  if ((gf - phi2 * gb).norm() > tol_ * gf.norm())
    throw NotConformal("f is not conformal to the base metric at the point");
  return sqrt(metric_trace(fj, f_->ambient(), n) / metric_trace(bj, base_->ambient(), n));
}

JetVec IsometricRepresentative::jets(const Vec& u, int order) const {
  JetVec g = model_.psi(f_->jets(u, order));
  if (!base_) return g;
  const Jet inv = 1.0 / conformal_factor(u, order);
  for (auto& c : g) c = c * inv;
  return g;
}

ConeProjection::ConeProjection(ImmersionPtr g, double tau)
    : g_(std::move(g)), euclid_(ScalarProduct::euclidean(g_->ambient().dim() - 2)), tau_(tau) {
  if (!g_->ambient().light_cone_pair())
    throw DimensionMismatch("cone projection needs a light-cone ambient");
}

JetVec ConeProjection::jets(const Vec& u, int order) const {
  const JetVec g = g_->jets(u, order);
  if (!(g[1].value() > tau_)) throw OnExceptionalRay("<g, e0> is not positive at the point");
  const Jet inv = 1.0 / g[1];
  JetVec out;
  for (std::size_t a = 2; a < g.size(); ++a) out.push_back(g[a] * inv);
  return out;
}

ImmersionPtr psi_lift(const ImmersionPtr& f) {
  return std::make_shared<IsometricRepresentative>(f, nullptr);
}

ImmersionPtr isometric_representative(const ImmersionPtr& f, const ImmersionPtr& base) {
  return std::make_shared<IsometricRepresentative>(f, base);
}

ImmersionPtr cone_projection(const ImmersionPtr& g, double tau) {
  return std::make_shared<ConeProjection>(g, tau);
}

// --- Checks ---------------------------------------------------------------

PositionResidual position_identities(const ImmersionPtr& g, const Grid& grid, const Vec& witness,
                                     const Tolerance& tol, Exec exec) {
  const ScalarProduct& A = g->ambient();
  const Vec w = witness.size() ? witness : Vec(Vec::Unit(A.dim(), 0));
  std::vector<PositionResidual> per(grid.size());
  for_each_index(grid.size(), exec, [&](std::size_t k) {
    const PointJet pj = g->point(grid.point(k), 2);
    const double c = std::abs(A.norm2(pj.x));
    if (c > 1e-8 * std::max(1.0, pj.x.squaredNorm())) throw NotInCone("position vector is not null");
    const LocalGeometry geo = local_geometry(A, pj, tol);
    const Mat I = Mat::Identity(geo.n(), geo.n());
    per[k].cone = c;
    per[k].shape_plus_identity = (geo.shape_operator(pj.x) + I).cwiseAbs().maxCoeff();
    per[k].witness_shape = geo.shape_operator(w).cwiseAbs().maxCoeff();
  });
  PositionResidual out;
  for (const auto& p : per) {
    out.shape_plus_identity = std::max(out.shape_plus_identity, p.shape_plus_identity);
    out.witness_shape = std::max(out.witness_shape, p.witness_shape);
    out.cone = std::max(out.cone, p.cone);
  }
  return out;
}

namespace {

struct PhiDerivatives {
  double value;
  Vec grad;   // partials
  Mat hess;   // second partials
};

PhiDerivatives phi_derivatives(const IsometricRepresentative& rep, const Vec& u, HessianMode mode,
                               double h) {
  const int n = rep.dim();
  PhiDerivatives d{0.0, Vec::Zero(n), Mat::Zero(n, n)};
  if (mode == HessianMode::closed_form) {
    const Jet phi = 1.0 / rep.conformal_factor(u, 2);
    d.value = phi.value();
    for (int i = 0; i < n; ++i) {
      d.grad(i) = phi.d(i);
      for (int j = 0; j < n; ++j) d.hess(i, j) = phi.d(i, j);
    }
    return d;
  }
  auto value = [&](const Vec& p) { return Mat::Constant(1, 1, 1.0 / rep.conformal_factor(p, 0).value()); };
  d.value = value(u)(0, 0);
  for (int i = 0; i < n; ++i) {
    d.grad(i) = stencil_derivative(value, u, i, h)(0, 0);
    for (int j = 0; j <= i; ++j) {
      auto di = [&](const Vec& p) { return stencil_derivative(value, p, i, h); };
      d.hess(i, j) = d.hess(j, i) = stencil_derivative(di, u, j, h)(0, 0);
    }
  }
  return d;
}

} // namespace

SffTransferData sff_transfer_check(const ImmersionPtr& f, const ImmersionPtr& base,
                                   const DistributionFrame& Delta, HessianMode mode, double step,
                                   const Tolerance& tol, Exec exec) {
  const auto rep = std::make_shared<IsometricRepresentative>(f, base);
  const ImmersionPtr metric_source = base ? base : f;
  const LightConeModel& model = rep->model();
  const Grid& grid = Delta.grid;
  const int n = f->dim();
  const std::size_t N = grid.size();

  struct Point {
    double phi = 0, lambda = 0, sffs = 0, sffs3 = 0, etas = 0, spread = 0, ruled = 0;
    Vec xi, eta, eta_prime;
  };
  std::vector<Point> per(N);

  for_each_index(N, exec, [&](std::size_t k) {
    const Vec u = grid.point(k);
    Point& P = per[k];
    const LocalGeometry gp = local_geometry(model.ambient(), rep->point(u, 2), tol);   // f'
    const LocalGeometry gf = local_geometry(f->ambient(), f->point(u, 2), tol);        // f
    const PointJet pb = metric_source->point(u, 2);
    const Mat& gm = gp.metric;

    // Christoffel symbols of the base metric from the base immersion.
    const Mat gbm = pb.d1.transpose() * metric_source->ambient().gram() * pb.d1;
    const Mat gbi = gbm.inverse();
    std::vector<Vec> gamma(static_cast<std::size_t>(n * n));   // Gamma^m_ij as vectors in m
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        gamma[i * n + j] = gbi * (pb.d1.transpose() * metric_source->ambient().gram() * pb.second(i, j));

    // Here phi is the factor with <,>_{f'} = phi^2 <,>_f, so f' = phi Psi o f.
    const PhiDerivatives ph = phi_derivatives(*rep, u, mode, step);
    const double phi = ph.value;
    Mat hess(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) hess(i, j) = ph.hess(i, j) - gamma[i * n + j].dot(ph.grad);
    const Vec grad = gbi * ph.grad;
    const Vec x = gf.jet.x;
    const Vec fprime = gp.jet.x;
    P.xi = model.e(0) / phi - model.dpsi(x, gf.jet.d1 * grad);

    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Vec rhs = model.dpsi(x, phi * gf.alpha(i, j)) - gm(i, j) * P.xi + (hess(i, j) / phi) * fprime;
        P.sffs = std::max(P.sffs, (gp.alpha(i, j) - rhs).norm());
      }

    const Mat& D = Delta.basis[k];
    const int d = static_cast<int>(D.cols());
    P.eta_prime = leaf_mean_curvature(gp, D);
    P.eta = leaf_mean_curvature(gf, D);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const double gab = D.col(a).dot(gm * D.col(b));
        P.ruled = std::max(P.ruled, (gp.alpha.apply(D.col(a), D.col(b)) - gab * P.eta_prime).norm());
      }
    if (d > 0) {
      const Mat GD = D.transpose() * gm * D;
      const Mat HD = D.transpose() * hess * D;
      P.lambda = (GD.inverse() * HD).trace() / d;
      // Spread over basis directions and their pairwise sums.
      for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
          const Vec z = a == b ? Vec(D.col(a)) : Vec(D.col(a) + D.col(b));
          const double lz = z.dot(hess * z) / z.dot(gm * z);
          P.spread = std::max(P.spread, std::abs(lz - P.lambda));
        }
    }
    P.etas = (P.eta_prime - (model.dpsi(x, P.eta) - phi * P.xi + P.lambda * fprime) / phi).norm();
    const Mat& gfm = gf.metric;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Vec beta_p = gp.alpha(i, j) - gm(i, j) * P.eta_prime;
        const Vec beta_f = gf.alpha(i, j) - gfm(i, j) * P.eta;
        const Vec rhs = phi * model.dpsi(x, beta_f) + ((hess(i, j) - P.lambda * gm(i, j)) / phi) * fprime;
        P.sffs3 = std::max(P.sffs3, (beta_p - rhs).norm());
      }
    P.phi = phi;
  });

  SffTransferData out;
  for (const Point& P : per) {
    out.phi.push_back(P.phi);
    out.lambda.push_back(P.lambda);
    out.xi.push_back(P.xi);
    out.eta.push_back(P.eta);
    out.eta_prime.push_back(P.eta_prime);
    out.sffs_residual = std::max(out.sffs_residual, P.sffs);
    out.sffs3_residual = std::max(out.sffs3_residual, P.sffs3);
    out.etas_residual = std::max(out.etas_residual, P.etas);
    out.lambda_spread = std::max(out.lambda_spread, P.spread);
    out.ruled_residual = std::max(out.ruled_residual, P.ruled);
  }
  if (out.ruled_residual > 1e-6)
    throw NotConformallyRuled("alpha' on Delta x Delta is not a multiple of the metric (residual " +
                              std::to_string(out.ruled_residual) + ")");
  return out;
}

} // namespace cdef
