#include "cdef/jets.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "cdef/errors.hpp"

namespace cdef {

// --- Grid -----------------------------------------------------------------

Grid::Grid(Vec lo_, Vec hi_, std::vector<int> counts_)
    : lo(std::move(lo_)), hi(std::move(hi_)), counts(std::move(counts_)) {
  if (lo.size() != hi.size() || lo.size() != static_cast<Eigen::Index>(counts.size()))
    throw DimensionMismatch("grid bounds and counts disagree in dimension");
  for (int c : counts)
    if (c < 1) throw DimensionMismatch("grid axis with no samples");
}

std::size_t Grid::size() const {
  std::size_t s = 1;
  for (int c : counts) s *= static_cast<std::size_t>(c);
  return s;
}

std::vector<int> Grid::multi_index(std::size_t flat) const {
  std::vector<int> m(counts.size());
  for (int i = dim() - 1; i >= 0; --i) {
    m[i] = static_cast<int>(flat % counts[i]);
    flat /= counts[i];
  }
  return m;
}

std::size_t Grid::flat(const std::vector<int>& m) const {
  std::size_t f = 0;
  for (int i = 0; i < dim(); ++i) f = f * counts[i] + m[i];
  return f;
}

double Grid::spacing(int axis) const {
  return counts[axis] > 1 ? (hi(axis) - lo(axis)) / (counts[axis] - 1) : 0.0;
}

Vec Grid::point(std::size_t f) const {
  const auto m = multi_index(f);
  Vec u(dim());
  for (int i = 0; i < dim(); ++i)
    u(i) = counts[i] > 1 ? lo(i) + spacing(i) * m[i] : 0.5 * (lo(i) + hi(i));
  return u;
}

std::vector<std::size_t> Grid::neighbors(std::size_t f) const {
  const auto m = multi_index(f);
  std::vector<std::size_t> out;
  for (int i = 0; i < dim(); ++i)
    for (int s : {-1, 1}) {
      auto q = m;
      q[i] += s;
      if (q[i] >= 0 && q[i] < counts[i]) out.push_back(flat(q));
    }
  return out;
}

std::size_t Grid::center() const {
  std::vector<int> m(counts.size());
  for (int i = 0; i < dim(); ++i) m[i] = counts[i] / 2;
  return flat(m);
}

std::size_t Grid::nearest(const Vec& u) const {
  std::vector<int> m(counts.size());
  for (int i = 0; i < dim(); ++i) {
    const double h = spacing(i);
    const int k = h > 0 ? static_cast<int>(std::lround((u(i) - lo(i)) / h)) : 0;
    m[i] = std::clamp(k, 0, counts[i] - 1);
  }
  return flat(m);
}

// --- Sampling -------------------------------------------------------------

ImmersionJet sample(const ImmersionPtr& f, const Grid& grid, int order, Exec exec) {
  if (grid.dim() != f->dim()) throw DimensionMismatch("grid dimension differs from chart dimension");
  ImmersionJet j;
  j.grid = grid;
  j.ambient = f->ambient();
  j.immersion = f;
  j.source = dynamic_cast<const FiniteDifferenceImmersion*>(f.get()) ? JetSource::finite_difference
                                                                     : JetSource::closed_form;
  j.points.resize(grid.size());
  for_each_index(grid.size(), exec, [&](std::size_t k) { j.points[k] = f->point(grid.point(k), order); });
  return j;
}

SampledImmersion::SampledImmersion(ImmersionJet jets) : jets_(std::move(jets)) {}

JetVec SampledImmersion::jets(const Vec& u, int order) const {
  const std::size_t k = jets_.grid.nearest(u);
  return taylor_expand(jets_.points[k], jets_.grid.point(k), u, order);
}

// --- Pointwise geometry ----------------------------------------------------

Mat LocalGeometry::shape_operator(const Vec& xi) const {
  const int d = n();
  Mat H(d, d);
  const Vec gx = ambient.gram() * xi;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) H(i, j) = alpha(i, j).dot(gx);
  return metric_inv * H;
}

LocalGeometry local_geometry(const ScalarProduct& ambient, const PointJet& jet, const Tolerance& tol) {
  LocalGeometry g;
  g.jet = jet;
  g.ambient = ambient;
  const int n = jet.n(), m = jet.m();
  if (m != ambient.dim()) throw DimensionMismatch("jet does not live in the ambient space");
  if (numerical_rank(jet.d1, tol) < n) throw NotImmersion("differential has rank below n");
  g.metric = jet.d1.transpose() * ambient.gram() * jet.d1;
  const Signature s = signature_of(g.metric, std::max(tol.rank, tol.absolute) *
                                                 std::max(1.0, g.metric.cwiseAbs().maxCoeff()));
  if (!s.nondegenerate()) throw NotImmersion("induced metric is degenerate");
  g.metric_inv = g.metric.inverse();
  g.tangent_projector = jet.d1 * g.metric_inv * jet.d1.transpose() * ambient.gram();
  g.normal_projector = Mat::Identity(m, m) - g.tangent_projector;
  const Mat normal_basis = kernel(jet.d1.transpose() * ambient.gram(), m, tol);
  g.normal = Subspace(ambient, normal_basis, tol);
  g.alpha = BilinearSample(n, n, ambient, true);
  g.alpha.left = ScalarProduct(g.metric);
  if (!jet.d2.empty())
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g.alpha(i, j) = g.normal_projector * jet.second(i, j);
  return g;
}

std::vector<Mat> induced_metric(const ImmersionJet& j, const Tolerance& tol, Exec exec) {
  std::vector<Mat> out(j.points.size());
  for_each_index(j.points.size(), exec, [&](std::size_t k) {
    out[k] = local_geometry(j.ambient, j.points[k], tol).metric;
  });
  return out;
}

Mat pseudo_orthonormal_basis(const Subspace& U, Vec* signs) {
  if (U.rank() == 0) {
    if (signs) signs->resize(0);
    return Mat::Zero(U.ambient_dim(), 0);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(U.gram());
  const Vec& ev = es.eigenvalues();
  const double thr = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  Mat out = U.basis() * es.eigenvectors();
  Vec s(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) <= thr) throw DegenerateSubspace("no orthonormal basis of a degenerate subspace");
    out.col(i) /= std::sqrt(std::abs(ev(i)));
    s(i) = ev(i) > 0 ? 1.0 : -1.0;
  }
  if (signs) *signs = s;
  return out;
}

Mat polar_orthonormalize(const ScalarProduct& ambient, const Mat& Y, const Vec& signs) {
  const int p = static_cast<int>(Y.cols());
  if (p == 0) return Y;
  const Mat C = Y.transpose() * ambient.gram() * Y;
  const Mat A = signs.asDiagonal() * C;
  Eigen::EigenSolver<Mat> es(A, false);
  for (int i = 0; i < p; ++i) {
    const auto ev = es.eigenvalues()(i);
    if (ev.real() < 0.05 || std::abs(ev.imag()) > 0.5 * ev.real())
      throw FrameAlignmentFailure("normal space rotated too far from the seed frame");
  }
  // Denman-Beavers iteration for A^{-1/2}; M^T C M = diag(signs).
  Mat Yk = A, Zk = Mat::Identity(p, p);
  for (int it = 0; it < 60; ++it) {
    const Mat Yi = Yk.inverse(), Zi = Zk.inverse();
    const Mat Yn = 0.5 * (Yk + Zi);
    Zk = 0.5 * (Zk + Yi);
    const double change = (Yn - Yk).norm();
    Yk = Yn;
    if (change <= 1e-15 * std::max(1.0, Yk.norm())) break;
  }
  return Y * Zk;
}

NormalFrameField::NormalFrameField(ImmersionPtr f, const Vec& seed_point, const Tolerance& tol)
    : f_(std::move(f)), tol_(tol) {
  const LocalGeometry g = local_geometry(f_->ambient(), f_->point(seed_point, 1), tol_);
  seed_ = pseudo_orthonormal_basis(g.normal, &signs_);
}

Mat NormalFrameField::at(const LocalGeometry& g) const {
  return polar_orthonormalize(f_->ambient(), g.normal_projector * seed_, signs_);
}

Mat NormalFrameField::at(const Vec& u) const {
  return at(local_geometry(f_->ambient(), f_->point(u, 1), tol_));
}

std::vector<Mat> normal_connection(const NormalFrameField& frame, const Vec& u, double step) {
  const Mat xi = frame.at(u);
  const Mat& G = frame.immersion().ambient().gram();
  std::vector<Mat> out;
  for (int i = 0; i < u.size(); ++i) {
    const Mat dxi = stencil_derivative([&](const Vec& p) { return frame.at(p); }, u, i, step);
    out.push_back(frame.signs().asDiagonal() * (xi.transpose() * G * dxi));
  }
  return out;
}

FundamentalData fundamental_data(const ImmersionJet& j, const CalculusOptions& opt) {
  ImmersionPtr f = j.immersion ? j.immersion : std::make_shared<SampledImmersion>(j);
  const std::size_t N = j.points.size();
  const NormalFrameField frame(f, j.grid.point(j.grid.center()), opt.tol);
  const int n = j.n(), p = frame.codim();
  FundamentalData fd;
  fd.signs = frame.signs();
  fd.metric.resize(N);
  fd.normal_frame.resize(N);
  fd.alpha.resize(N);
  fd.normal_connection.resize(N);
  fd.shape_operators.resize(N);
  std::vector<double> sym(N, 0.0), compat(N, 0.0), shape(N, 0.0);
  for_each_index(N, opt.exec, [&](std::size_t k) {
    const Vec u = j.grid.point(k);
    const PointJet& pj = j.points[k].d2.empty() ? f->point(u, 2) : j.points[k];
    const LocalGeometry g = local_geometry(j.ambient, pj, opt.tol);
    const Mat xi = frame.at(g);
    fd.metric[k] = g.metric;
    fd.normal_frame[k] = xi;
    const Mat Gxi = j.ambient.gram() * xi;
    for (int a = 0; a < p; ++a) {
      Mat H(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) H(r, c) = g.alpha(r, c).dot(Gxi.col(a));
      sym[k] = std::max(sym[k], (H - H.transpose()).cwiseAbs().maxCoeff());
      fd.alpha[k].push_back(H);
      const Mat A = g.shape_operator(xi.col(a));
      shape[k] = std::max(shape[k], (g.metric * A - H).cwiseAbs().maxCoeff());
      fd.shape_operators[k].push_back(A);
    }
    fd.normal_connection[k] = normal_connection(frame, u, opt.step);
    for (const Mat& w : fd.normal_connection[k]) {
      const Mat K = fd.signs.asDiagonal() * w;
      if (p) compat[k] = std::max(compat[k], (K + K.transpose()).cwiseAbs().maxCoeff());
    }
  });
  for (std::size_t k = 0; k < N; ++k) {
    fd.symmetry_residual = std::max(fd.symmetry_residual, sym[k]);
    fd.compatibility_residual = std::max(fd.compatibility_residual, compat[k]);
    fd.shape_residual = std::max(fd.shape_residual, shape[k]);
  }
  return fd;
}

ConformalFactor conformal_factor(const ImmersionJet& jf, const ImmersionJet& jg, double tolerance) {
  if (jf.points.size() != jg.points.size() || jf.n() != jg.n())
    throw DimensionMismatch("conformal_factor needs jets on the same grid");
  ConformalFactor out;
  for (std::size_t k = 0; k < jf.points.size(); ++k) {
    const Mat a = jf.points[k].d1.transpose() * jf.ambient.gram() * jf.points[k].d1;
    const Mat b = jg.points[k].d1.transpose() * jg.ambient.gram() * jg.points[k].d1;
    const double phi2 = (a.inverse() * b).trace() / a.rows();
    if (!(phi2 > 0.0)) throw NotConformal("metrics are not positively proportional");
    const double res = (b - phi2 * a).norm() / a.norm();
    out.residual = std::max(out.residual, res);
    out.phi.push_back(std::sqrt(phi2));
  }
  if (out.residual > tolerance)
    throw NotConformal("metrics not proportional (residual " + std::to_string(out.residual) + ")");
  return out;
}

// --- Distributions --------------------------------------------------------

Mat procrustes(const Mat& A, const Mat& B) {
  Eigen::JacobiSVD<Mat> svd(A.transpose() * B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

namespace {

// Index of the point visited just before `k` along the lexicographic sweep
// that shares a grid edge with it.
std::size_t sweep_parent(const Grid& grid, std::size_t k) {
  auto m = grid.multi_index(k);
  for (int i = grid.dim() - 1; i >= 0; --i)
    if (m[i] > 0) {
      --m[i];
      return grid.flat(m);
    }
  return k;
}

void align_sweep(const Grid& grid, std::vector<Mat>& bases) {
  for (std::size_t k = 0; k < bases.size(); ++k) {
    const std::size_t parent = sweep_parent(grid, k);
    if (parent != k) bases[k] = bases[k] * procrustes(bases[k], bases[parent]);
  }
}

int check_constant_rank(const std::vector<Mat>& bases) {
  const int d = bases.empty() ? 0 : static_cast<int>(bases.front().cols());
  for (const Mat& b : bases)
    if (b.cols() != d) throw RankJump("distribution rank changes across the grid");
  return d;
}

} // namespace

double bracket_residual(const FrameGenerator& D, const Vec& u, double step, const Tolerance& tol) {
  const Mat B0 = column_space(D(u), tol);
  const int d = static_cast<int>(B0.cols());
  const int n = static_cast<int>(u.size());
  auto field = [&](const Vec& p) {
    const Mat B = column_space(D(p), tol);
    if (B.cols() != d) throw RankJump("distribution rank changes near the point");
    return Mat(B * procrustes(B, B0));
  };
  std::vector<Mat> jac;  // jac[i] = d/du_i of the frame
  for (int i = 0; i < n; ++i) jac.push_back(stencil_derivative(field, u, i, step));
  const Mat Q = Mat::Identity(n, n) - B0 * B0.transpose();
  double worst = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      Vec br = Vec::Zero(n);
      for (int i = 0; i < n; ++i) br += B0(i, a) * jac[i].col(b) - B0(i, b) * jac[i].col(a);
      worst = std::max(worst, (Q * br).norm());
    }
  return worst;
}

DistributionFrame DistributionFrame::build(const Grid& grid, FrameGenerator generator,
                                           const Tolerance& tol, double step, Exec exec) {
  DistributionFrame D;
  D.grid = grid;
  D.generator = generator;
  D.basis.resize(grid.size());
  D.integrability_residual.assign(grid.size(), 0.0);
  for_each_index(grid.size(), exec, [&](std::size_t k) {
    D.basis[k] = column_space(generator(grid.point(k)), tol);
  });
  D.rank = check_constant_rank(D.basis);
  align_sweep(grid, D.basis);
  for_each_index(grid.size(), exec, [&](std::size_t k) {
    D.integrability_residual[k] = bracket_residual(generator, grid.point(k), step, tol);
  });
  return D;
}

DistributionFrame DistributionFrame::from_samples(const Grid& grid, std::vector<Mat> bases,
                                                  const Tolerance& tol) {
  if (bases.size() != grid.size()) throw DimensionMismatch("one basis per grid point expected");
  DistributionFrame D;
  D.grid = grid;
  for (Mat& b : bases) b = column_space(b, tol);
  D.rank = check_constant_rank(bases);
  D.basis = std::move(bases);
  align_sweep(grid, D.basis);
  D.integrability_residual = bracket_residual(D);
  return D;
}

std::vector<double> bracket_residual(const DistributionFrame& D) {
  if (D.generator) {
    std::vector<double> out(D.grid.size());
    for (std::size_t k = 0; k < out.size(); ++k)
      out[k] = bracket_residual(D.generator, D.grid.point(k), 2e-3);
    return out;
  }
  const Grid& grid = D.grid;
  const int n = grid.dim();
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Mat& B0 = D.basis[k];
    const auto m = grid.multi_index(k);
    std::vector<Mat> jac(n, Mat::Zero(B0.rows(), B0.cols()));
    for (int i = 0; i < n; ++i) {
      if (grid.counts[i] < 2) continue;
      auto lo = m, hi = m;
      lo[i] = std::max(0, m[i] - 1);
      hi[i] = std::min(grid.counts[i] - 1, m[i] + 1);
      const Mat& Bl = D.basis[grid.flat(lo)];
      const Mat& Bh = D.basis[grid.flat(hi)];
      // Re-align the neighbours locally before differencing.
      jac[i] = (Bh * procrustes(Bh, B0) - Bl * procrustes(Bl, B0)) /
               (grid.spacing(i) * (hi[i] - lo[i]));
    }
    const Mat Q = Mat::Identity(n, n) - B0 * B0.transpose();
    for (int a = 0; a < D.rank; ++a)
      for (int b = a + 1; b < D.rank; ++b) {
        Vec br = Vec::Zero(n);
        for (int i = 0; i < n; ++i) br += B0(i, a) * jac[i].col(b) - B0(i, b) * jac[i].col(a);
        out[k] = std::max(out[k], (Q * br).norm());
      }
  }
  return out;
}

Vec leaf_mean_curvature(const LocalGeometry& g, const Mat& D) {
  const int d = static_cast<int>(D.cols());
  if (d == 0) return Vec::Zero(g.ambient.dim());
  const Mat GD = D.transpose() * g.metric * D;
  const Mat GDi = GD.inverse();
  Vec eta = Vec::Zero(g.ambient.dim());
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) eta += GDi(a, b) * g.alpha.apply(D.col(a), D.col(b));
  return eta / d;
}

std::vector<Vec> leaf_mean_curvature(const ImmersionJet& j, const DistributionFrame& D,
                                     const Tolerance& tol) {
  std::vector<Vec> out(j.points.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = leaf_mean_curvature(local_geometry(j.ambient, j.points[k], tol), D.basis[k]);
  return out;
}

double gauss_residual(const Immersion& f, const Vec& u, const Tolerance& tol) {
  const int n = f.dim();
  const JetVec x = f.jets(u, 3);
  const Mat& G = f.ambient().gram();
  const int m = static_cast<int>(x.size());
  // Metric as jets of order 2.
  std::vector<std::vector<Jet>> dx(n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a) dx[i].push_back(x[a].partial(i));
  std::vector<Jet> g(static_cast<std::size_t>(n * n), Jet(n, 2, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          if (G(a, b) != 0.0) g[i * n + j] += G(a, b) * (dx[i][a] * dx[j][b]);
  auto gv = [&](int i, int j) { return g[i * n + j].value(); };
  auto dg = [&](int k, int i, int j) { return g[i * n + j].d(k); };
  auto ddg = [&](int k, int l, int i, int j) { return g[i * n + j].d(k, l); };
  Mat gm(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gm(i, j) = gv(i, j);
  const Mat gi = gm.inverse();
  // Lowered Christoffel symbols c[k][i][j] = Gamma_{kij} and their derivatives.
  auto low = [&](int p, int i, int j) { return 0.5 * (dg(i, p, j) + dg(j, p, i) - dg(p, i, j)); };
  auto dlow = [&](int s, int p, int i, int j) {
    return 0.5 * (ddg(s, i, p, j) + ddg(s, j, p, i) - ddg(s, p, i, j));
  };
  auto gamma = [&](int mm, int i, int j) {
    double s = 0.0;
    for (int p = 0; p < n; ++p) s += gi(mm, p) * low(p, i, j);
    return s;
  };
  // d_s g^{mp} = -g^{ma} d_s g_ab g^{bp}
  auto dgi = [&](int s, int mm, int p) {
    double v = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) v -= gi(mm, a) * dg(s, a, b) * gi(b, p);
    return v;
  };
  auto dgamma = [&](int s, int mm, int i, int j) {
    double v = 0.0;
    for (int p = 0; p < n; ++p) v += dgi(s, mm, p) * low(p, i, j) + gi(mm, p) * dlow(s, p, i, j);
    return v;
  };
  const LocalGeometry geo = local_geometry(f.ambient(), PointJet::from_jets(x, n, 2), tol);
  const ScalarProduct& A = f.ambient();
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double R = 0.0;
          for (int mm = 0; mm < n; ++mm) {
            double t = dgamma(i, mm, j, k) - dgamma(j, mm, i, k);
            for (int p = 0; p < n; ++p) t += gamma(p, j, k) * gamma(mm, i, p) - gamma(p, i, k) * gamma(mm, j, p);
            R += gm(l, mm) * t;
          }
          const double gauss = A(geo.alpha(j, k), geo.alpha(i, l)) - A(geo.alpha(i, k), geo.alpha(j, l));
          worst = std::max(worst, std::abs(R - gauss));
        }
  return worst;
}

} // namespace cdef
