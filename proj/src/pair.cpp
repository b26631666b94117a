#include "cdef/pair.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "cdef/errors.hpp"
#include "cdef/lightcone.hpp"

namespace cdef {

std::string to_string(Branch b) {
  switch (b) {
    case Branch::automatic: return "automatic";
    case Branch::nondegenerate: return "nondegenerate";
    case Branch::degenerate: return "degenerate";
  }
  return "?";
}

std::array<int, 9> PairPoint::ranks() const {
  return {split.Omega.rank(), split.Gamma.rank(), split.GammaHat.rank(), static_cast<int>(Theta.cols()),
          S.rank(),           S0.rank(),          S1.rank(),             L.rank(),
          static_cast<int>(D.cols())};
}

// --- Joint space -----------------------------------------------------------

JointNormalSpace build_joint(const ScalarProduct& left, const PointJet& jf, const ScalarProduct& right,
                             const PointJet& jg, const PairOptions& opt) {
  JointNormalSpace js;
  js.left = local_geometry(left, jf, opt.tol);
  js.right = local_geometry(right, jg, opt.tol);
  const double scale = std::max(1.0, js.left.metric.cwiseAbs().maxCoeff());
  const double gap = (js.left.metric - js.right.metric).cwiseAbs().maxCoeff();
  if (gap > opt.metric_tolerance * scale)
    throw NotIsometricPair("induced metrics differ by " + std::to_string(gap));
  js.metric = ScalarProduct::direct_sum(left, right, -1.0);
  const int n = js.left.n();
  js.alpha_sum = BilinearSample(n, n, js.metric, true);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec v(js.m() + js.mhat());
      v << js.left.alpha(i, j), js.right.alpha(i, j);
      js.alpha_sum(i, j) = v;
    }
  js.span = span_of_image(js.alpha_sum, opt.tol);
  js.radical = radical(js.span, opt.tol);
  return js;
}

DegeneracyVerdict degeneracy_test(const JointNormalSpace& js, const Tolerance& tol) {
  DegeneracyVerdict v;
  const Subspace& O = js.radical;
  v.omega_rank = O.rank();
  if (O.rank() == 0) return v;
  const Mat O1 = O.basis().topRows(js.m());
  const Mat O2 = O.basis().bottomRows(js.mhat());
  v.left_projection_rank = numerical_rank(O1, tol);
  v.right_projection_rank = numerical_rank(O2, tol);
  v.degenerate = v.left_projection_rank < v.omega_rank || v.right_projection_rank < v.omega_rank;
  if (v.left_projection_rank < v.omega_rank) {
    const Mat k = kernel(O1, O.rank(), tol);
    v.xi0 = O2 * k.col(0);
    const double pairing = js.right.ambient(js.right.jet.x, v.xi0);
    if (std::abs(pairing) > 1e-8 * v.xi0.norm() * std::max(1.0, js.right.jet.x.norm())) {
      v.xi0 /= pairing;
      v.normalized = true;
    }
    v.position_pairing = js.right.ambient(js.right.jet.x, v.xi0);
  }
  return v;
}

// --- Splitting -------------------------------------------------------------

namespace {

double max_norm(const Mat& m) { return m.size() ? m.colwise().norm().maxCoeff() : 0.0; }

Mat pinv(const Mat& m) {
  if (m.cols() == 0 || m.rows() == 0) return Mat::Zero(m.cols(), m.rows());
  return m.completeOrthogonalDecomposition().pseudoInverse();
}

} // namespace

GammaSplitting gamma_splitting(const JointNormalSpace& js, const Tolerance& tol, const Vec* left_position,
                               const Vec* right_position) {
  GammaSplitting g;
  const ScalarProduct& L = js.left.ambient;
  const ScalarProduct& R = js.right.ambient;
  const Subspace SA = span_of_image(js.left.alpha, tol);
  const Subspace SB = span_of_image(js.right.alpha, tol);
  Subspace A = SA, B = SB;
  g.Omega = js.radical;
  if (left_position && right_position) {
    A = sum(SA, Subspace::span(L, *left_position, tol), tol);
    B = sum(SB, Subspace::span(R, *right_position, tol), tol);
    Vec w(js.m() + js.mhat());
    w << *left_position, *right_position;
    g.Omega = sum(g.Omega, Subspace::span(js.metric, w, tol), tol);
  }
  const Mat O1 = g.Omega.basis().topRows(js.m());
  const Mat O2 = g.Omega.basis().bottomRows(js.mhat());
  const Subspace U1 = Subspace::span(L, O1, tol);
  const Subspace U2 = Subspace::span(R, O2, tol);
  g.Gamma = complement_within(U1, SA, tol);
  g.GammaHat = complement_within(U2, SB, tol);
  g.GammaPerp = complement_within(g.Gamma, A, tol);
  g.GammaHatPerp = complement_within(g.GammaHat, B, tol);
  if (U1.rank() != g.Omega.rank() || U2.rank() != g.Omega.rank())
    throw SplitFailure("Omega projects with rank " + std::to_string(U1.rank()) + "/" +
                       std::to_string(U2.rank()) + " but has rank " + std::to_string(g.Omega.rank()));
  g.graph_residual = std::max(subspace_distance(U1, g.GammaPerp), subspace_distance(U2, g.GammaHatPerp));
  if (g.graph_residual > 1e-6)
    throw SplitFailure("Omega is not a graph over GammaPerp (residual " + std::to_string(g.graph_residual) + ")");
  g.J = O2 * pinv(O1);
  g.null_residual = g.Omega.rank() ? (g.Omega.gram()).cwiseAbs().maxCoeff() : 0.0;
  const Mat P = projector(g.GammaPerp, tol);
  const Mat Ph = projector(g.GammaHatPerp, tol);
  const int n = js.left.n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g.star_residual = std::max(g.star_residual, (Ph * js.right.alpha(i, j) - g.J * P * js.left.alpha(i, j)).norm());
  return g;
}

// --- Pipeline --------------------------------------------------------------

struct PairPipeline::Fiber {
  std::string error;
  LocalGeometry left, right;
  GammaSplitting split;
  Mat Theta;
  Subspace S, S_hat;
  Mat PS, PS_hat;   // metric projectors onto S, S_hat
  int dim_beta_span = 0;
  double theta_identity_residual = 0.0;
};

struct PairPipeline::Cache {
  Vec u0;
  double h = 1e-3;
  Branch branch = Branch::nondegenerate;
  std::map<std::vector<int>, Fiber> fibers;
  std::map<std::vector<int>, Subspace> s0;
  std::map<std::vector<int>, Subspace> l;
};

namespace {

std::vector<int> shifted(const std::vector<int>& k, int axis, int by) {
  std::vector<int> out = k;
  out[axis] += by;
  return out;
}

template <class F>
Mat lattice_derivative(const F& frame, const std::vector<int>& k, int axis, double h) {
  return (frame(shifted(k, axis, -2)) - 8.0 * frame(shifted(k, axis, -1)) + 8.0 * frame(shifted(k, axis, 1)) -
          frame(shifted(k, axis, 2))) /
         (12.0 * h);
}

// Rows of the map X -> (alpha(X, e_j) outside T) over all j, for T given by
// the complementary projector Q.
Mat nullity_rows(const BilinearSample& a, const Mat& Q) {
  const int n = a.left_dim;
  const int m = static_cast<int>(Q.rows());
  Mat rows(m * n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) rows.block(j * m, i, m, 1) = Q * a(i, j);
  return rows;
}

Mat chart_kernel(const Mat& rows, int n, const Tolerance& tol) {
  if (rows.rows() == 0) return Mat::Identity(n, n);
  return kernel(rows, n, tol);
}

Subspace chart_subspace(const Mat& basis) {
  return Subspace(ScalarProduct::euclidean(static_cast<int>(basis.rows())), basis, Tolerance{});
}

} // namespace

PairPipeline::PairPipeline(ImmersionPtr f, ImmersionPtr fhat, PairOptions opt)
    : f_(std::move(f)), fhat_(std::move(fhat)), opt_(opt) {
  if (f_->dim() != fhat_->dim()) throw DimensionMismatch("pair immersions have different dimensions");
  if (fhat_->ambient().light_cone_pair() && !f_->ambient().light_cone_pair()) lift_ = psi_lift(f_);
  left_ = f_;
}

Branch PairPipeline::decide_branch(const Vec& u) const {
  if (opt_.branch != Branch::automatic) return opt_.branch;
  const JointNormalSpace js = build_joint(f_->ambient(), f_->point(u, 2), fhat_->ambient(), fhat_->point(u, 2), opt_);
  return degeneracy_test(js, opt_.tol).degenerate && lift_ ? Branch::degenerate : Branch::nondegenerate;
}

const PairPipeline::Fiber& PairPipeline::fiber(Cache& c, const std::vector<int>& k) const {
  auto it = c.fibers.find(k);
  if (it != c.fibers.end()) return it->second;
  Fiber fb;
  Vec u = c.u0;
  for (std::size_t i = 0; i < k.size(); ++i) u(static_cast<Eigen::Index>(i)) += c.h * k[i];
  const ImmersionPtr& left = working_left(c.branch);
  const JointNormalSpace js = build_joint(left->ambient(), left->point(u, 2), fhat_->ambient(), fhat_->point(u, 2), opt_);
  const Tolerance& tol = opt_.tol;
  const bool deg = c.branch == Branch::degenerate;
  fb.split = deg ? gamma_splitting(js, tol, &js.left.jet.x, &js.right.jet.x) : gamma_splitting(js, tol);
  const int n = js.left.n();
  const Mat PG = projector(fb.split.Gamma, tol);
  const Mat PGh = projector(fb.split.GammaHat, tol);
  // Theta = N(beta), beta = alpha_Gamma (+) alpha-hat_GammaHat.
  Mat rows(n * (js.m() + js.mhat()), n);
  BilinearSample beta(n, n, js.metric, true);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      Vec v(js.m() + js.mhat());
      v << PG * js.left.alpha(i, j), PGh * js.right.alpha(i, j);
      beta(i, j) = v;
      rows.block(j * v.size(), i, v.size(), 1) = v;
    }
  fb.dim_beta_span = span_of_image(beta, tol).rank();
  fb.Theta = chart_kernel(rows, n, tol);
  Mat gens(js.m(), fb.Theta.cols() * n + (deg ? 1 : 0));
  for (int a = 0; a < fb.Theta.cols(); ++a)
    for (int j = 0; j < n; ++j) gens.col(a * n + j) = js.left.alpha.apply(fb.Theta.col(a), Vec::Unit(n, j));
  if (deg) gens.col(gens.cols() - 1) = js.left.jet.x;
  fb.S = Subspace::span(js.left.ambient, gens, tol);
  fb.S_hat = image(fb.split.J, fb.S, js.right.ambient, tol);
  fb.PS = projector(fb.S, tol);
  fb.PS_hat = projector(fb.S_hat, tol);
  // Theta = N(alpha_{S^perp}) cap N(alpha-hat_{S-hat^perp}).
  const Mat Q = js.left.normal_projector - fb.PS;
  const Mat Qh = js.right.normal_projector - fb.PS_hat;
  Mat both(n * (js.m() + js.mhat()), n);
  both << nullity_rows(js.left.alpha, Q), nullity_rows(js.right.alpha, Qh);
  fb.theta_identity_residual =
      subspace_distance(chart_subspace(fb.Theta), chart_subspace(chart_kernel(both, n, tol)));
  fb.left = std::move(js.left);
  fb.right = std::move(js.right);
  return c.fibers.emplace(k, std::move(fb)).first->second;
}

namespace {

struct KStage {
  Mat W;
  Vec signs;
  std::vector<Mat> K;
  double skew = 0.0;
  Mat kernel_coeffs;
};

} // namespace

// Frame fields of a subspace-valued map around a lattice point, seeded there.
template <class SubFn>
static Mat seeded_frame(const SubFn& sub, const std::vector<int>& key, const Mat& seed, const Vec& signs,
                        const ScalarProduct& ambient, const Tolerance& tol) {
  return polar_orthonormalize(ambient, projector(sub(key), tol) * seed, signs);
}

const Subspace& PairPipeline::s0_at(Cache& c, const std::vector<int>& k) const {
  auto it = c.s0.find(k);
  if (it != c.s0.end()) return it->second;
  const Fiber& fb = fiber(c, k);
  const ScalarProduct& amb = fb.left.ambient;
  const ScalarProduct& ambh = fb.right.ambient;
  Subspace out = Subspace::zero(amb);
  if (fb.S.rank() > 0) {
    Vec signs;
    const Mat W = pseudo_orthonormal_basis(fb.S, &signs);
    auto frame = [&](const std::vector<int>& key) {
      return seeded_frame([&](const std::vector<int>& kk) -> const Subspace& { return fiber(c, kk).S; }, key, W,
                          signs, amb, opt_.tol);
    };
    auto frame_hat = [&](const std::vector<int>& key) { return Mat(fiber(c, key).split.J * frame(key)); };
    const Mat Wh = fb.split.J * W;
    const int n = static_cast<int>(k.size());
    Mat stack(n * W.cols(), W.cols());
    for (int i = 0; i < n; ++i) {
      const Mat d = lattice_derivative(frame, k, i, c.h);
      const Mat dh = lattice_derivative(frame_hat, k, i, c.h);
      const Mat M = W.transpose() * amb.gram() * d - Wh.transpose() * ambh.gram() * dh;
      stack.middleRows(i * W.cols(), W.cols()) = signs.asDiagonal() * M;
    }
    const Mat ker = kernel(stack, static_cast<int>(W.cols()), opt_.tol.loosened());
    if (ker.cols()) out = Subspace(amb, column_space(W * ker, opt_.tol), opt_.tol);
  }
  return c.s0.emplace(k, std::move(out)).first->second;
}

const Subspace& PairPipeline::l_at(Cache& c, const std::vector<int>& k) const {
  auto it = c.l.find(k);
  if (it != c.l.end()) return it->second;
  const Fiber& fb = fiber(c, k);
  const Subspace& S0 = s0_at(c, k);
  const ScalarProduct& amb = fb.left.ambient;
  Subspace out = Subspace::zero(amb);
  if (S0.rank() > 0) {
    Vec signs;
    const Mat W = pseudo_orthonormal_basis(S0, &signs);
    auto frame = [&](const std::vector<int>& key) {
      return seeded_frame([&](const std::vector<int>& kk) -> const Subspace& { return s0_at(c, kk); }, key, W,
                          signs, amb, opt_.tol);
    };
    auto frame_hat = [&](const std::vector<int>& key) { return Mat(fiber(c, key).split.J * frame(key)); };
    const int n = static_cast<int>(k.size());
    std::vector<Mat> d(n), dh(n);
    for (int i = 0; i < n; ++i) {
      d[i] = lattice_derivative(frame, k, i, c.h);
      dh[i] = lattice_derivative(frame_hat, k, i, c.h);
    }
    const Mat Q = fb.left.normal_projector - fb.PS;
    const Mat Qh = fb.right.normal_projector - fb.PS_hat;
    const int m = amb.dim(), mh = fb.right.ambient.dim();
    Mat rows((m + mh) * fb.Theta.cols(), W.cols());
    for (int y = 0; y < fb.Theta.cols(); ++y) {
      Mat dy = Mat::Zero(m, W.cols()), dyh = Mat::Zero(mh, W.cols());
      for (int i = 0; i < n; ++i) {
        dy += fb.Theta(i, y) * d[i];
        dyh += fb.Theta(i, y) * dh[i];
      }
      rows.middleRows(y * (m + mh), m) = Q * dy;
      rows.middleRows(y * (m + mh) + m, mh) = Qh * dyh;
    }
    const Mat ker = rows.rows() ? kernel(rows, static_cast<int>(W.cols()), opt_.tol.loosened())
                                : Mat(Mat::Identity(W.cols(), W.cols()));
    if (ker.cols()) out = Subspace(amb, column_space(W * ker, opt_.tol), opt_.tol);
  }
  return c.l.emplace(k, std::move(out)).first->second;
}

PairPoint PairPipeline::at(const Vec& u, Branch branch) const {
  PairPoint pt;
  pt.u = u;
  pt.branch = branch;
  try {
    const JointNormalSpace orig =
        build_joint(f_->ambient(), f_->point(u, 2), fhat_->ambient(), fhat_->point(u, 2), opt_);
    pt.degeneracy = degeneracy_test(orig, opt_.tol);
    if (branch == Branch::degenerate && !lift_)
      throw HypothesisOutOfRange("degenerate branch needs a Euclidean f and a light-cone fhat");

    Cache c;
    c.u0 = u;
    c.h = opt_.step;
    c.branch = branch;
    const int n = static_cast<int>(u.size());
    const std::vector<int> o(n, 0);
    const Fiber& fb = fiber(c, o);
    const ScalarProduct& amb = fb.left.ambient;
    const ScalarProduct& ambh = fb.right.ambient;
    const Tolerance& tol = opt_.tol;
    pt.split = fb.split;
    pt.Theta = fb.Theta;
    pt.S = fb.S;
    pt.S_hat = fb.S_hat;
    pt.dim_beta_span = fb.dim_beta_span;
    pt.theta_identity_residual = fb.theta_identity_residual;
    pt.s_riemannian = fb.S.nondegenerate() && fb.S.signature().neg == 0;

    // K in an S frame seeded here.
    if (fb.S.rank() > 0) {
      Vec signs;
      const Mat W = pseudo_orthonormal_basis(fb.S, &signs);
      pt.S_frame = W;
      auto frame = [&](const std::vector<int>& key) {
        return seeded_frame([&](const std::vector<int>& kk) -> const Subspace& { return fiber(c, kk).S; }, key, W,
                            signs, amb, tol);
      };
      auto frame_hat = [&](const std::vector<int>& key) { return Mat(fiber(c, key).split.J * frame(key)); };
      const Mat Wh = fb.split.J * W;
      for (int i = 0; i < n; ++i) {
        const Mat M = W.transpose() * amb.gram() * lattice_derivative(frame, o, i, c.h) -
                      Wh.transpose() * ambh.gram() * lattice_derivative(frame_hat, o, i, c.h);
        pt.K_skew_residual = std::max(pt.K_skew_residual, (M + M.transpose()).cwiseAbs().maxCoeff());
        pt.K.push_back(signs.asDiagonal() * M);
      }
    }
    pt.S0 = s0_at(c, o);
    pt.S1 = complement_within(pt.S0, pt.S, tol);
    pt.L = l_at(c, o);
    pt.L_hat = image(fb.split.J, pt.L, ambh, tol);

    // D = N(alpha_{L^perp}) cap N(alpha-hat_{L-hat^perp}).
    const Mat PL = projector(pt.L, tol);
    const Mat PLh = projector(pt.L_hat, tol);
    const Mat Q = fb.left.normal_projector - PL;
    const Mat Qh = fb.right.normal_projector - PLh;
    Mat both(n * (amb.dim() + ambh.dim()), n);
    both << nullity_rows(fb.left.alpha, Q), nullity_rows(fb.right.alpha, Qh);
    pt.D = chart_kernel(both, n, tol.loosened());

    // (C1), (C2) with an L frame seeded here.
    std::vector<Mat> Lder, Lder_hat;
    if (pt.L.rank() > 0) {
      Vec signs;
      const Mat W = pseudo_orthonormal_basis(pt.L, &signs);
      // T in frame coefficients; the identity unless a corruption is requested.
      Mat rot = Mat::Identity(W.cols(), W.cols());
      if (opt_.corrupt_isometry != 0.0) {
        if (W.cols() >= 2) {
          const double a = opt_.corrupt_isometry;
          rot.topLeftCorner(2, 2) << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        } else {
          rot(0, 0) = -1.0;
        }
      }
      const Mat T = fb.split.J * (W * rot * signs.asDiagonal() * W.transpose() * amb.gram());
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          pt.c1_sff_residual =
              std::max(pt.c1_sff_residual, (PLh * fb.right.alpha(i, j) - T * fb.left.alpha(i, j)).norm());
      auto frame = [&](const std::vector<int>& key) {
        return seeded_frame([&](const std::vector<int>& kk) -> const Subspace& { return l_at(c, kk); }, key, W,
                            signs, amb, tol);
      };
      auto frame_hat = [&](const std::vector<int>& key) { return Mat(fiber(c, key).split.J * frame(key) * rot); };
      std::vector<Mat> d(n), dh(n);
      for (int i = 0; i < n; ++i) {
        d[i] = lattice_derivative(frame, o, i, c.h);
        dh[i] = lattice_derivative(frame_hat, o, i, c.h);
        pt.c1_parallel_residual = std::max(pt.c1_parallel_residual, max_norm(PLh * dh[i] - T * PL * d[i]));
      }
      for (int z = 0; z < pt.D.cols(); ++z) {
        Mat dz = Mat::Zero(d[0].rows(), d[0].cols()), dzh = Mat::Zero(dh[0].rows(), dh[0].cols());
        for (int i = 0; i < n; ++i) {
          dz += pt.D(i, z) * d[i];
          dzh += pt.D(i, z) * dh[i];
        }
        pt.c2_residual = std::max({pt.c2_residual, max_norm(Q * dz), max_norm(Qh * dzh)});
      }
      pt.L_frame = W;
      pt.L_frame_hat = fb.split.J * W * rot;
      Lder = std::move(d);
      Lder_hat = std::move(dh);
    }

    // phi(Y + xi, X) = ((d_X (Y + xi))_{L^perp}, (d_X (Y + T xi))_{L-hat^perp}).
    const int ell = pt.L.rank();
    const int m = amb.dim(), mh = ambh.dim();
    pt.phi_rows.resize(n * (m + mh), n + ell);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        pt.phi_rows.block(j * (m + mh), i, m, 1) = Q * fb.left.alpha(j, i);
        pt.phi_rows.block(j * (m + mh) + m, i, mh, 1) = Qh * fb.right.alpha(j, i);
      }
      if (ell) {
        pt.phi_rows.block(j * (m + mh), n, m, ell) = Q * Lder[j];
        pt.phi_rows.block(j * (m + mh) + m, n, mh, ell) = Qh * Lder_hat[j];
      }
    }
    pt.Delta = kernel(pt.phi_rows, n + ell, tol.loosened());

    if (branch == Branch::degenerate) {
      ClaimReport cl;
      const double ct = opt_.claim_tolerance;
      cl.claim1 = pt.S.nondegenerate() && pt.S.signature().neg == 1;
      for (int a = 0; a < pt.Theta.cols(); ++a) {
        Mat KZ = Mat::Zero(pt.S.rank(), pt.S.rank());
        for (int i = 0; i < n && !pt.K.empty(); ++i) KZ += pt.Theta(i, a) * pt.K[i];
        if (KZ.size()) cl.K_theta_residual = std::max(cl.K_theta_residual, KZ.cwiseAbs().maxCoeff());
      }
      cl.claim2 = cl.K_theta_residual <= ct && pt.S0.nondegenerate() && pt.S0.signature().neg == 1;
      cl.s1_dim = pt.S1.rank();
      cl.s1_riemannian = pt.S1.rank() == 0 || (pt.S1.nondegenerate() && pt.S1.signature().neg == 0);
      if (pt.S1.rank() > 0 && cl.s1_riemannian) {
        const Mat P1 = projector(pt.S1, tol);
        Mat gens(amb.dim(), pt.Theta.cols() * n);
        for (int a = 0; a < pt.Theta.cols(); ++a)
          for (int j = 0; j < n; ++j) gens.col(a * n + j) = P1 * fb.left.alpha.apply(pt.Theta.col(a), Vec::Unit(n, j));
        cl.s1_span_residual = subspace_distance(Subspace::span(amb, gens, tol.loosened()), pt.S1);
      }
      cl.claim3 = cl.s1_riemannian && cl.s1_dim <= 5 && cl.s1_span_residual <= ct;
      cl.claim4 = pt.D.cols() > 0 && pt.L.nondegenerate() && pt.L.signature().neg == 1;
      const Vec& fp = fb.left.jet.x;
      cl.position_residual = pt.L.rank() ? pt.L.distance(fp) : 1.0;
      cl.position_in_L = cl.position_residual <= ct;
      for (int a = 0; a < pt.Theta.cols(); ++a) {
        const Vec Z = pt.Theta.col(a);
        cl.th0_residual = std::max(cl.th0_residual, std::abs(amb(fb.left.alpha.apply(Z, Z), fp) +
                                                            Z.dot(fb.left.metric * Z)));
      }
      cl.J_position_residual = (fb.split.J * fp - fb.right.jet.x).norm();
      if (pt.degeneracy.xi0.size())
        cl.J_e0_residual = (fb.split.J * Vec::Unit(amb.dim(), 0) - pt.degeneracy.xi0).norm();
      else
        cl.J_e0_residual = INFINITY;
      pt.claims = cl;
    }
  } catch (const Error& e) {
    pt.error = e.what();
  }
  return pt;
}

// --- Grid driver -----------------------------------------------------------

std::vector<Region> segment(const Grid& grid, const std::vector<std::array<int, 9>>& ranks) {
  std::vector<Region> out;
  std::vector<int> label(grid.size(), -1);
  for (std::size_t s = 0; s < grid.size(); ++s) {
    if (label[s] >= 0) continue;
    Region r;
    r.ranks = ranks[s];
    std::deque<std::size_t> todo{s};
    label[s] = static_cast<int>(out.size());
    while (!todo.empty()) {
      const std::size_t k = todo.front();
      todo.pop_front();
      r.points.push_back(k);
      for (std::size_t nb : grid.neighbors(k))
        if (label[nb] < 0 && ranks[nb] == r.ranks) {
          label[nb] = static_cast<int>(out.size());
          todo.push_back(nb);
        }
    }
    std::sort(r.points.begin(), r.points.end());
    out.push_back(std::move(r));
  }
  return out;
}

ConstructionState construct_TD(const PairPipeline& pipe, const Grid& grid) {
  ConstructionState st;
  st.grid = grid;
  st.branch = pipe.decide_branch(grid.point(grid.center()));
  st.points.resize(grid.size());
  for_each_index(grid.size(), pipe.options().exec,
                 [&](std::size_t k) { st.points[k] = pipe.at(grid.point(k), st.branch); });
  std::vector<std::array<int, 9>> ranks(grid.size());
  bool any_error = false;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const PairPoint& p = st.points[k];
    if (!p.error.empty()) {
      any_error = true;
      ranks[k].fill(-1);
      continue;
    }
    ranks[k] = p.ranks();
    st.branch_mismatches += p.degeneracy.degenerate != (st.branch == Branch::degenerate);
  }
  st.regions = segment(grid, ranks);
  if (st.regions.size() == 1 && !any_error) {
    std::vector<Mat> theta, d;
    for (const PairPoint& p : st.points) {
      theta.push_back(p.Theta);
      d.push_back(p.D);
    }
    try {
      st.Theta = DistributionFrame::from_samples(grid, theta, pipe.options().tol.loosened());
      st.D = DistributionFrame::from_samples(grid, d, pipe.options().tol.loosened());
      st.frames_built = true;
    } catch (const Error&) {
      st.frames_built = false;
    }
  }
  return st;
}

C1C2Report verify_C1C2(const ConstructionState& state) {
  C1C2Report r;
  for (const PairPoint& p : state.points) {
    if (!p.error.empty()) continue;
    r.sff = std::max(r.sff, p.c1_sff_residual);
    r.parallel = std::max(r.parallel, p.c1_parallel_residual);
    r.c2 = std::max(r.c2, p.c2_residual);
  }
  return r;
}

DimensionBound check_dimension_bound(BoundKind kind, int n, int p, int q, int a, int b, int ell, int actual) {
  DimensionBound d;
  d.kind = kind;
  d.actual = actual;
  switch (kind) {
    case BoundKind::isometric_nondegenerate: {
      const int mc = std::min(p + b - a, q + a - b);
      if (p + q > n - 1 || mc > 6)
        throw HypothesisOutOfRange("needs p + q <= n - 1 and min{p+b-a, q+a-b} <= 6");
      d.required = n - p - q + 3 * ell;
      d.exceptional = mc == 6 && ell == 0;
      if (d.exceptional) d.required -= 1;
      d.formula = d.exceptional ? "d + r >= n - p - q + 3l - 1" : "d + r >= n - p - q + 3l";
      break;
    }
    case BoundKind::isometric_degenerate:
      if (p + q > n - 1 || std::min(p, q) > 5) throw HypothesisOutOfRange("needs p + q <= n - 1 and min{p, q} <= 5");
      d.required = n - p - q + 3 * ell - 4;
      d.formula = "s >= n - p - q + 3l - 4";
      break;
    case BoundKind::conformal:
      if (p + q > n - 3 || std::min(p, q) > 5) throw HypothesisOutOfRange("needs p + q <= n - 3 and min{p, q} <= 5");
      d.required = n - p - q + 3 * ell;
      d.formula = "d >= n - p - q + 3l";
      break;
  }
  d.slack = actual - d.required;
  d.holds = d.slack >= 0;
  return d;
}

} // namespace cdef
