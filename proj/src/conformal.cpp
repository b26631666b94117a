#include "cdef/conformal.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <random>

#include "cdef/errors.hpp"
#include "cdef/optimize.hpp"

namespace cdef {

// --- beta and rulings ------------------------------------------------------

ConformalSFF conformal_sff(const ImmersionJet& j, const DistributionFrame& D, const Tolerance& tol, Exec exec) {
  if (D.basis.size() != j.points.size()) throw DimensionMismatch("distribution sampled on a different grid");
  const std::size_t N = j.points.size();
  const int n = j.n();
  ConformalSFF out;
  out.D = D;
  out.eta.resize(N);
  out.beta.resize(N);
  out.L.resize(N);
  out.ell_per_point.resize(N);
  std::vector<double> res(N, 0.0);
  for_each_index(N, exec, [&](std::size_t k) {
    const LocalGeometry g = local_geometry(j.ambient, j.points[k], tol);
    const Mat& Z = D.basis[k];
    out.eta[k] = leaf_mean_curvature(g, Z);
    BilinearSample beta = g.alpha;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) beta(a, b) = g.alpha(a, b) - g.metric(a, b) * out.eta[k];
    Mat gens(j.m(), Z.cols() * n);
    for (int z = 0; z < Z.cols(); ++z)
      for (int b = 0; b < n; ++b) gens.col(z * n + b) = beta.apply(Z.col(z), Vec::Unit(n, b));
    out.L[k] = Subspace::span(j.ambient, gens, tol);
    out.ell_per_point[k] = out.L[k].rank();
    const Mat Q = Mat::Identity(j.m(), j.m()) - out.L[k].aux_projector();
    for (int c = 0; c < gens.cols(); ++c) res[k] = std::max(res[k], (Q * gens.col(c)).norm());
    out.beta[k] = std::move(beta);
  });
  for (std::size_t k = 0; k < N; ++k) {
    out.ell = std::max(out.ell, out.ell_per_point[k]);
    out.nullity_residual = std::max(out.nullity_residual, res[k]);
  }
  return out;
}

RulingVerdict is_conformally_ruled(const ImmersionJet& j, const DistributionFrame& D, double threshold,
                                   const Tolerance& tol) {
  RulingVerdict v;
  for (std::size_t k = 0; k < j.points.size(); ++k) {
    const LocalGeometry g = local_geometry(j.ambient, j.points[k], tol);
    const Mat& Z = D.basis[k];
    const Vec eta = leaf_mean_curvature(g, Z);
    for (int a = 0; a < Z.cols(); ++a)
      for (int b = 0; b < Z.cols(); ++b) {
        const double gab = Z.col(a).dot(g.metric * Z.col(b));
        v.umbilic_residual =
            std::max(v.umbilic_residual, (g.alpha.apply(Z.col(a), Z.col(b)) - gab * eta).norm());
      }
  }
  for (double r : D.integrability_residual) v.bracket_residual = std::max(v.bracket_residual, r);
  v.ruled = v.umbilic_residual <= threshold && v.bracket_residual <= threshold;
  return v;
}

// --- Nullity ---------------------------------------------------------------

namespace {

std::vector<Mat> family(const std::vector<Mat>& S, const Mat& V) {
  std::vector<Mat> T;
  for (int a = 0; a < V.cols(); ++a) {
    Mat t = Mat::Zero(S.front().rows(), S.front().cols());
    for (std::size_t b = 0; b < S.size(); ++b) t += V(static_cast<Eigen::Index>(b), a) * S[b];
    T.push_back(t);
  }
  return T;
}

double family_scale(const std::vector<Mat>& T) {
  double s = 1.0;
  for (const Mat& t : T) s = std::max(s, t.cwiseAbs().maxCoeff());
  return s;
}

JointEigen joint_rec(const std::vector<Mat>& T, const Mat& E, std::size_t a, Vec c, double thr) {
  if (E.cols() == 0) return {0, c};
  if (a == T.size()) return {static_cast<int>(E.cols()), c};
  const Mat B = E.transpose() * T[a] * E;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (B + B.transpose()));
  const Vec& ev = es.eigenvalues();
  JointEigen best{0, c};
  Eigen::Index start = 0;
  const Eigen::Index r = ev.size();
  while (start < r) {
    Eigen::Index end = start + 1;
    while (end < r && ev(end) - ev(end - 1) <= thr) ++end;
    const double mu = ev.segment(start, end - start).mean();
    const Mat W = E * es.eigenvectors().middleCols(start, end - start);
    const Mat M = (T[a] - mu * Mat::Identity(T[a].rows(), T[a].cols())) * W;
    const Mat K = kernel(M, static_cast<int>(W.cols()), Tolerance{0.0, thr, thr});
    if (K.cols() >= best.dim && K.cols() > 0) {
      Vec cc = c;
      cc(static_cast<Eigen::Index>(a)) = mu;
      const JointEigen sub = joint_rec(T, W * K, a + 1, cc, thr);
      // Ties go to the smallest |c| (the 0-eigenvalue certificate when there is one).
      if (sub.dim > best.dim || (sub.dim == best.dim && sub.c.norm() < best.c.norm())) best = sub;
    }
    start = end;
  }
  return best;
}

Mat orthonormal_columns(const Mat& Q) {
  Eigen::HouseholderQR<Mat> qr(Q);
  Mat out = qr.householderQ() * Mat::Identity(Q.rows(), Q.cols());
  // Fix the sign ambiguity so the parametrisation is deterministic.
  const Mat R = qr.matrixQR().topRows(Q.cols()).triangularView<Eigen::Upper>();
  for (int i = 0; i < Q.cols(); ++i)
    if (R(i, i) < 0) out.col(i) = -out.col(i);
  return out;
}

// Sum of the k smallest squared singular values of the stacked S_{v_a} - c_a I.
double smoothed(const std::vector<Mat>& S, const Mat& V, const Vec& c, int k) {
  const std::vector<Mat> T = family(S, V);
  const int n = static_cast<int>(T.front().rows());
  Mat M(n * T.size(), n);
  for (std::size_t a = 0; a < T.size(); ++a)
    M.middleRows(static_cast<Eigen::Index>(a) * n, n) = T[a] - c(static_cast<Eigen::Index>(a)) * Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(M);
  const Vec& sv = svd.singularValues();
  double acc = 0.0;
  for (int i = 0; i < k && i < sv.size(); ++i) acc += sv(sv.size() - 1 - i) * sv(sv.size() - 1 - i);
  const double s = family_scale(T);
  return acc / (s * s);
}

// Deterministic near-uniform points on S^2.
std::vector<Vec> fibonacci_sphere(int count) {
  std::vector<Vec> out;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double r = std::sqrt(1.0 - z * z);
    out.push_back((Vec(3) << r * std::cos(golden * i), r * std::sin(golden * i), z).finished());
  }
  return out;
}

} // namespace

int nullity_at(const std::vector<Mat>& S, const Mat& V, const Vec& c, double tol) {
  const std::vector<Mat> T = family(S, V);
  const int n = static_cast<int>(T.front().rows());
  Mat M(n * T.size(), n);
  for (std::size_t a = 0; a < T.size(); ++a)
    M.middleRows(static_cast<Eigen::Index>(a) * n, n) = T[a] - c(static_cast<Eigen::Index>(a)) * Mat::Identity(n, n);
  const double thr = tol * family_scale(T);
  return static_cast<int>(kernel(M, n, Tolerance{0.0, thr, thr}).cols());
}

JointEigen joint_eigenspace(const std::vector<Mat>& S, const Mat& V, double tol) {
  const std::vector<Mat> T = family(S, V);
  const int n = static_cast<int>(T.front().rows());
  return joint_rec(T, Mat::Identity(n, n), 0, Vec::Zero(V.cols()), tol * family_scale(T));
}

NullityReport conformal_s_nullity(const std::vector<Mat>& H, const Mat& metric, int s, const NullityOptions& opt) {
  const int p = static_cast<int>(H.size());
  const int n = static_cast<int>(metric.rows());
  if (s < 1 || s > p) throw DimensionMismatch("s-nullity needs 1 <= s <= codimension");
  Eigen::LLT<Mat> llt(metric);
  if (llt.info() != Eigen::Success) throw NotImmersion("metric is not positive definite");
  const Mat Linv = Mat(llt.matrixL()).inverse();
  std::vector<Mat> S;
  for (const Mat& h : H) {
    const Mat sym = 0.5 * (h + h.transpose());
    S.push_back(Linv * sym * Linv.transpose());
  }

  NullityReport rep;
  rep.s = s;
  rep.value = -1;
  auto consider = [&](const Mat& Vraw) {
    const Mat V = orthonormal_columns(Vraw);
    const JointEigen je = joint_eigenspace(S, V, opt.tol);
    const int v = nullity_at(S, V, je.c, opt.tol);
    if (v > rep.value || (v == rep.value && je.c.norm() < rep.c.norm() - 1e-12)) {
      rep.value = v;
      rep.V_frame = V;
      rep.c = je.c;
    }
  };

  if (s == p) {
    consider(Mat::Identity(p, p));
    rep.exact = true;
    rep.method = "exact";
    return rep;
  }
  if (p == 2) {
    // s = 1: sweep the half circle and refine window-spread minima.
    rep.method = "sweep";
    const int N = opt.sweep;
    auto vdir = [](double t) { return Mat((Mat(2, 1) << std::cos(t), std::sin(t)).finished()); };
    std::vector<Vec> eig(N);
    for (int i = 0; i < N; ++i) {
      const double t = M_PI * i / N;
      consider(vdir(t));
      const Mat T = family(S, vdir(t)).front();
      eig[i] = Eigen::SelfAdjointEigenSolver<Mat>(T).eigenvalues();
    }
    for (int k = 2; k <= n && rep.value < n; ++k) {
      auto spread = [&](double t) {
        const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(family(S, vdir(t)).front()).eigenvalues();
        double m = INFINITY;
        for (int i = 0; i + k - 1 < n; ++i) m = std::min(m, ev(i + k - 1) - ev(i));
        return m;
      };
      std::vector<double> vals(N);
      for (int i = 0; i < N; ++i) {
        double m = INFINITY;
        for (int a = 0; a + k - 1 < n; ++a) m = std::min(m, eig[i](a + k - 1) - eig[i](a));
        vals[i] = m;
      }
      for (int i = 0; i < N; ++i) {
        const double prev = vals[(i + N - 1) % N], next = vals[(i + 1) % N];
        if (vals[i] <= prev && vals[i] <= next) {
          const double t = golden_section(spread, M_PI * (i - 1) / N, M_PI * (i + 1) / N);
          consider(vdir(t));
        }
      }
    }
    return rep;
  }

  rep.method = "multistart";
  if (p == 3) {
    rep.method = "sampled+multistart";
    for (const Vec& w : fibonacci_sphere(600)) {
      if (s == 1) {
        consider(w);
      } else {
        // s = 2: the plane orthogonal to w.
        Mat V = kernel(w.transpose(), 3, Tolerance{});
        consider(V);
      }
    }
  }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd;
  for (int r = 0; r < opt.restarts && rep.value < n; ++r) {
    const int k = rep.value + 1;
    Mat Q0(p, s);
    for (int i = 0; i < p; ++i)
      for (int a = 0; a < s; ++a) Q0(i, a) = nd(rng);
    if (r == 0 && rep.V_frame.size()) Q0 = rep.V_frame;
    const Mat V0 = orthonormal_columns(Q0);
    const std::vector<Mat> T0 = family(S, V0);
    Vec c0(s);
    for (int a = 0; a < s; ++a) {
      const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(T0[a]).eigenvalues();
      c0(a) = ev(std::uniform_int_distribution<int>(0, n - 1)(rng));
    }
    Vec x0(p * s + s);
    x0.head(p * s) = Eigen::Map<const Vec>(Q0.data(), p * s);
    x0.tail(s) = c0;
    auto obj = [&](const Vec& x) {
      const Mat Q = Eigen::Map<const Mat>(x.data(), p, s);
      return smoothed(S, orthonormal_columns(Q), x.tail(s), k);
    };
    const NelderMeadResult nm = nelder_mead(obj, x0, 0.2, 1e-20, 3000);
    rep.trace.push_back(nm.value);
    consider(Eigen::Map<const Mat>(nm.x.data(), p, s));
    ++rep.restarts;
  }
  return rep;
}

NullityReport conformal_s_nullity(const FundamentalData& fd, std::size_t k, const ScalarProduct& ambient, int s,
                                  const NullityOptions& opt) {
  NullityReport rep = conformal_s_nullity(fd.alpha[k], fd.metric[k], s, opt);
  rep.V = fd.normal_frame[k] * rep.V_frame;
  const Mat GV = rep.V.transpose() * ambient.gram() * rep.V;
  const Signature sig = signature_of(GV, 1e-10 * std::max(1.0, GV.cwiseAbs().maxCoeff()));
  if (sig.nondegenerate()) rep.zeta = rep.V * GV.inverse() * rep.c;
  return rep;
}

RigidityVerdict rigidity_criterion(const FundamentalData& fd, std::size_t k, const ScalarProduct& ambient, int q,
                                   const NullityOptions& opt) {
  RigidityVerdict v;
  v.n = static_cast<int>(fd.metric[k].rows());
  v.p = static_cast<int>(fd.alpha[k].size());
  v.q = q;
  if (!(v.p <= 5 && v.p <= q && q <= v.n - v.p - 3))
    throw HypothesisOutOfRange("rigidity criterion needs p <= 5 and p <= q <= n - p - 3 (n=" +
                               std::to_string(v.n) + ", p=" + std::to_string(v.p) + ", q=" + std::to_string(q) + ")");
  bool violated = false, all_exact = true;
  int nu1 = -1;
  for (int s = 1; s <= v.p; ++s) {
    const NullityReport r = conformal_s_nullity(fd, k, ambient, s, opt);
    if (s == 1) nu1 = r.value;
    RigidityBound b;
    b.s = s;
    b.bound = v.n + v.p - q - 2 * s - 1;
    b.nullity = r.value;
    b.exact = r.exact;
    b.satisfied = r.value <= b.bound;
    violated |= !b.satisfied;
    all_exact &= r.exact;
    v.bounds.push_back(b);
  }
  if (q >= v.p + 5) {
    v.extra_check = true;
    v.extra_bound = v.n - 2 * (q - v.p) + 1;
    if (nu1 > v.extra_bound) violated = true;
  }
  v.hypotheses_hold = !violated;
  v.conclusive = violated || all_exact;
  return v;
}

} // namespace cdef
