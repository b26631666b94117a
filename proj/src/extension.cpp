#include "cdef/extension.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "cdef/errors.hpp"
#include "cdef/lightcone.hpp"

namespace cdef {

namespace {

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Subspace chart_span(const Mat& basis, const Tolerance& tol) {
  const int n = static_cast<int>(basis.rows());
  return Subspace::span(ScalarProduct::euclidean(n), basis, tol);
}

} // namespace

// --- phi -------------------------------------------------------------------

DeltaField phi_obstruction(const ConstructionState& state) {
  DeltaField out;
  out.grid = state.grid;
  bool first = true;
  for (std::size_t k = 0; k < state.points.size(); ++k) {
    const PairPoint& p = state.points[k];
    if (!p.error.empty()) throw ClaimViolation("pair construction failed at a grid point: " + p.error);
    const int dim = static_cast<int>(p.Delta.cols());
    const int d = static_cast<int>(p.D.cols());
    if (first) {
      out.dim = dim;
      out.d = d;
      out.ell = p.L.rank();
      first = false;
    } else if (dim != out.dim || d != out.d || p.L.rank() != out.ell) {
      throw RankJump("dim Delta (or d, l) changes over the grid: " + std::to_string(out.dim) + " vs " +
                     std::to_string(dim));
    }
    if (dim) out.phi_norm = std::max(out.phi_norm, max_abs(p.phi_rows * p.Delta));
    out.coeffs.push_back(p.Delta);
  }
  out.r = out.dim - out.d;
  return out;
}

// --- Extension -------------------------------------------------------------

Vec Extension::position(std::size_t base, const Vec& t) const {
  const FiberFrame& fr = frames[base];
  return fr.base.x + fr.lambda * t;
}

Vec Extension::position_hat(std::size_t base, const Vec& t) const {
  const FiberFrame& fr = frames[base];
  return fr.base_hat.x + fr.lambda_hat * t;
}

namespace {

PointJet tube_jet(const PointJet& base, const Mat& lambda, const std::vector<Mat>& dlambda, const Vec& t,
                  int order) {
  const int n = base.n();
  const int r = static_cast<int>(lambda.cols());
  const int N = n + r;
  const int m = base.m();
  PointJet j;
  j.x = base.x + lambda * t;
  j.d1.resize(m, N);
  for (int i = 0; i < n; ++i) j.d1.col(i) = base.d1.col(i) + dlambda[i] * t;
  j.d1.rightCols(r) = lambda;
  if (order >= 2) {
    if (!t.isZero()) throw DimensionMismatch("second-order tube jets only exist on the zero section");
    j.d2.assign(static_cast<std::size_t>(N * N), Vec::Zero(m));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) j.d2[i * N + k] = base.second(i, k);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < r; ++a) {
        j.d2[i * N + n + a] = dlambda[i].col(a);
        j.d2[(n + a) * N + i] = dlambda[i].col(a);
      }
  }
  return j;
}

} // namespace

PointJet Extension::jet(std::size_t base, const Vec& t, int order) const {
  const FiberFrame& fr = frames[base];
  return tube_jet(fr.base, fr.lambda, fr.dlambda, t, order);
}

PointJet Extension::jet_hat(std::size_t base, const Vec& t, int order) const {
  const FiberFrame& fr = frames[base];
  return tube_jet(fr.base_hat, fr.lambda_hat, fr.dlambda_hat, t, order);
}

Extension ruled_extension(const PairPipeline& pipe, const ConstructionState& state, const DeltaField& delta,
                          const ExtensionOptions& opt) {
  Extension ext;
  ext.grid = state.grid;
  ext.branch = state.branch;
  ext.n = state.grid.dim();
  const int n = ext.n;
  const Tolerance& tol = pipe.options().tol;
  const ImmersionPtr& left = pipe.working_left(state.branch);
  const ImmersionPtr& right = pipe.right();
  const ScalarProduct& amb = left->ambient();
  const ScalarProduct& ambh = right->ambient();

  // The corrupted-Delta control adjoins a direction of L^perp (and of
  // L-hat^perp on the other side), propagated from the grid centre.
  Vec extra, extra_hat;
  if (opt.corrupt_delta) {
    const PairPoint& pc = state.points[state.grid.center()];
    const LocalGeometry gl = local_geometry(amb, left->point(pc.u, 2), tol);
    const LocalGeometry gr = local_geometry(ambh, right->point(pc.u, 2), tol);
    const Subspace Lperp = complement_within(pc.L, gl.normal, tol);
    const Subspace Lhperp = complement_within(pc.L_hat, gr.normal, tol);
    if (Lperp.rank() == 0 || Lhperp.rank() == 0)
      throw HypothesisOutOfRange("L is the whole normal bundle; no direction to corrupt Delta with");
    extra = Lperp.basis().col(0);
    extra_hat = Lhperp.basis().col(0);
  }
  ext.r = delta.r + (opt.corrupt_delta ? 1 : 0);
  const int r_true = delta.r;
  const int r = ext.r;

  // Lambda as an ambient subspace at a chart point, with the data needed to map it.
  struct Local {
    Subspace Lambda;
    PointJet jf, jg;
    Mat J, Lframe, D, Delta;
    Vec extra, extra_hat;
  };
  auto local_at = [&](const Vec& u) {
    const PairPoint p = pipe.at(u, state.branch);
    if (!p.error.empty()) throw ClaimViolation("pair construction failed near the grid: " + p.error);
    Local lc;
    lc.jf = left->point(u, 2);
    lc.jg = right->point(u, 2);
    lc.J = p.split.J;
    lc.Lframe = p.L_frame.size() ? p.L_frame : Mat(amb.dim(), 0);
    lc.D = p.D;
    lc.Delta = p.Delta;
    Mat lift(amb.dim(), n + lc.Lframe.cols());
    lift << lc.jf.d1, lc.Lframe;
    const Subspace DA = Subspace::span(amb, Mat(lc.jf.d1 * p.D), tol);
    const Subspace DeltaA = Subspace::span(amb, Mat(lift * p.Delta), tol);
    lc.Lambda = complement_within(DA, DeltaA, tol);
    if (lc.Lambda.rank() != r_true)
      throw RankJump("Lambda has rank " + std::to_string(lc.Lambda.rank()) + ", expected " + std::to_string(r_true));
    if (opt.corrupt_delta) {
      const LocalGeometry gl = local_geometry(amb, lc.jf, tol);
      const LocalGeometry gr = local_geometry(ambh, lc.jg, tol);
      lc.extra = (gl.normal_projector - projector(p.L, tol)) * extra;
      lc.extra_hat = (gr.normal_projector - projector(p.L_hat, tol)) * extra_hat;
      lc.extra /= std::sqrt(std::abs(amb.norm2(lc.extra)));
      lc.extra_hat /= std::sqrt(std::abs(ambh.norm2(lc.extra_hat)));
    }
    return lc;
  };
  // lambda-hat = fhat_* Y + T xi for lambda = f_* Y + xi.
  auto hat_of = [&](const Local& lc, const Mat& lambda) {
    const Mat g = lc.jf.d1.transpose() * amb.gram() * lc.jf.d1;
    const Mat Y = g.ldlt().solve(lc.jf.d1.transpose() * amb.gram() * lambda);
    const Mat xi = lambda - lc.jf.d1 * Y;
    const double sign = opt.corrupt_transfer ? -1.0 : 1.0;
    return Mat(lc.jg.d1 * Y + sign * lc.J * xi);
  };

  ext.frames.resize(state.grid.size());
  for_each_index(state.grid.size(), opt.exec, [&](std::size_t k) {
    FiberFrame& fr = ext.frames[k];
    fr.u = state.grid.point(k);
    const Local lc = local_at(fr.u);
    fr.base = lc.jf;
    fr.base.x = left->position(fr.u);
    fr.base_hat = lc.jg;
    fr.base_hat.x = right->position(fr.u);
    fr.ambient = amb;
    fr.ambient_hat = ambh;
    fr.J = lc.J;
    fr.D = lc.D;
    fr.Delta = lc.Delta;
    fr.L = lc.Lframe;
    fr.L_hat = lc.J * lc.Lframe;
    const int m = amb.dim(), mh = ambh.dim();
    Vec signs;
    const Mat W = r_true ? pseudo_orthonormal_basis(lc.Lambda, &signs) : Mat(m, 0);
    // Fiber frame and its image at a chart point near u.
    auto frame_at = [&](const Local& l2) {
      Mat lam = r_true ? polar_orthonormalize(amb, projector(l2.Lambda, tol) * W, signs) : Mat(m, 0);
      Mat out(m + mh, r);
      out.topLeftCorner(m, r_true) = lam;
      out.bottomLeftCorner(mh, r_true) = hat_of(l2, lam);
      if (opt.corrupt_delta) out.col(r - 1) << l2.extra, l2.extra_hat;
      return out;
    };
    const Mat here = frame_at(lc);
    fr.lambda = here.topRows(m);
    fr.lambda_hat = here.bottomRows(mh);
    if (r == 0) {
      fr.dlambda.assign(n, fr.lambda);
      fr.dlambda_hat.assign(n, fr.lambda_hat);
      return;
    }
    auto both = [&](const Vec& v) { return frame_at(local_at(v)); };
    for (int i = 0; i < n; ++i) {
      const Mat d = stencil_derivative(both, fr.u, i, opt.step);
      fr.dlambda.push_back(d.topRows(m));
      fr.dlambda_hat.push_back(d.bottomRows(mh));
    }
  });

  // Fiber samples {-rho, 0, rho}^r.
  ext.fiber_offsets.clear();
  const int count = static_cast<int>(std::pow(3, r));
  double extent = 0.0;
  for (int i = 0; i < n; ++i) extent = std::max(extent, state.grid.hi(i) - state.grid.lo(i));
  if (extent == 0.0) extent = 1.0;
  double rho = opt.radius_fraction * extent;
  for (int attempt = 0;; ++attempt) {
    std::vector<Vec> offs;
    for (int c = 0; c < count; ++c) {
      Vec t(r);
      int q = c;
      for (int a = 0; a < r; ++a) {
        t(a) = (q % 3 - 1) * rho;
        q /= 3;
      }
      offs.push_back(t);
    }
    bool ok = true;
    for (std::size_t k = 0; k < ext.frames.size() && ok; ++k)
      for (const Vec& t : offs) {
        for (int side = 0; side < 2 && ok; ++side) {
          const PointJet j = side ? ext.jet_hat(k, t) : ext.jet(k, t);
          const ScalarProduct& a = side ? ambh : amb;
          const Mat g = j.d1.transpose() * a.gram() * j.d1;
          const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().cwiseAbs();
          if (ev.minCoeff() < opt.immersion_threshold * std::max(1.0, ev.maxCoeff())) ok = false;
        }
        if (!ok) break;
      }
    if (ok) {
      ext.fiber_offsets = std::move(offs);
      ext.radius = rho;
      ext.halvings = attempt;
      break;
    }
    if (attempt >= opt.max_halvings)
      throw NotImmersionAtRadius("ruled extension is not an immersion at radius " + std::to_string(rho));
    rho *= 0.5;
  }
  return ext;
}

// --- Verification ----------------------------------------------------------

double delta_tm_residual(const Mat& Delta, const Mat& D, const Tolerance& tol) {
  const int n = static_cast<int>(D.rows());
  const int ell = static_cast<int>(Delta.rows()) - n;
  Mat Y = Delta.topRows(n);
  if (ell && Delta.cols()) Y = Delta.topRows(n) * kernel(Delta.bottomRows(ell), static_cast<int>(Delta.cols()), tol.loosened());
  return subspace_distance(chart_span(Y, tol), chart_span(D, tol));
}

ExtensionReport verify_extension(const Extension& ext, const ConstructionState& state) {
  ExtensionReport rep;
  rep.trivial = ext.r == 0;
  rep.base = verify_C1C2(state);
  if (state.frames_built)
    for (double b : state.D.integrability_residual) rep.bracket_residual = std::max(rep.bracket_residual, b);
  const int n = ext.n, r = ext.r, N = n + r;
  const Tolerance tol;
  rep.zero_section_exact = true;
  rep.min_metric_eigenvalue = INFINITY;
  for (std::size_t k = 0; k < ext.frames.size(); ++k) {
    const FiberFrame& fr = ext.frames[k];
    const ScalarProduct& amb = fr.ambient;
    const ScalarProduct& ambh = fr.ambient_hat;
    const Vec zero = Vec::Zero(r);
    const Vec x0 = ext.position(k, zero), y0 = ext.position_hat(k, zero);
    rep.zero_section_exact = rep.zero_section_exact && x0 == fr.base.x && y0 == fr.base_hat.x;

    for (int a = 0; a < r; ++a) {
      const Vec e = Vec::Unit(r, a) * ext.radius;
      const double s = std::max(1.0, x0.norm());
      rep.straightness = std::max(rep.straightness, (ext.position(k, e) - 2.0 * x0 + ext.position(k, -e)).norm() / s);
      const double sh = std::max(1.0, y0.norm());
      rep.straightness =
          std::max(rep.straightness, (ext.position_hat(k, e) - 2.0 * y0 + ext.position_hat(k, -e)).norm() / sh);
    }
    for (const Vec& t : ext.fiber_offsets) {
      const PointJet j = ext.jet(k, t), jh = ext.jet_hat(k, t);
      const Mat g = j.d1.transpose() * amb.gram() * j.d1;
      const Mat gh = jh.d1.transpose() * ambh.gram() * jh.d1;
      rep.metric_residual = std::max(rep.metric_residual, max_abs(g - gh) / std::max(1.0, max_abs(g)));
      rep.min_metric_eigenvalue = std::min(
          rep.min_metric_eigenvalue, Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().cwiseAbs().minCoeff());
      if (ext.branch == Branch::degenerate) {
        const Vec x = ext.position(k, t), y = ext.position_hat(k, t);
        rep.position_residual = std::max(rep.position_residual, std::abs(amb.norm2(x) - ambh.norm2(y)));
      }
    }

    // Second fundamental forms of F and Fhat on the zero section.
    const LocalGeometry gF = local_geometry(amb, ext.jet(k, zero, 2), tol);
    const LocalGeometry gH = local_geometry(ambh, ext.jet_hat(k, zero, 2), tol);
    const LocalGeometry gf = local_geometry(amb, fr.base, tol);
    const LocalGeometry gfh = local_geometry(ambh, fr.base_hat, tol);
    const Subspace L = Subspace::span(amb, fr.L, tol);
    const Subspace Lh = Subspace::span(ambh, fr.L_hat, tol);
    const Mat PL = projector(L, tol), PLh = projector(Lh, tol);
    const Mat Q = gf.normal_projector - PL;
    const Mat Qh = gfh.normal_projector - PLh;

    // (inc): Delta, in (u, t) coordinates D (+) fiber axes, is the common
    // nullity of the L^perp components.
    Mat E = Mat::Zero(N, fr.D.cols() + r);
    E.topLeftCorner(n, fr.D.cols()) = fr.D;
    E.bottomRightCorner(r, r) = Mat::Identity(r, r);
    E = column_space(E, tol);
    const int m = amb.dim(), mh = ambh.dim();
    Mat rows(N * (m + mh), N);
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i) {
        rows.block(j * (m + mh), i, m, 1) = Q * gF.alpha(i, j);
        rows.block(j * (m + mh) + m, i, mh, 1) = Qh * gH.alpha(i, j);
      }
    rep.inc_residual = std::max(rep.inc_residual, max_abs(rows * E));
    const Mat K = kernel(rows, N, tol.loosened());
    rep.inc_residual = std::max(rep.inc_residual, subspace_distance(chart_span(K, tol), chart_span(E, tol)));

    rep.inter_residual = std::max(rep.inter_residual, delta_tm_residual(fr.Delta, fr.D, tol));
    const int ell = static_cast<int>(fr.L.cols());

    // Transfer on the part of L that stays normal to F.
    if (ell) {
      const Subspace piL = Subspace::span(amb, Mat(PL * fr.lambda), tol);
      const Subspace calL = complement_within(piL, L, tol);
      if (calL.rank()) {
        const Subspace calLh = image(fr.J, calL, ambh, tol);
        const Mat P = projector(calL, tol), Ph = projector(calLh, tol);
        for (int i = 0; i < N; ++i)
          for (int j = 0; j < N; ++j)
            rep.transfer_residual =
                std::max(rep.transfer_residual, (Ph * gH.alpha(i, j) - fr.J * P * gF.alpha(i, j)).norm());
      }
    }
  }
  return rep;
}

// --- Slice generator -------------------------------------------------------

namespace {

const ClosedFormImmersion& closed_form(const ImmersionPtr& f, const char* what) {
  const auto* c = dynamic_cast<const ClosedFormImmersion*>(f.get());
  if (!c) throw HypothesisOutOfRange(std::string(what) + " must be given in closed form");
  return *c;
}

Jet jet_norm2(const ScalarProduct& amb, const JetVec& y) {
  const Mat& G = amb.gram();
  Jet acc = 0.0 * y[0];
  for (int a = 0; a < amb.dim(); ++a)
    for (int b = 0; b < amb.dim(); ++b)
      if (G(a, b) != 0.0) acc += G(a, b) * (y[a] * y[b]);
  return acc;
}

// x -> (t(x), x) with <Fhat(t(x), x), Fhat(t(x), x)> = 0, t inserted at `axis`.
class LevelSetChart : public Immersion {
public:
  LevelSetChart(const ClosedFormImmersion& Fhat, SliceOptions opt)
      : map_(Fhat.map()), amb_(Fhat.ambient()), n_(Fhat.dim() - 1), opt_(opt),
        euclid_(ScalarProduct::euclidean(Fhat.dim())) {}

  int dim() const override { return n_; }
  const ScalarProduct& ambient() const override { return euclid_; }
  std::string name() const override { return "level-set-chart"; }

  double level(double t, const Vec& x) const {
    const JetVec y = seed(to_std(insert(t, x)), 0);
    return jet_norm2(amb_, map_(y)).value();
  }
  double level_dt(double t, const Vec& x) const {
    const JetVec y = seed(to_std(insert(t, x)), 1);
    return jet_norm2(amb_, map_(y)).d(opt_.axis);
  }

  double root(const Vec& x) const {
    const int N = std::max(opt_.samples, 2);
    std::vector<double> ts(N + 1), hs(N + 1);
    double hmax = 0.0;
    for (int i = 0; i <= N; ++i) {
      ts[i] = opt_.lo + (opt_.hi - opt_.lo) * i / N;
      hs[i] = level(ts[i], x);
      hmax = std::max(hmax, std::abs(hs[i]));
    }
    if (hmax < 1e-14) throw NotTransversal("<Fhat, Fhat> vanishes identically along the search line");
    for (int i = 0; i < N; ++i) {
      if (hs[i] == 0.0) return ts[i];
      if ((hs[i] < 0.0) != (hs[i + 1] < 0.0)) return refine(ts[i], ts[i + 1], hs[i], x);
    }
    if (hs[N] == 0.0) return ts[N];
    throw NoIntersection("no sign change of <Fhat, Fhat> on [" + std::to_string(opt_.lo) + ", " +
                         std::to_string(opt_.hi) + "]");
  }

  JetVec jets(const Vec& x, int order) const override {
    if (x.size() != n_) throw DimensionMismatch("slice chart point has wrong dimension");
    const double t0 = root(x);
    const double c = level_dt(t0, x);
    if (std::abs(c) < opt_.transversality_threshold)
      throw NotTransversal("d<Fhat, Fhat>/dt vanishes on the slice");
    const JetVec xs = seed(to_std(x), order);
    Jet T = Jet::constant(t0, n_, order);
    // Chord iteration on jets: each step fixes one more order of t(x).
    for (int it = 0; it <= order; ++it) {
      const Jet h = jet_norm2(amb_, map_(assemble(T, xs)));
      T -= h / c;
    }
    return assemble(T, xs);
  }

private:
  JetMap map_;
  ScalarProduct amb_;
  int n_;
  SliceOptions opt_;
  ScalarProduct euclid_;

  static std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

  Vec insert(double t, const Vec& x) const {
    Vec y(n_ + 1);
    int k = 0;
    for (int i = 0; i <= n_; ++i) y(i) = i == opt_.axis ? t : x(k++);
    return y;
  }
  JetVec assemble(const Jet& T, const JetVec& xs) const {
    JetVec y;
    int k = 0;
    for (int i = 0; i <= n_; ++i) y.push_back(i == opt_.axis ? T : xs[k++]);
    return y;
  }
  double refine(double a, double b, double ha, const Vec& x) const {
    double t = 0.5 * (a + b);
    for (int it = 0; it < 200 && b - a > opt_.root_tolerance; ++it) {
      const double h = level(t, x);
      if (h == 0.0) return t;
      if ((h < 0.0) == (ha < 0.0)) {
        a = t;
        ha = h;
      } else {
        b = t;
      }
      // Newton step when it stays inside the bracket, bisection otherwise.
      const double dh = level_dt(t, x);
      const double tn = dh != 0.0 ? t - h / dh : a - 1.0;
      t = (tn > a && tn < b) ? tn : 0.5 * (a + b);
    }
    // One last Newton polish at the converged point.
    const double dh = level_dt(t, x);
    if (dh != 0.0) {
      const double tn = t - level(t, x) / dh;
      if (tn >= a && tn <= b) t = tn;
    }
    return t;
  }
};

} // namespace

std::vector<TransversalityFlag> transversality_check(const ImmersionPtr& Fhat, const std::vector<Vec>& points,
                                                     double threshold) {
  std::vector<TransversalityFlag> out;
  for (const Vec& y : points) {
    const PointJet j = Fhat->point(y, 1);
    const Vec grad = 2.0 * j.d1.transpose() * Fhat->ambient().gram() * j.x;
    TransversalityFlag f;
    f.gradient = grad.norm();
    f.ok = f.gradient > threshold;
    out.push_back(f);
  }
  return out;
}

SliceData generate_conformal_pair(const ImmersionPtr& Fp, const ImmersionPtr& Fhat, const Grid& slice_grid,
                                  const SliceOptions& opt) {
  const ClosedFormImmersion& Fpc = closed_form(Fp, "F'");
  const ClosedFormImmersion& Fhc = closed_form(Fhat, "Fhat");
  if (Fp->dim() != Fhat->dim()) throw DimensionMismatch("F' and Fhat need the same chart");
  if (slice_grid.dim() != Fp->dim() - 1) throw DimensionMismatch("slice grid must have dimension n = dim F' - 1");
  if (!Fhat->ambient().light_cone_pair()) throw DimensionMismatch("Fhat must map into Lorentz space");
  if (opt.axis < 0 || opt.axis > slice_grid.dim()) throw DimensionMismatch("slice axis out of range");

  SliceData out;
  out.grid = slice_grid;
  auto chart = std::make_shared<LevelSetChart>(Fhc, opt);
  out.chart = chart;
  const std::size_t K = slice_grid.size();
  out.roots.resize(K);
  out.level_residual.resize(K);
  out.gradient.resize(K);
  std::vector<std::exception_ptr> errors(K);
  for_each_index(K, opt.exec, [&](std::size_t k) {
    const Vec x = slice_grid.point(k);
    try {
      out.roots[k] = chart->root(x);
    } catch (const Error&) {
      errors[k] = std::current_exception();
      return;
    }
    Vec y(x.size() + 1);
    int c = 0;
    for (int i = 0; i < y.size(); ++i) y(i) = i == opt.axis ? out.roots[k] : x(c++);
    out.level_residual[k] = std::abs(chart->level(out.roots[k], x));
    out.gradient[k] = transversality_check(Fhat, {y}, opt.transversality_threshold)[0].gradient;
    const Mat g1 = [&] {
      const PointJet j = Fp->point(y, 1);
      return Mat(j.d1.transpose() * Fp->ambient().gram() * j.d1);
    }();
    const PointJet jh = Fhat->point(y, 1);
    const Mat g2 = jh.d1.transpose() * Fhat->ambient().gram() * jh.d1;
    if (max_abs(g1 - g2) > opt.metric_tolerance * std::max(1.0, max_abs(g1)))
      errors[k] = std::make_exception_ptr(NotIsometricPair("F' and Fhat induce different metrics on the slice"));
  });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  out.transversal = true;
  for (double g : out.gradient)
    if (!(g > opt.transversality_threshold)) out.transversal = false;
  if (!out.transversal) throw NotTransversal("Fhat is tangent to the light cone on the slice");

  out.f = std::make_shared<ComposedImmersion>("slice(" + Fp->name() + ")", Fpc.map(), Fp->ambient(), chart);
  out.f_cone = std::make_shared<ComposedImmersion>("slice(" + Fhat->name() + ")", Fhc.map(), Fhat->ambient(), chart);
  out.f_bar = cone_projection(out.f_cone);
  out.factor = conformal_factor(sample(out.f, slice_grid, 1, opt.exec), sample(out.f_bar, slice_grid, 1, opt.exec),
                                opt.metric_tolerance);
  return out;
}

} // namespace cdef
