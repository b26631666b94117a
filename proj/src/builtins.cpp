#include "cdef/builtins.hpp"

#include <cmath>

#include "cdef/errors.hpp"
#include "cdef/lightcone.hpp"

namespace cdef {

ImmersionPtr plane(int n, int m) {
  if (m < n) throw DimensionMismatch("plane needs m >= n");
  return std::make_shared<ClosedFormImmersion>("plane", n, ScalarProduct::euclidean(m), [m](const JetVec& x) {
    JetVec out(x.begin(), x.end());
    while (static_cast<int>(out.size()) < m) out.push_back(0.0 * x[0]);
    return out;
  });
}

ImmersionPtr sphere(int n, double r) {
  return std::make_shared<ClosedFormImmersion>("sphere", n, ScalarProduct::euclidean(n + 1), [n, r](const JetVec& x) {
    JetVec out(x.begin(), x.end());
    Jet r2 = x[0] * x[0];
    for (int i = 1; i < n; ++i) r2 += x[i] * x[i];
    out.push_back(sqrt(r * r - r2));
    return out;
  });
}

ImmersionPtr cylinder(int n, double r) {
  return std::make_shared<ClosedFormImmersion>("cylinder", n, ScalarProduct::euclidean(n + 1), [r](const JetVec& x) {
    JetVec out{r * cos(x[0] / r), r * sin(x[0] / r)};
    for (std::size_t i = 1; i < x.size(); ++i) out.push_back(x[i]);
    return out;
  });
}

ImmersionPtr cone_over_sphere(int n) {
  if (n < 2) throw DimensionMismatch("cone over a sphere needs n >= 2");
  return std::make_shared<ClosedFormImmersion>(
      "cone-over-sphere", n, ScalarProduct::euclidean(n + 1), [n](const JetVec& x) {
        const double s = 1.0 / std::sqrt(2.0);
        Jet r2 = x[1] * x[1];
        for (int i = 2; i < n; ++i) r2 += x[i] * x[i];
        JetVec out;
        for (int i = 1; i < n; ++i) out.push_back(s * x[0] * x[i]);
        out.push_back(s * x[0] * sqrt(1.0 - r2));
        out.push_back(s * x[0]);
        return out;
      });
}

ImmersionPtr torus(double R, double r) {
  return std::make_shared<ClosedFormImmersion>("torus", 2, ScalarProduct::euclidean(3), [R, r](const JetVec& x) {
    const Jet rho = R + r * cos(x[1]);
    return JetVec{rho * cos(x[0]), rho * sin(x[0]), r * sin(x[1])};
  });
}

ImmersionPtr flat_torus(double a, double b) {
  return std::make_shared<ClosedFormImmersion>("flat-torus", 2, ScalarProduct::euclidean(4), [a, b](const JetVec& x) {
    return JetVec{a * cos(x[0] / a), a * sin(x[0] / a), b * cos(x[1] / b), b * sin(x[1] / b)};
  });
}

ImmersionPtr quadric_graph(const Mat& K) {
  const int n = static_cast<int>(K.cols());
  const int p = static_cast<int>(K.rows());
  return std::make_shared<ClosedFormImmersion>("quadric-graph", n, ScalarProduct::euclidean(n + p),
                                               [K, n, p](const JetVec& x) {
                                                 JetVec out(x.begin(), x.end());
                                                 for (int a = 0; a < p; ++a) {
                                                   Jet h = 0.5 * K(a, 0) * x[0] * x[0];
                                                   for (int i = 1; i < n; ++i) h += 0.5 * K(a, i) * x[i] * x[i];
                                                   out.push_back(h);
                                                 }
                                                 return out;
                                               });
}

ImmersionPtr inversion(const ImmersionPtr& f, const Vec& c) {
  const int m = f->ambient().dim();
  if (c.size() != m) throw DimensionMismatch("inversion centre has the wrong dimension");
  return std::make_shared<ComposedImmersion>(
      "inversion(" + f->name() + ")",
      [c, m](const JetVec& y) {
        Jet r2 = square(y[0] - c(0));
        for (int a = 1; a < m; ++a) r2 += square(y[a] - c(a));
        JetVec out;
        for (int a = 0; a < m; ++a) out.push_back(c(a) + (y[a] - c(a)) / r2);
        return out;
      },
      f->ambient(), f);
}

ImmersionPtr rigid_motion(const ImmersionPtr& f, const Mat& R, const Vec& b) {
  const int m = f->ambient().dim();
  if (R.rows() != m || R.cols() != m || b.size() != m) throw DimensionMismatch("rigid motion has the wrong size");
  return std::make_shared<ComposedImmersion>(
      "moved(" + f->name() + ")",
      [R, b, m](const JetVec& y) {
        JetVec out;
        for (int a = 0; a < m; ++a) {
          Jet s = R(a, 0) * y[0] + b(a);
          for (int c = 1; c < m; ++c) s += R(a, c) * y[c];
          out.push_back(s);
        }
        return out;
      },
      f->ambient(), f);
}

ImmersionPtr lorentz_slice_family(int n, int N, const Vec& v) {
  if (N < n || v.size() != N + 2) throw DimensionMismatch("slice family needs N >= n and v in L^{N+2}");
  const LightConeModel model(N);
  return std::make_shared<ClosedFormImmersion>("psi+tv", n + 1, model.ambient(), [model, n, N, v](const JetVec& y) {
    JetVec x(y.begin() + 1, y.end());
    while (static_cast<int>(x.size()) < N) x.push_back(0.0 * y[0]);
    JetVec out = model.psi(x);
    for (int a = 0; a < N + 2; ++a) out[a] += v(a) * y[0];
    return out;
  });
}

GeneratedPair generated_pair(double radius) {
  GeneratedPair g;
  g.radius = radius;
  const double s = 1.0 / std::sqrt(2.0);
  const double R = radius;
  // Chart (t, x1, x2, x3, x4).
  JetMap Fp = [s, R](const JetVec& y) {
    return JetVec{s * (y[0] + y[1]), s * y[1], R * cos(y[2] / R), R * sin(y[2] / R), y[3], y[4]};
  };
  g.F_prime = std::make_shared<ClosedFormImmersion>("generated-F'", 5, ScalarProduct::euclidean(6), Fp);
  Vec v = Vec::Zero(7);
  v(2) = 0.5;
  v(6) = 0.5;
  g.F_hat = lorentz_slice_family(4, 5, v);
  auto slice = std::make_shared<ClosedFormImmersion>(
      "slice", 4, ScalarProduct::euclidean(5),
      [](const JetVec& x) { return JetVec{-2.0 * x[0], x[0], x[1], x[2], x[3]}; });
  g.f = std::make_shared<ComposedImmersion>("generated-f", Fp, ScalarProduct::euclidean(6), slice);
  const auto Fh = std::static_pointer_cast<const ClosedFormImmersion>(g.F_hat);
  g.f_hat = std::make_shared<ComposedImmersion>("generated-fhat", Fh->map(), Fh->ambient(), slice);
  return g;
}

const std::vector<BuiltinInfo>& builtin_catalog() {
  static const std::vector<BuiltinInfo> cat = {
      {"plane", "n >= 1, m >= n", "x -> (x, 0) in R^m"},
      {"sphere", "n >= 1, r > 0, |x| < r", "hemisphere graph of radius r in R^{n+1}"},
      {"cylinder", "n >= 1, r > 0", "S^1(r) x R^{n-1} in R^{n+1}, unit speed"},
      {"cone-over-sphere", "n >= 2, t != 0, |y| < 1", "cone over a round (n-1)-sphere in R^{n+1}"},
      {"torus", "R > r > 0", "torus of revolution in R^3"},
      {"flat-torus", "a, b > 0", "product of circles of radii a and b in R^4"},
      {"quadric-graph", "K: p x n curvatures", "graph of quadrics with principal curvatures K at 0"},
      {"inversion", "f, centre c off f(M)", "inversion in the unit sphere about c composed with f"},
      {"rigid-motion", "f, R orthogonal, b", "R f + b"},
      {"psi-lift", "f Euclidean", "Psi o f into the light cone"},
      {"isometric-representative", "f, optional base conformal to f", "I(f) in the light cone, isometric to the base"},
      {"cone-projection", "g into the light cone", "C(g) back in Euclidean space"},
      {"finite-difference", "f, step h", "f with jets from central differences of positions"},
      {"lorentz-slice", "n <= N, v in L^{N+2}", "(t, x) -> Psi(x) + t v"},
      {"generated-pair", "R > 0", "cylinder F' and Psi(x) + t(e2+e6)/2 sliced along t = -2 x1"},
  };
  return cat;
}

} // namespace cdef
