#pragma once

// Closed-form immersions used by the gallery, the tests and the CLI.

#include <string>
#include <vector>

#include "cdef/immersion.hpp"

namespace cdef {

/// x -> (x, 0) in R^m.
ImmersionPtr plane(int n, int m);
/// Upper hemisphere of radius r over the ball, as a graph in R^{n+1}.
ImmersionPtr sphere(int n, double r = 1.0);
/// (s, y) -> (r cos(s/r), r sin(s/r), y) in R^{n+1}: unit speed, curvature 1/r.
ImmersionPtr cylinder(int n, double r = 1.0);
/// (t, y) -> t (y, sqrt(1 - |y|^2), 1) / sqrt 2 in R^{n+1}: cone over a round sphere.
ImmersionPtr cone_over_sphere(int n);
/// Torus of revolution in R^3.
ImmersionPtr torus(double R, double r);
/// (s, y) -> (a cos(s/a), a sin(s/a), b cos(y/b), b sin(y/b)) in R^4: flat.
ImmersionPtr flat_torus(double a, double b);
/// x -> (x, 1/2 sum_i K(a,i) x_i^2)_a : principal curvatures K(a, i) at the origin.
ImmersionPtr quadric_graph(const Mat& K);
/// c + (y - c)/|y - c|^2 applied to f.
ImmersionPtr inversion(const ImmersionPtr& f, const Vec& c);
/// Rigid motion y -> R y + b applied to f.
ImmersionPtr rigid_motion(const ImmersionPtr& f, const Mat& R, const Vec& b);

/// Psi(x) + t v in L^{N+2}, chart (t, x_1..x_n) with x embedded in R^N by
/// zero padding. v is given in the light-cone basis.
ImmersionPtr lorentz_slice_family(int n, int N, const Vec& v);

/// Data of the generated degenerate pair: F' (a cylinder over the (t, x)
/// chart, isometric to Fhat = Psi(x) + t v with v = (e2 + e6)/2) and its
/// slice along t = -2 x_1.
struct GeneratedPair {
  ImmersionPtr F_prime;   ///< 5-dimensional, in R^6
  ImmersionPtr F_hat;     ///< 5-dimensional, in L^7
  ImmersionPtr f;         ///< F' on the slice, 4-dimensional
  ImmersionPtr f_hat;     ///< Fhat on the slice, inside the light cone
  double radius = 1.0;
};
GeneratedPair generated_pair(double radius = 1.0);

struct BuiltinInfo {
  std::string name;
  std::string parameters;
  std::string description;
};
const std::vector<BuiltinInfo>& builtin_catalog();

} // namespace cdef
