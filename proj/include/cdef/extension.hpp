#pragma once

// Ruled extensions of an isometric pair along Delta = N(phi), their
// verification, and the light-cone slice generator for conformal pairs.

#include <vector>

#include "cdef/pair.hpp"

namespace cdef {

/// Delta = N(phi) over a construction grid.
struct DeltaField {
  Grid grid;
  std::vector<Mat> coeffs;   ///< (n + l) x dim on (d_1..d_n, L frame) per point
  int dim = 0, d = 0, r = 0, ell = 0;
  double phi_norm = 0.0;     ///< max |phi| on the computed Delta
};

/// Collects Delta from the pipeline points. Throws RankJump when dim Delta or
/// d changes over the grid and ClaimViolation when a point failed.
DeltaField phi_obstruction(const ConstructionState& state);

struct ExtensionOptions {
  /// Initial fiber radius as a fraction of the grid extent (1 for point grids).
  double radius_fraction = 0.1;
  int max_halvings = 8;
  /// Stencil step for chart derivatives of the fiber frame.
  double step = 1e-3;
  /// Smallest |eigenvalue| of the induced metric on the tube, relative.
  double immersion_threshold = 1e-3;
  /// Negative controls: adjoin a direction of L^perp (L-hat^perp for Fhat)
  /// to the fibers, or use -T on the fibers of Fhat.
  bool corrupt_delta = false;
  bool corrupt_transfer = false;
  Exec exec = default_exec();
};

/// Fiber frame at one base point: lambda_a = f_* Y_a + xi_a and its image
/// fhat_* Y_a + T xi_a, with chart derivatives.
struct FiberFrame {
  Vec u;
  PointJet base, base_hat;
  Mat lambda, lambda_hat;
  std::vector<Mat> dlambda, dlambda_hat;
  Mat Delta;      ///< (n + l) x dim coefficients of Delta
  Mat D;
  Mat L, L_hat;   ///< frames of L and T L
  Mat J;
  ScalarProduct ambient, ambient_hat;
};

/// F(u, t) = f(u) + sum t_a lambda_a(u) and Fhat likewise, sampled on the
/// base grid times {-rho, 0, rho}^r.
struct Extension {
  Grid grid;
  Branch branch = Branch::nondegenerate;
  int n = 0, r = 0;
  double radius = 0.0;
  int halvings = 0;
  std::vector<FiberFrame> frames;
  std::vector<Vec> fiber_offsets;   ///< the 3^r sample offsets t

  Vec position(std::size_t base, const Vec& t) const;
  Vec position_hat(std::size_t base, const Vec& t) const;
  /// Chart (u, t) jets. Order 2 is only available on the zero section.
  PointJet jet(std::size_t base, const Vec& t, int order = 1) const;
  PointJet jet_hat(std::size_t base, const Vec& t, int order = 1) const;
};

/// Throws NotImmersionAtRadius when the tube is not immersed even after
/// max_halvings reductions of the radius.
Extension ruled_extension(const PairPipeline& pipe, const ConstructionState& state, const DeltaField& delta,
                          const ExtensionOptions& opt = {});

struct ExtensionReport {
  bool trivial = false;            ///< r = 0
  bool zero_section_exact = false; ///< F(u, 0) == f(u) and Fhat(u, 0) == fhat(u) bitwise
  double straightness = 0.0;       ///< fiber second differences
  double metric_residual = 0.0;    ///< |g_F - g_Fhat| on the tube
  double inc_residual = 0.0;       ///< Delta against N(alpha^F_{L^perp}) cap N(alpha^Fhat_{Lhat^perp})
  double inter_residual = 0.0;     ///< Delta cap TM against D
  double transfer_residual = 0.0;  ///< alpha^Fhat on the remaining part of L-hat against T alpha^F
  double position_residual = 0.0; ///< |<F,F> - <Fhat,Fhat>| (cone extensions)
  double bracket_residual = 0.0;   ///< integrability of D
  C1C2Report base;
  double min_metric_eigenvalue = 0.0;
};

/// Distance between Delta cap TM and D; Delta on coefficients (Y, c) as
/// produced by the pipeline, D an n x d chart basis.
double delta_tm_residual(const Mat& Delta, const Mat& D, const Tolerance& tol = {});

ExtensionReport verify_extension(const Extension& ext, const ConstructionState& state);

// --- Slice generator -------------------------------------------------------

struct SliceOptions {
  int axis = 0;              ///< chart axis of the (n+1)-dimensional family solved for
  double lo = -1.0, hi = 1.0;///< search interval for the slice parameter
  int samples = 64;
  double root_tolerance = 1e-12;
  double transversality_threshold = 1e-8;
  double metric_tolerance = 1e-6;
  Exec exec = default_exec();
};

struct SliceData {
  Grid grid;                          ///< n-dimensional slice chart
  std::vector<double> roots;
  std::vector<double> level_residual; ///< |<Fhat, Fhat>| at the root
  std::vector<double> gradient;       ///< |d<Fhat, Fhat>| at the root
  bool transversal = false;
  ImmersionPtr chart;                 ///< x -> (t(x), x) into the (n+1)-chart
  ImmersionPtr f;                     ///< F' on the slice
  ImmersionPtr f_cone;                ///< Fhat on the slice (inside the light cone)
  ImmersionPtr f_bar;                 ///< C(Fhat on the slice)
  ConformalFactor factor;             ///< metric(f_bar) = phi^2 metric(f)
};

/// Needs closed-form F' and Fhat on the same (n+1)-chart. Throws
/// NoIntersection, NotTransversal or NotIsometricPair.
SliceData generate_conformal_pair(const ImmersionPtr& Fp, const ImmersionPtr& Fhat, const Grid& slice_grid,
                                  const SliceOptions& opt = {});

struct TransversalityFlag {
  double gradient = 0.0;
  bool ok = false;
};

/// |d<Fhat, Fhat>| at each (n+1)-chart point.
std::vector<TransversalityFlag> transversality_check(const ImmersionPtr& Fhat, const std::vector<Vec>& points,
                                                     double threshold = 1e-8);

} // namespace cdef
