#pragma once

// Fiberwise construction of the shared normal subbundle L and the ruling
// distribution D for an isometric pair {f, fhat}, in both the nondegenerate
// and the light-cone degenerate branch, with the runtime checks that go
// with it.

#include <array>
#include <map>
#include <optional>
#include <string>

#include "cdef/jets.hpp"

namespace cdef {

enum class Branch { automatic, nondegenerate, degenerate };
std::string to_string(Branch b);

struct PairOptions {
  Tolerance tol;
  /// Stencil step for derivatives of constructed sections. Jets obtained by
  /// finite differences want a larger step (1e-2).
  double step = 1e-3;
  Branch branch = Branch::automatic;
  double claim_tolerance = 1e-6;
  /// Relative tolerance on |g - ghat| for the isometric-pair precondition.
  double metric_tolerance = 1e-6;
  Exec exec = default_exec();
  /// Negative control: rotate T on L by this angle before the (C1) checks.
  double corrupt_isometry = 0.0;
};

/// The joint normal space at a point: T^perp_f (+) T^perp_fhat with
/// <<,>> = <,>_f - <,>_fhat, and alpha (+) alpha-hat.
struct JointNormalSpace {
  LocalGeometry left, right;
  ScalarProduct metric;
  BilinearSample alpha_sum;
  Subspace span;     ///< S(alpha (+) alpha-hat)
  Subspace radical;  ///< span intersected with its orthogonal complement

  int m() const { return left.ambient.dim(); }
  int mhat() const { return right.ambient.dim(); }
};

/// Throws NotIsometricPair when the induced metrics differ.
JointNormalSpace build_joint(const ScalarProduct& left, const PointJet& jf, const ScalarProduct& right,
                             const PointJet& jg, const PairOptions& opt = {});

struct DegeneracyVerdict {
  bool degenerate = false;
  int omega_rank = 0;
  int left_projection_rank = 0;
  int right_projection_rank = 0;
  /// Kernel witness (0, xi0) of the left projection, as a right ambient vector;
  /// rescaled so <fhat, xi0> = 1 when the pairing is nonzero.
  Vec xi0;
  double position_pairing = 0.0;   ///< <fhat, xi0> after rescaling
  bool normalized = false;
};

DegeneracyVerdict degeneracy_test(const JointNormalSpace& js, const Tolerance& tol = {});

struct GammaSplitting {
  Subspace Omega;   ///< joint
  Subspace Gamma, GammaPerp, GammaHat, GammaHatPerp;
  /// Ambient matrix (mhat x m) acting as J on GammaPerp.
  Mat J;
  double graph_residual = 0.0;   ///< distance between pr_1(Omega) and GammaPerp (and hatted)
  double star_residual = 0.0;    ///< |alpha-hat_{GammaHat^perp} - J alpha_{Gamma^perp}|
  double null_residual = 0.0;    ///< |<<Omega, Omega>>|
};

/// Splittings and J. In the degenerate branch `left_position` and
/// `right_position` (f' and fhat) are adjoined to Omega and to the spans.
/// Throws SplitFailure when Omega is not a graph over GammaPerp.
GammaSplitting gamma_splitting(const JointNormalSpace& js, const Tolerance& tol = {},
                               const Vec* left_position = nullptr, const Vec* right_position = nullptr);

struct ClaimReport {
  bool claim1 = false;   ///< S Lorentzian
  bool claim2 = false;   ///< K(Z) = 0 on Theta and S0 Lorentzian
  bool claim3 = false;   ///< S1 = S(gamma)
  bool claim4 = false;   ///< d > 0 and L Lorentzian
  bool position_in_L = false;
  double K_theta_residual = 0.0;
  double s1_span_residual = 0.0;
  double position_residual = 0.0;   ///< distance of f' from L
  double th0_residual = 0.0;        ///< <alpha'(Z,Z), f'> + |Z|^2 on Theta
  double J_position_residual = 0.0; ///< |J f' - fhat|
  double J_e0_residual = 0.0;       ///< |J e0 - xi0|
  bool s1_riemannian = false;
  int s1_dim = 0;
  bool all() const { return claim1 && claim2 && claim3 && claim4 && position_in_L; }
};

/// Everything the construction produces at one chart point.
struct PairPoint {
  Vec u;
  Branch branch = Branch::nondegenerate;
  DegeneracyVerdict degeneracy;   ///< of the original pair
  GammaSplitting split;
  Mat Theta;                      ///< n x theta chart basis
  Subspace S, S_hat, S0, S1, L, L_hat;
  std::vector<Mat> K;             ///< K(d_i) in the pseudo-orthonormal S frame
  Mat S_frame;
  Mat D;                          ///< n x d chart basis
  int dim_beta_span = 0;
  bool s_riemannian = false;
  double theta_identity_residual = 0.0;
  double K_skew_residual = 0.0;
  double c1_sff_residual = 0.0;
  double c1_parallel_residual = 0.0;
  double c2_residual = 0.0;
  /// Pseudo-orthonormal L frame seeded here, and its image under T.
  Mat L_frame, L_frame_hat;
  /// Rows of phi(Y + xi, d_j) stacked over j, on coefficients (Y, c) with
  /// xi = L_frame c; Delta = N(phi) as an (n + l) x dim matrix.
  Mat phi_rows;
  Mat Delta;
  std::optional<ClaimReport> claims;
  std::string error;              ///< non-empty when the construction failed here

  /// omega, gamma, gamma_hat, theta, S, S0, S1, L, D.
  std::array<int, 9> ranks() const;
};

/// Pointwise evaluator for an isometric pair. In the degenerate branch the
/// left immersion is replaced by its light-cone lift f' = Psi o f.
class PairPipeline {
public:
  PairPipeline(ImmersionPtr f, ImmersionPtr fhat, PairOptions opt = {});

  /// Branch decided at the given point (forced by the options if set).
  Branch decide_branch(const Vec& u) const;
  PairPoint at(const Vec& u, Branch branch) const;
  PairPoint at(const Vec& u) const { return at(u, decide_branch(u)); }

  const ImmersionPtr& left() const { return left_; }
  const ImmersionPtr& original_left() const { return f_; }
  const ImmersionPtr& right() const { return fhat_; }
  const PairOptions& options() const { return opt_; }
  /// Left immersion actually used by the given branch.
  const ImmersionPtr& working_left(Branch b) const { return b == Branch::degenerate ? lift_ : f_; }

  /// Subspace-valued stage results at lattice points around a base point.
  struct Fiber;
  struct Cache;

private:
  ImmersionPtr f_, fhat_, lift_, left_;
  PairOptions opt_;

  const Fiber& fiber(Cache& c, const std::vector<int>& k) const;
  const Subspace& s0_at(Cache& c, const std::vector<int>& k) const;
  const Subspace& l_at(Cache& c, const std::vector<int>& k) const;
};

struct Region {
  std::vector<std::size_t> points;
  std::array<int, 9> ranks{};
};

struct ConstructionState {
  Grid grid;
  Branch branch = Branch::nondegenerate;
  std::vector<PairPoint> points;
  std::vector<Region> regions;
  /// Grid points whose own degeneracy verdict disagrees with the branch.
  int branch_mismatches = 0;
  DistributionFrame Theta, D;   ///< only on single-region grids with constant rank
  bool frames_built = false;
};

/// Runs the pipeline on every grid point, splits the grid into constant
/// rank-profile regions, and frames Theta and D where the rank is constant.
ConstructionState construct_TD(const PairPipeline& pipe, const Grid& grid);

struct C1C2Report {
  double sff = 0.0, parallel = 0.0, c2 = 0.0;
  double max() const { return std::max({sff, parallel, c2}); }
};

C1C2Report verify_C1C2(const ConstructionState& state);

/// Connected components of equal rank profile (grid-neighbour flood fill).
std::vector<Region> segment(const Grid& grid, const std::vector<std::array<int, 9>>& ranks);

enum class BoundKind {
  isometric_nondegenerate,   ///< d + r >= n - p - q + 3 l  (one less in the exceptional case)
  isometric_degenerate,      ///< s >= n - p - q + 3 l - 4
  conformal                  ///< d >= n - p - q + 3 l
};

struct DimensionBound {
  BoundKind kind = BoundKind::isometric_nondegenerate;
  int required = 0;
  int actual = 0;
  int slack = 0;
  bool holds = false;
  bool exceptional = false;   ///< the min{p+b-a, q+a-b} = 6 and l = 0 case
  std::string formula;
};

/// `actual` is d + r, s or d depending on the kind. Throws
/// HypothesisOutOfRange outside the codimension range of the estimate.
DimensionBound check_dimension_bound(BoundKind kind, int n, int p, int q, int a, int b, int ell, int actual);

} // namespace cdef
