#pragma once

// Conformal invariants of a single immersion: the umbilic-corrected second
// fundamental form beta = alpha - <,> eta along a distribution, conformal
// rulings, conformal s-nullity and the rigidity criterion built on it.

#include <cstdint>
#include <string>

#include "cdef/jets.hpp"

namespace cdef {

struct ConformalSFF {
  DistributionFrame D;
  std::vector<Vec> eta;
  std::vector<BilinearSample> beta;   ///< TM x TM -> ambient
  std::vector<Subspace> L;            ///< span beta(D, TM)
  std::vector<int> ell_per_point;
  int ell = 0;                        ///< max over the grid
  double nullity_residual = 0.0;      ///< |beta(Z, X)_{L^perp}| for Z in D
};

ConformalSFF conformal_sff(const ImmersionJet& j, const DistributionFrame& D, const Tolerance& tol = {},
                           Exec exec = default_exec());

struct RulingVerdict {
  bool ruled = false;
  double umbilic_residual = 0.0;   ///< |alpha|_{DxD} - <,> eta|
  double bracket_residual = 0.0;
};

RulingVerdict is_conformally_ruled(const ImmersionJet& j, const DistributionFrame& D,
                                   double threshold = 1e-6, const Tolerance& tol = {});

struct NullityOptions {
  int restarts = 24;
  std::uint64_t seed = 1;
  double tol = 1e-6;     ///< relative threshold for kernel dimensions
  int sweep = 720;       ///< samples of the circle when the normal space is a plane
};

struct NullityReport {
  int s = 0;
  int value = 0;
  /// True when the maximisation is provably complete (p = 1 or s = p).
  bool exact = false;
  std::string method;
  Mat V_frame;   ///< p x s coefficients of V in the normal frame
  Mat V;         ///< ambient basis of V (empty for frame-only input)
  Vec c;         ///< <zeta, v_a>
  Vec zeta;      ///< ambient zeta (empty when V is degenerate or frame-only)
  int restarts = 0;
  std::vector<double> trace;   ///< best smoothed objective per restart
};

/// dim of the common kernel of S_{v_a} - c_a I (S symmetric in an orthonormal
/// tangent basis), at threshold tol * scale.
int nullity_at(const std::vector<Mat>& S, const Mat& V_frame, const Vec& c, double tol);

/// Largest common eigenspace of the family {S_v : v in span V_frame}.
struct JointEigen {
  int dim = 0;
  Vec c;
};
JointEigen joint_eigenspace(const std::vector<Mat>& S, const Mat& V_frame, double tol);

/// nu^c_s from the second fundamental form components H_a = <alpha_ij, xi_a>
/// and the metric, in frame coordinates.
NullityReport conformal_s_nullity(const std::vector<Mat>& H, const Mat& metric, int s,
                                  const NullityOptions& opt = {});

/// nu^c_s at grid point k of fundamental data.
NullityReport conformal_s_nullity(const FundamentalData& fd, std::size_t k, const ScalarProduct& ambient,
                                  int s, const NullityOptions& opt = {});

struct RigidityBound {
  int s = 0;
  int bound = 0;
  int nullity = 0;
  bool exact = false;
  bool satisfied = false;
};

struct RigidityVerdict {
  int n = 0, p = 0, q = 0;
  bool extra_check = false;     ///< q >= p + 5
  int extra_bound = 0;          ///< n - 2(q - p) + 1
  std::vector<RigidityBound> bounds;
  bool hypotheses_hold = false; ///< all bounds satisfied (up to search confidence)
  bool conclusive = false;      ///< a violation was certified, or every bound was exact
};

/// Evaluates the nullity hypotheses of the conformal rigidity criterion at one point.
/// Throws HypothesisOutOfRange unless p <= 5 and p <= q <= n - p - 3.
RigidityVerdict rigidity_criterion(const FundamentalData& fd, std::size_t k, const ScalarProduct& ambient,
                                   int q, const NullityOptions& opt = {});

} // namespace cdef
