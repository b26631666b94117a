#pragma once

// The light-cone model of conformal geometry. Lorentz space L^{N+2} is stored
// in a pseudo-orthonormal basis (e0, e1, e2, ...), <e0,e1> = 1, and Euclidean
// space sits inside the cone as the slice <x, e0> = 1.

#include "cdef/jets.hpp"

namespace cdef {

class LightConeModel {
public:
  explicit LightConeModel(int N);

  int N() const { return N_; }
  const ScalarProduct& ambient() const { return ambient_; }
  Vec e(int i) const { return Vec::Unit(N_ + 2, i); }

  /// Psi(x) = -|x|^2/2 e0 + e1 + sum x_i e_{i+1}.
  Vec psi(const Vec& x) const;
  /// dPsi_x(v) = -<x,v> e0 + sum v_i e_{i+1}.
  Vec dpsi(const Vec& x, const Vec& v) const;
  JetVec psi(const JetVec& x) const;
  /// <g, e0>, i.e. the e1-coordinate.
  static double e0_pairing(const Vec& g) { return g(1); }
  /// C(g) with Psi(C(g)) = <g,e0>^{-1} g. Throws OnExceptionalRay.
  Vec project(const Vec& g, double tau = 1e-9) const;

private:
  int N_;
  ScalarProduct ambient_;
};

/// I(f) = phi^{-1} Psi o f, where <,>_f = phi^2 <,>_base. With no base the
/// metric of f itself is used and the result is Psi o f.
class IsometricRepresentative : public Immersion {
public:
  IsometricRepresentative(ImmersionPtr f, ImmersionPtr base, double conformal_tolerance = 1e-6);

  int dim() const override { return f_->dim(); }
  const ScalarProduct& ambient() const override { return model_.ambient(); }
  JetVec jets(const Vec& u, int order) const override;
  std::string name() const override { return "I(" + f_->name() + ")"; }

  /// phi as a jet of the given order at u (needs jets of f of order + 1).
  Jet conformal_factor(const Vec& u, int order) const;
  const LightConeModel& model() const { return model_; }
  const ImmersionPtr& source() const { return f_; }
  const ImmersionPtr& base() const { return base_; }

private:
  ImmersionPtr f_;
  ImmersionPtr base_;
  LightConeModel model_;
  double tol_;
};

/// C(g) for an immersion into the cone, off the ray R_{e0}.
class ConeProjection : public Immersion {
public:
  explicit ConeProjection(ImmersionPtr g, double tau = 1e-9);

  int dim() const override { return g_->dim(); }
  const ScalarProduct& ambient() const override { return euclid_; }
  JetVec jets(const Vec& u, int order) const override;
  std::string name() const override { return "C(" + g_->name() + ")"; }

private:
  ImmersionPtr g_;
  ScalarProduct euclid_;
  double tau_;
};

ImmersionPtr psi_lift(const ImmersionPtr& f);
ImmersionPtr isometric_representative(const ImmersionPtr& f, const ImmersionPtr& base = nullptr);
ImmersionPtr cone_projection(const ImmersionPtr& g, double tau = 1e-9);

struct PositionResidual {
  double shape_plus_identity = 0.0;  ///< max |A_g + I|
  double witness_shape = 0.0;        ///< max |A_w|
  double cone = 0.0;                 ///< max |<g,g>|
};

/// A_g + I and A_w over the grid for g into the cone (w defaults to e0).
/// Throws NotInCone when g leaves the cone.
PositionResidual position_identities(const ImmersionPtr& g, const Grid& grid,
                                     const Vec& witness = Vec(), const Tolerance& tol = {},
                                     Exec exec = default_exec());

enum class HessianMode { closed_form, finite_difference };

/// In the transfer formulas phi is the factor with <,>_{f'} = phi^2 <,>_f,
/// that is f' = phi Psi o f (the reciprocal of the factor of I(f)).
struct SffTransferData {
  std::vector<double> phi;
  std::vector<double> lambda;
  std::vector<Vec> xi;
  std::vector<Vec> eta;
  std::vector<Vec> eta_prime;
  double sffs_residual = 0.0;    ///< alpha' against the transfer formula
  double sffs3_residual = 0.0;   ///< beta' against the transfer formula
  double etas_residual = 0.0;    ///< eta' against its formula (diagnostic)
  double lambda_spread = 0.0;    ///< max |Hess phi(Z,Z)/<Z,Z> - lambda| over Delta
  double ruled_residual = 0.0;   ///< |alpha'|_{Delta x Delta} - <,> eta'|
};

/// Both sides of the second fundamental form transfer between f and I(f),
/// computed independently: the left from jets of I(f), the right from jets
/// of f, Hess phi and the Christoffel symbols of the base metric.
SffTransferData sff_transfer_check(const ImmersionPtr& f, const ImmersionPtr& base,
                                   const DistributionFrame& Delta,
                                   HessianMode mode = HessianMode::closed_form,
                                   double step = 1e-3, const Tolerance& tol = {},
                                   Exec exec = default_exec());

} // namespace cdef
