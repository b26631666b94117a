#pragma once

// Sampled jets on chart grids and the classical submanifold calculus:
// induced metric, second fundamental form, normal connection, shape
// operators, conformal factors and tangent distributions.

#include <functional>
#include <memory>
#include <vector>

#include "cdef/immersion.hpp"
#include "cdef/parallel.hpp"

namespace cdef {

/// Regular box grid in chart coordinates. An axis with one sample sits at
/// the midpoint of its interval.
struct Grid {
  Vec lo, hi;
  std::vector<int> counts;

  Grid() = default;
  Grid(Vec lo, Vec hi, std::vector<int> counts);

  int dim() const { return static_cast<int>(counts.size()); }
  std::size_t size() const;
  std::vector<int> multi_index(std::size_t flat) const;
  std::size_t flat(const std::vector<int>& multi) const;
  Vec point(std::size_t flat) const;
  double spacing(int axis) const;
  /// Flat indices of the grid neighbours (+-1 along each axis).
  std::vector<std::size_t> neighbors(std::size_t flat) const;
  std::size_t center() const;
  std::size_t nearest(const Vec& u) const;
};

enum class JetSource { closed_form, finite_difference, sampled };

/// Jets of an immersion sampled on a grid.
struct ImmersionJet {
  Grid grid;
  ScalarProduct ambient;
  std::vector<PointJet> points;
  JetSource source = JetSource::closed_form;
  /// Re-evaluation handle; jets off the nodes come from here.
  ImmersionPtr immersion;

  int n() const { return grid.dim(); }
  int m() const { return ambient.dim(); }
};

/// Samples jets of order `order` (<= 3) at every grid node.
ImmersionJet sample(const ImmersionPtr& f, const Grid& grid, int order = 3,
                    Exec exec = default_exec());

/// Immersion re-evaluated from sampled nodes by Taylor expansion about the
/// nearest node.
class SampledImmersion : public Immersion {
public:
  explicit SampledImmersion(ImmersionJet jets);

  int dim() const override { return jets_.n(); }
  const ScalarProduct& ambient() const override { return jets_.ambient; }
  JetVec jets(const Vec& u, int order) const override;
  std::string name() const override { return "sampled"; }

private:
  ImmersionJet jets_;
};

// --- Pointwise geometry ----------------------------------------------------

struct LocalGeometry {
  PointJet jet;
  ScalarProduct ambient;
  Mat metric;
  Mat metric_inv;
  /// Metric projectors of the ambient space onto df(TM) and T^perp M.
  Mat tangent_projector;
  Mat normal_projector;
  Subspace normal;
  /// alpha(d_i, d_j) as ambient vectors; left metric is the induced one.
  BilinearSample alpha;

  int n() const { return jet.n(); }
  int codim() const { return normal.rank(); }
  /// Coordinate matrix of A_xi: <A_xi X, Y> = <alpha(X, Y), xi>.
  Mat shape_operator(const Vec& xi) const;
};

/// Throws NotImmersion when d1 has rank < n or the induced metric is degenerate.
LocalGeometry local_geometry(const ScalarProduct& ambient, const PointJet& jet,
                             const Tolerance& tol = {});

std::vector<Mat> induced_metric(const ImmersionJet& j, const Tolerance& tol = {},
                                Exec exec = default_exec());

/// Pseudo-orthonormal normal frame field. At a point u the frame is the
/// polar (symmetric) orthonormalisation of the projection of a seed frame,
/// which is the Procrustes-closest orthonormal frame of T^perp_u M to the
/// seed. The field can be evaluated anywhere, so it can be differentiated.
class NormalFrameField {
public:
  NormalFrameField(ImmersionPtr f, const Vec& seed_point, const Tolerance& tol = {});

  Mat at(const Vec& u) const;
  /// <xi_a, xi_a> for the frame vectors.
  const Vec& signs() const { return signs_; }
  int codim() const { return static_cast<int>(signs_.size()); }
  const Immersion& immersion() const { return *f_; }

  /// Frame from an already computed local geometry at some point.
  Mat at(const LocalGeometry& g) const;

private:
  ImmersionPtr f_;
  Mat seed_;
  Vec signs_;
  Tolerance tol_;
};

/// Pseudo-orthonormal basis of a nondegenerate subspace, negative vectors first.
Mat pseudo_orthonormal_basis(const Subspace& U, Vec* signs = nullptr);

/// Symmetric orthonormalisation: columns of Y with Y^T G Y close to diag(signs).
/// Throws FrameAlignmentFailure when the correction is not close to identity.
Mat polar_orthonormalize(const ScalarProduct& ambient, const Mat& Y, const Vec& signs);

struct FundamentalData {
  std::vector<Mat> metric;
  std::vector<Mat> normal_frame;                  ///< m x p
  Vec signs;                                      ///< <xi_a, xi_a>
  std::vector<std::vector<Mat>> alpha;            ///< [point][a] n x n: <alpha_ij, xi_a>
  std::vector<std::vector<Mat>> normal_connection;///< [point][i] p x p: nabla_i xi_a = sum_b w(b,a) xi_b
  std::vector<std::vector<Mat>> shape_operators;  ///< [point][a] n x n
  double symmetry_residual = 0.0;
  double compatibility_residual = 0.0;
  double shape_residual = 0.0;
};

struct CalculusOptions {
  Tolerance tol;
  double step = 2e-3;   ///< stencil step for derivatives of constructed sections
  Exec exec = default_exec();
};

FundamentalData fundamental_data(const ImmersionJet& j, const CalculusOptions& opt = {});

/// Coefficients w_i(b, a) of the normal connection of `frame` at u.
std::vector<Mat> normal_connection(const NormalFrameField& frame, const Vec& u, double step);

struct ConformalFactor {
  std::vector<double> phi;
  double residual = 0.0;   ///< max |g_g - phi^2 g_f| / |g_f|
};

/// phi with metric(g) = phi^2 metric(f) pointwise.
ConformalFactor conformal_factor(const ImmersionJet& jf, const ImmersionJet& jg,
                                 double tolerance = 1e-6);

// --- Tangent distributions -------------------------------------------------

/// n x d matrix whose columns span D at a chart point.
using FrameGenerator = std::function<Mat(const Vec&)>;

struct DistributionFrame {
  Grid grid;
  std::vector<Mat> basis;                     ///< Euclidean-orthonormal in chart coordinates
  std::vector<double> integrability_residual;
  int rank = 0;
  FrameGenerator generator;

  /// Samples the generator, checks constant rank, aligns neighbouring bases
  /// by orthogonal Procrustes in a lexicographic sweep, and records bracket
  /// residuals.
  static DistributionFrame build(const Grid& grid, FrameGenerator generator,
                                 const Tolerance& tol = {}, double step = 2e-3,
                                 Exec exec = default_exec());
  /// From sampled bases only; brackets use grid differences.
  static DistributionFrame from_samples(const Grid& grid, std::vector<Mat> bases,
                                        const Tolerance& tol = {});
};

/// Rotation R minimising |A R - B| (orthogonal Procrustes).
Mat procrustes(const Mat& A, const Mat& B);

/// Norm of the components of [X_a, X_b] outside D at u.
double bracket_residual(const FrameGenerator& D, const Vec& u, double step,
                        const Tolerance& tol = {});
std::vector<double> bracket_residual(const DistributionFrame& D);

/// Mean curvature of the leaf of D through the point: (1/d) tr alpha|_{D x D}.
Vec leaf_mean_curvature(const LocalGeometry& g, const Mat& D);
std::vector<Vec> leaf_mean_curvature(const ImmersionJet& j, const DistributionFrame& D,
                                     const Tolerance& tol = {});

/// |R_ijkl - (<alpha_il, alpha_jk> - <alpha_ik, alpha_jl>)| from jets of order 3.
double gauss_residual(const Immersion& f, const Vec& u, const Tolerance& tol = {});

} // namespace cdef
