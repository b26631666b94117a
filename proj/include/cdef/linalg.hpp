#pragma once

// Linear algebra over finite-dimensional real spaces carrying a nondegenerate,
// possibly indefinite, scalar product. Subspaces are allowed to be degenerate;
// everything that needs a nondegenerate subspace says so and throws
// DegenerateSubspace otherwise.

#include <Eigen/Dense>

#include <vector>

#include "cdef/tolerance.hpp"

namespace cdef {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Inertia of a symmetric form restricted to a subspace.
struct Signature {
  int pos = 0;
  int neg = 0;
  int null = 0;
  /// Set when some eigenvalue sat within three decades above the null
  /// threshold; the classification is then fragile and reports say so.
  bool near_null = false;

  int rank() const { return pos + neg + null; }
  bool nondegenerate() const { return null == 0; }
  bool riemannian() const { return null == 0 && neg == 0; }
  bool lorentzian() const { return null == 0 && neg == 1; }
  bool operator==(const Signature& o) const {
    return pos == o.pos && neg == o.neg && null == o.null;
  }
};

/// A flat scalar product given by its Gram matrix in a reference basis.
class ScalarProduct {
public:
  ScalarProduct() = default;
  explicit ScalarProduct(Mat gram, bool light_cone_pair = false);

  static ScalarProduct euclidean(int dim);
  /// Diagonal metric with the given +1/-1 entries.
  static ScalarProduct diagonal(const std::vector<int>& signs);
  /// Lorentz space of dimension N+2 written in a pseudo-orthonormal basis
  /// (e0, e1, e2, ..., e_{N+1}) with <e0,e0> = <e1,e1> = 0, <e0,e1> = 1.
  static ScalarProduct light_cone(int N);
  /// a (+) sign_b * b, block diagonal.
  static ScalarProduct direct_sum(const ScalarProduct& a, const ScalarProduct& b,
                                  double sign_b = 1.0);

  int dim() const { return static_cast<int>(gram_.rows()); }
  int index() const { return index_; }
  const Mat& gram() const { return gram_; }
  bool light_cone_pair() const { return light_cone_pair_; }
  double scale() const { return scale_; }

  double operator()(const Vec& x, const Vec& y) const { return x.dot(gram_ * y); }
  double norm2(const Vec& x) const { return (*this)(x, x); }

private:
  Mat gram_;
  int index_ = 0;
  double scale_ = 1.0;
  bool light_cone_pair_ = false;
};

/// A linear subspace with a basis that is orthonormal in the auxiliary
/// Euclidean product of the reference coordinates.
class Subspace {
public:
  Subspace() = default;
  Subspace(ScalarProduct ambient, Mat orthonormal_basis, const Tolerance& tol);

  static Subspace zero(const ScalarProduct& ambient);
  static Subspace whole(const ScalarProduct& ambient, const Tolerance& tol = {});
  /// Column space of `vectors` at the given tolerance.
  static Subspace span(const ScalarProduct& ambient, const Mat& vectors,
                       const Tolerance& tol = {});

  const ScalarProduct& ambient() const { return ambient_; }
  const Mat& basis() const { return basis_; }
  int rank() const { return static_cast<int>(basis_.cols()); }
  int ambient_dim() const { return ambient_.dim(); }
  const Signature& signature() const { return signature_; }
  bool nondegenerate() const { return signature_.nondegenerate(); }

  /// Gram matrix of the basis in the ambient product.
  Mat gram() const { return basis_.transpose() * ambient_.gram() * basis_; }
  /// Euclidean orthogonal projector onto the subspace (not the metric one).
  Mat aux_projector() const { return basis_ * basis_.transpose(); }
  /// Euclidean distance from v to the subspace, relative to |v|.
  double distance(const Vec& v) const;
  bool contains(const Vec& v, double tol) const { return distance(v) <= tol; }

private:
  ScalarProduct ambient_;
  Mat basis_;
  Signature signature_;
};

/// Values of a bilinear map V x U -> W sampled on bases of V and U.
struct BilinearSample {
  int left_dim = 0;
  int right_dim = 0;
  ScalarProduct left;    ///< metric on the left space (used for nullity results)
  ScalarProduct target;  ///< W
  std::vector<Vec> values;
  bool symmetric = false;

  BilinearSample() = default;
  BilinearSample(int left_dim, int right_dim, ScalarProduct target, bool symmetric = false);

  const Vec& operator()(int i, int j) const { return values[i * right_dim + j]; }
  Vec& operator()(int i, int j) { return values[i * right_dim + j]; }

  /// Largest componentwise |b(i,j) - b(j,i)|; zero for non-square samples.
  double symmetry_defect() const;
  /// Largest value norm.
  double magnitude() const;
  /// b(x, y) for coefficient vectors x, y.
  Vec apply(const Vec& x, const Vec& y) const;
  /// The form composed on the target side with the linear map `m`
  /// (target of the result has the given product).
  BilinearSample mapped(const Mat& m, const ScalarProduct& new_target) const;
  /// Restriction of the left argument to the span of the columns of `left_basis`.
  BilinearSample restricted_left(const Mat& left_basis) const;
};

// --- Numerical rank helpers ----------------------------------------------

double rank_threshold(const Eigen::VectorXd& singular_values, const Tolerance& tol);
int numerical_rank(const Mat& m, const Tolerance& tol);
/// Orthonormal basis of ker(m). An m with zero rows has the whole space as kernel.
Mat kernel(const Mat& m, int cols, const Tolerance& tol);
/// Orthonormal basis of the column space of m.
Mat column_space(const Mat& m, const Tolerance& tol);
Signature signature_of(const Mat& gram, double null_threshold);

// --- Subspace operations --------------------------------------------------

/// S(beta): the span of the image.
Subspace span_of_image(const BilinearSample& beta, const Tolerance& tol = {});

/// N(beta_T) = {X : <beta(X,Y), xi> = 0 for all Y and all xi in T}. No
/// projection is formed, so T may be degenerate.
Subspace nullity_space(const BilinearSample& beta, const Subspace& T,
                       const Tolerance& tol = {});
/// Nullity with respect to the whole target.
Subspace nullity_space(const BilinearSample& beta, const Tolerance& tol = {});

/// U intersected with its orthogonal complement.
Subspace radical(const Subspace& U, const Tolerance& tol = {});

/// Metric orthogonal projection onto a nondegenerate T.
Vec orthogonal_projection(const Subspace& T, const Vec& v, const Tolerance& tol = {});
/// Matrix of the metric orthogonal projection onto a nondegenerate T.
Mat projector(const Subspace& T, const Tolerance& tol = {});

Subspace intersect(const Subspace& U, const Subspace& V, const Tolerance& tol = {});
Subspace sum(const Subspace& U, const Subspace& V, const Tolerance& tol = {});
/// {w in W : <w, u> = 0 for all u in U}.
Subspace complement_within(const Subspace& U, const Subspace& W, const Tolerance& tol = {});
/// Orthogonal complement in the ambient space.
Subspace orthogonal_complement(const Subspace& U, const Tolerance& tol = {});
/// Image of U under a linear map into another space.
Subspace image(const Mat& map, const Subspace& U, const ScalarProduct& target,
               const Tolerance& tol = {});
/// Euclidean principal-angle distance (sin of the largest angle); 1 when ranks differ.
double subspace_distance(const Subspace& U, const Subspace& V);

} // namespace cdef
