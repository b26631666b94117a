#include "cdef/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "cdef/errors.hpp"

namespace cdef {

namespace {

double null_threshold(const ScalarProduct& ambient, const Tolerance& tol) {
  return std::max(tol.rank, tol.absolute) * ambient.scale();
}

void require_same_ambient(const Subspace& U, const Subspace& V) {
  if (U.ambient_dim() != V.ambient_dim())
    throw DimensionMismatch("subspaces live in spaces of dimension " +
                            std::to_string(U.ambient_dim()) + " and " +
                            std::to_string(V.ambient_dim()));
}

} // namespace

// --- ScalarProduct --------------------------------------------------------

ScalarProduct::ScalarProduct(Mat gram, bool light_cone_pair)
    : gram_(std::move(gram)), light_cone_pair_(light_cone_pair) {
  if (gram_.rows() != gram_.cols())
    throw DimensionMismatch("Gram matrix must be square");
  gram_ = 0.5 * (gram_ + gram_.transpose()).eval();
  scale_ = gram_.size() ? std::max(1.0, gram_.cwiseAbs().maxCoeff()) : 1.0;
  if (gram_.size()) {
    Eigen::SelfAdjointEigenSolver<Mat> es(gram_);
    const Vec& ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (std::abs(ev(i)) <= 1e-12 * scale_)
        throw DegenerateSubspace("scalar product is degenerate");
      if (ev(i) < 0) ++index_;
    }
  }
}

ScalarProduct ScalarProduct::euclidean(int dim) {
  return ScalarProduct(Mat::Identity(dim, dim));
}

ScalarProduct ScalarProduct::diagonal(const std::vector<int>& signs) {
  Mat g = Mat::Zero(signs.size(), signs.size());
  for (std::size_t i = 0; i < signs.size(); ++i) g(i, i) = signs[i] < 0 ? -1.0 : 1.0;
  return ScalarProduct(g);
}

ScalarProduct ScalarProduct::light_cone(int N) {
  Mat g = Mat::Identity(N + 2, N + 2);
  g(0, 0) = 0.0;
  g(1, 1) = 0.0;
  g(0, 1) = g(1, 0) = 1.0;
  return ScalarProduct(g, true);
}

ScalarProduct ScalarProduct::direct_sum(const ScalarProduct& a, const ScalarProduct& b,
                                        double sign_b) {
  Mat g = Mat::Zero(a.dim() + b.dim(), a.dim() + b.dim());
  g.topLeftCorner(a.dim(), a.dim()) = a.gram();
  g.bottomRightCorner(b.dim(), b.dim()) = sign_b * b.gram();
  return ScalarProduct(g);
}

// --- Subspace -------------------------------------------------------------

Subspace::Subspace(ScalarProduct ambient, Mat orthonormal_basis, const Tolerance& tol)
    : ambient_(std::move(ambient)), basis_(std::move(orthonormal_basis)) {
  if (basis_.rows() != ambient_.dim())
    throw DimensionMismatch("basis rows do not match the ambient dimension");
  signature_ = signature_of(gram(), null_threshold(ambient_, tol));
}

Subspace Subspace::zero(const ScalarProduct& ambient) {
  return Subspace(ambient, Mat::Zero(ambient.dim(), 0), Tolerance{});
}

Subspace Subspace::whole(const ScalarProduct& ambient, const Tolerance& tol) {
  return Subspace(ambient, Mat::Identity(ambient.dim(), ambient.dim()), tol);
}

Subspace Subspace::span(const ScalarProduct& ambient, const Mat& vectors,
                        const Tolerance& tol) {
  if (vectors.cols() == 0) return zero(ambient);
  return Subspace(ambient, column_space(vectors, tol), tol);
}

double Subspace::distance(const Vec& v) const {
  const double nv = v.norm();
  if (nv == 0.0) return 0.0;
  const Vec r = v - basis_ * (basis_.transpose() * v);
  return r.norm() / nv;
}

// --- BilinearSample -------------------------------------------------------

BilinearSample::BilinearSample(int left_dim_, int right_dim_, ScalarProduct target_,
                               bool symmetric_)
    : left_dim(left_dim_),
      right_dim(right_dim_),
      left(ScalarProduct::euclidean(left_dim_)),
      target(std::move(target_)),
      values(static_cast<std::size_t>(left_dim_ * right_dim_), Vec::Zero(target.dim())),
      symmetric(symmetric_) {}

double BilinearSample::symmetry_defect() const {
  if (left_dim != right_dim) return 0.0;
  double d = 0.0;
  for (int i = 0; i < left_dim; ++i)
    for (int j = i + 1; j < right_dim; ++j)
      d = std::max(d, ((*this)(i, j) - (*this)(j, i)).cwiseAbs().maxCoeff());
  return d;
}

double BilinearSample::magnitude() const {
  double m = 0.0;
  for (const auto& v : values) m = std::max(m, v.norm());
  return m;
}

Vec BilinearSample::apply(const Vec& x, const Vec& y) const {
  Vec out = Vec::Zero(target.dim());
  for (int i = 0; i < left_dim; ++i)
    for (int j = 0; j < right_dim; ++j) out += x(i) * y(j) * (*this)(i, j);
  return out;
}

BilinearSample BilinearSample::mapped(const Mat& m, const ScalarProduct& new_target) const {
  BilinearSample out(left_dim, right_dim, new_target, symmetric);
  out.left = left;
  for (std::size_t k = 0; k < values.size(); ++k) out.values[k] = m * values[k];
  return out;
}

BilinearSample BilinearSample::restricted_left(const Mat& left_basis) const {
  const int d = static_cast<int>(left_basis.cols());
  BilinearSample out(d, right_dim, target, false);
  out.left = ScalarProduct(left_basis.transpose() * left.gram() * left_basis);
  for (int a = 0; a < d; ++a)
    for (int j = 0; j < right_dim; ++j) {
      Vec v = Vec::Zero(target.dim());
      for (int i = 0; i < left_dim; ++i) v += left_basis(i, a) * (*this)(i, j);
      out(a, j) = v;
    }
  return out;
}

// --- Rank helpers ---------------------------------------------------------

double rank_threshold(const Eigen::VectorXd& sv, const Tolerance& tol) {
  const double smax = sv.size() ? sv.maxCoeff() : 0.0;
  return std::max(tol.rank * smax, tol.absolute);
}

int numerical_rank(const Mat& m, const Tolerance& tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& sv = svd.singularValues();
  const double thr = rank_threshold(sv, tol);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thr) ++r;
  return r;
}

Mat kernel(const Mat& m, int cols, const Tolerance& tol) {
  if (cols == 0) return Mat::Zero(0, 0);
  if (m.rows() == 0) return Mat::Identity(cols, cols);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const double thr = rank_threshold(sv, tol);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thr) ++r;
  return svd.matrixV().rightCols(cols - r);
}

Mat column_space(const Mat& m, const Tolerance& tol) {
  if (m.cols() == 0 || m.rows() == 0) return Mat::Zero(m.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
  const Vec& sv = svd.singularValues();
  const double thr = rank_threshold(sv, tol);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thr) ++r;
  return svd.matrixU().leftCols(r);
}

Signature signature_of(const Mat& gram, double thr) {
  Signature s;
  if (gram.size() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (gram + gram.transpose()));
  const Vec& ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double a = std::abs(ev(i));
    if (a <= thr) {
      ++s.null;
    } else {
      if (a <= 1e3 * thr) s.near_null = true;
      if (ev(i) > 0) ++s.pos;
      else ++s.neg;
    }
  }
  return s;
}

// --- Subspace operations --------------------------------------------------

Subspace span_of_image(const BilinearSample& beta, const Tolerance& tol) {
  Mat stacked(beta.target.dim(), static_cast<Eigen::Index>(beta.values.size()));
  for (std::size_t k = 0; k < beta.values.size(); ++k) stacked.col(k) = beta.values[k];
  return Subspace::span(beta.target, stacked, tol);
}

Subspace nullity_space(const BilinearSample& beta, const Subspace& T, const Tolerance& tol) {
  if (T.ambient_dim() != beta.target.dim())
    throw DimensionMismatch("nullity_space: T is not in the target of beta");
  if (T.rank() == 0 || beta.left_dim == 0)
    return Subspace::whole(beta.left, tol);
  // Row (j, xi): X -> <beta(X, e_j), xi>.
  const Mat gx = beta.target.gram() * T.basis();
  Mat rows(beta.right_dim * T.rank(), beta.left_dim);
  for (int j = 0; j < beta.right_dim; ++j)
    for (int i = 0; i < beta.left_dim; ++i)
      rows.block(j * T.rank(), i, T.rank(), 1) = gx.transpose() * beta(i, j);
  return Subspace(beta.left, kernel(rows, beta.left_dim, tol), tol);
}

Subspace nullity_space(const BilinearSample& beta, const Tolerance& tol) {
  return nullity_space(beta, Subspace::whole(beta.target, tol), tol);
}

Subspace radical(const Subspace& U, const Tolerance& tol) {
  if (U.rank() == 0) return U;
  // Same absolute threshold as the signature, so radical and null count agree.
  const Tolerance gram_tol{0.0, null_threshold(U.ambient(), tol), tol.derivative};
  const Mat k = kernel(U.gram(), U.rank(), gram_tol);
  if (k.cols() == 0) return Subspace::zero(U.ambient());
  return Subspace(U.ambient(), U.basis() * k, tol);
}

Mat projector(const Subspace& T, const Tolerance& tol) {
  if (T.rank() == 0) return Mat::Zero(T.ambient_dim(), T.ambient_dim());
  if (!T.nondegenerate() || radical(T, tol).rank() != 0)
    throw DegenerateSubspace("orthogonal projection onto a degenerate subspace");
  const Mat& b = T.basis();
  return b * T.gram().inverse() * b.transpose() * T.ambient().gram();
}

Vec orthogonal_projection(const Subspace& T, const Vec& v, const Tolerance& tol) {
  return projector(T, tol) * v;
}

Subspace intersect(const Subspace& U, const Subspace& V, const Tolerance& tol) {
  require_same_ambient(U, V);
  if (U.rank() == 0 || V.rank() == 0) return Subspace::zero(U.ambient());
  // Stack Euclidean annihilators of U and V; their common kernel is U cap V.
  const int m = U.ambient_dim();
  const Mat au = kernel(U.basis().transpose(), m, tol).transpose();
  const Mat av = kernel(V.basis().transpose(), m, tol).transpose();
  Mat rows(au.rows() + av.rows(), m);
  rows << au, av;
  const Mat k = kernel(rows, m, tol);
  if (k.cols() == 0) return Subspace::zero(U.ambient());
  return Subspace(U.ambient(), k, tol);
}

Subspace sum(const Subspace& U, const Subspace& V, const Tolerance& tol) {
  require_same_ambient(U, V);
  Mat both(U.ambient_dim(), U.rank() + V.rank());
  both << U.basis(), V.basis();
  return Subspace::span(U.ambient(), both, tol);
}

Subspace complement_within(const Subspace& U, const Subspace& W, const Tolerance& tol) {
  require_same_ambient(U, W);
  if (W.rank() == 0) return W;
  if (U.rank() == 0) return W;
  const Mat m = U.basis().transpose() * W.ambient().gram() * W.basis();
  const Mat k = kernel(m, W.rank(), tol);
  if (k.cols() == 0) return Subspace::zero(W.ambient());
  return Subspace(W.ambient(), W.basis() * k, tol);
}

Subspace orthogonal_complement(const Subspace& U, const Tolerance& tol) {
  return complement_within(U, Subspace::whole(U.ambient(), tol), tol);
}

Subspace image(const Mat& map, const Subspace& U, const ScalarProduct& target,
               const Tolerance& tol) {
  if (U.rank() == 0) return Subspace::zero(target);
  return Subspace::span(target, map * U.basis(), tol);
}

double subspace_distance(const Subspace& U, const Subspace& V) {
  if (U.rank() != V.rank()) return 1.0;
  if (U.rank() == 0) return 0.0;
  const Mat r = V.basis() - U.basis() * (U.basis().transpose() * V.basis());
  Eigen::JacobiSVD<Mat> svd(r);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

} // namespace cdef
