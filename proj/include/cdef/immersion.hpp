#pragma once

// Immersions of a chart domain into a flat space. An Immersion can be asked
// for the jets of its ambient coordinates at any chart point; all of the
// differential calculus downstream is built on that single query.

#include <memory>
#include <string>
#include <vector>

#include "cdef/linalg.hpp"
#include "cdef/taylor.hpp"

namespace cdef {

/// Position and partial derivatives up to order 3 at one chart point.
struct PointJet {
  Vec x;                 ///< position (m)
  Mat d1;                ///< m x n, column i = d/du_i
  std::vector<Vec> d2;   ///< n*n, d2[i*n+j] = d^2/du_i du_j
  std::vector<Vec> d3;   ///< n^3 or empty

  int n() const { return static_cast<int>(d1.cols()); }
  int m() const { return static_cast<int>(d1.rows()); }
  bool has_third() const { return !d3.empty(); }
  const Vec& second(int i, int j) const { return d2[i * n() + j]; }
  const Vec& third(int i, int j, int k) const { return d3[(i * n() + j) * n() + k]; }

  static PointJet from_jets(const JetVec& coords, int n, int order);
};

class Immersion {
public:
  virtual ~Immersion() = default;

  /// Chart dimension n.
  virtual int dim() const = 0;
  virtual const ScalarProduct& ambient() const = 0;
  /// Jets (in the n chart variables, expanded at u) of the ambient coordinates.
  virtual JetVec jets(const Vec& u, int order) const = 0;
  virtual std::string name() const { return "immersion"; }

  PointJet point(const Vec& u, int order = 3) const;
  Vec position(const Vec& u) const;
};

using ImmersionPtr = std::shared_ptr<const Immersion>;

/// x |-> map(x) for a closed-form JetMap.
class ClosedFormImmersion : public Immersion {
public:
  ClosedFormImmersion(std::string name, int dim, ScalarProduct ambient, JetMap map);

  int dim() const override { return dim_; }
  const ScalarProduct& ambient() const override { return ambient_; }
  JetVec jets(const Vec& u, int order) const override;
  std::string name() const override { return name_; }
  const JetMap& map() const { return map_; }

private:
  std::string name_;
  int dim_;
  ScalarProduct ambient_;
  JetMap map_;
};

/// outer o inner, where outer is a closed-form map on the inner ambient space.
class ComposedImmersion : public Immersion {
public:
  ComposedImmersion(std::string name, JetMap outer, ScalarProduct ambient, ImmersionPtr inner);

  int dim() const override { return inner_->dim(); }
  const ScalarProduct& ambient() const override { return ambient_; }
  JetVec jets(const Vec& u, int order) const override;
  std::string name() const override { return name_; }

private:
  std::string name_;
  JetMap outer_;
  ScalarProduct ambient_;
  ImmersionPtr inner_;
};

/// Jets of another immersion rebuilt from positions only, by central
/// differences (5-point stencils for first derivatives, nested for higher).
class FiniteDifferenceImmersion : public Immersion {
public:
  FiniteDifferenceImmersion(ImmersionPtr base, double step);

  int dim() const override { return base_->dim(); }
  const ScalarProduct& ambient() const override { return base_->ambient(); }
  JetVec jets(const Vec& u, int order) const override;
  std::string name() const override { return base_->name() + "[fd]"; }

private:
  ImmersionPtr base_;
  double step_;
};

/// Builds the jets of a polynomial with the given derivatives at `center`,
/// re-expanded at u. Used to re-evaluate sampled data off the nodes.
JetVec taylor_expand(const PointJet& at_center, const Vec& center, const Vec& u, int order);

/// Five-point central difference of a matrix-valued function along axis i.
template <class F>
Mat stencil_derivative(const F& f, const Vec& u, int i, double h) {
  Vec p = u;
  auto at = [&](double s) {
    p = u;
    p(i) += s * h;
    return Mat(f(p));
  };
  const Mat m2 = at(-2.0), m1 = at(-1.0), p1 = at(1.0), p2 = at(2.0);
  return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
}

} // namespace cdef
