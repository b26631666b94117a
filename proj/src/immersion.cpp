#include "cdef/immersion.hpp"

#include <functional>

#include "cdef/errors.hpp"

namespace cdef {

namespace {

std::vector<double> to_std(const Vec& u) { return std::vector<double>(u.data(), u.data() + u.size()); }

} // namespace

PointJet PointJet::from_jets(const JetVec& coords, int n, int order) {
  PointJet p;
  const int m = static_cast<int>(coords.size());
  p.x.resize(m);
  p.d1.resize(m, n);
  for (int a = 0; a < m; ++a) {
    p.x(a) = coords[a].value();
    for (int i = 0; i < n; ++i) p.d1(a, i) = order >= 1 ? coords[a].d(i) : 0.0;
  }
  if (order >= 2) {
    p.d2.assign(static_cast<std::size_t>(n * n), Vec::Zero(m));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < m; ++a) p.d2[i * n + j](a) = coords[a].d(i, j);
  }
  if (order >= 3) {
    p.d3.assign(static_cast<std::size_t>(n * n * n), Vec::Zero(m));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int a = 0; a < m; ++a) p.d3[(i * n + j) * n + k](a) = coords[a].d(i, j, k);
  }
  return p;
}

PointJet Immersion::point(const Vec& u, int order) const {
  if (u.size() != dim()) throw DimensionMismatch("chart point has wrong dimension");
  return PointJet::from_jets(jets(u, order), dim(), order);
}

Vec Immersion::position(const Vec& u) const {
  const JetVec j = jets(u, 0);
  Vec x(static_cast<int>(j.size()));
  for (std::size_t a = 0; a < j.size(); ++a) x(static_cast<int>(a)) = j[a].value();
  return x;
}

ClosedFormImmersion::ClosedFormImmersion(std::string name, int dim, ScalarProduct ambient, JetMap map)
    : name_(std::move(name)), dim_(dim), ambient_(std::move(ambient)), map_(std::move(map)) {}

JetVec ClosedFormImmersion::jets(const Vec& u, int order) const {
  if (u.size() != dim_) throw DimensionMismatch("chart point has wrong dimension");
  JetVec out = map_(seed(to_std(u), order));
  if (static_cast<int>(out.size()) != ambient_.dim())
    throw DimensionMismatch(name_ + ": map output does not match the ambient dimension");
  return out;
}

ComposedImmersion::ComposedImmersion(std::string name, JetMap outer, ScalarProduct ambient,
                                     ImmersionPtr inner)
    : name_(std::move(name)), outer_(std::move(outer)), ambient_(std::move(ambient)),
      inner_(std::move(inner)) {}

JetVec ComposedImmersion::jets(const Vec& u, int order) const {
  JetVec out = outer_(inner_->jets(u, order));
  if (static_cast<int>(out.size()) != ambient_.dim())
    throw DimensionMismatch(name_ + ": outer map does not match the ambient dimension");
  return out;
}

FiniteDifferenceImmersion::FiniteDifferenceImmersion(ImmersionPtr base, double step)
    : base_(std::move(base)), step_(step) {
  if (!(step_ > 0.0)) throw DimensionMismatch("finite-difference step must be positive");
}

JetVec FiniteDifferenceImmersion::jets(const Vec& u, int order) const {
  const int n = dim();
  const int m = ambient().dim();
  const int top = std::min(order, 3);
  const double h = step_;
  // Nested five-point stencils: derivative along axes[0..k) of the position.
  std::function<Vec(const Vec&, const std::vector<int>&, std::size_t)> nested =
      [&](const Vec& p, const std::vector<int>& axes, std::size_t k) -> Vec {
    if (k == axes.size()) return base_->position(p);
    static const double w[4] = {1.0, -8.0, 8.0, -1.0};
    static const double s[4] = {-2.0, -1.0, 1.0, 2.0};
    Vec acc = Vec::Zero(m);
    for (int t = 0; t < 4; ++t) {
      Vec q = p;
      q(axes[k]) += s[t] * h;
      acc += w[t] * nested(q, axes, k + 1);
    }
    return acc / (12.0 * h);
  };

  auto table = MonomialTable::get(n, order);
  std::vector<std::vector<double>> coeff(static_cast<std::size_t>(m),
                                         std::vector<double>(table->size(), 0.0));
  for (int idx = 0; idx < table->size(); ++idx) {
    if (table->degree[idx] > top) break;
    std::vector<int> axes;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < table->exponents[idx][i]; ++k) axes.push_back(i);
    const Vec dv = nested(u, axes, 0);
    for (int a = 0; a < m; ++a) coeff[a][idx] = dv(a) / table->factorial[idx];
  }
  JetVec out;
  for (int a = 0; a < m; ++a) out.push_back(Jet::from_coefficients(n, order, coeff[a]));
  return out;
}

JetVec taylor_expand(const PointJet& c, const Vec& center, const Vec& u, int order) {
  const int n = c.n();
  const int m = c.m();
  JetVec delta;
  for (int i = 0; i < n; ++i) delta.push_back(Jet::variable(i, u(i) - center(i), n, order));
  JetVec out;
  for (int a = 0; a < m; ++a) {
    Jet v(n, order, c.x(a));
    for (int i = 0; i < n; ++i) v += c.d1(a, i) * delta[i];
    if (!c.d2.empty())
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v += (0.5 * c.second(i, j)(a)) * (delta[i] * delta[j]);
    if (c.has_third())
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            v += (c.third(i, j, k)(a) / 6.0) * (delta[i] * delta[j] * delta[k]);
    out.push_back(v);
  }
  return out;
}

} // namespace cdef
