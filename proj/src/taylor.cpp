#include "cdef/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "cdef/errors.hpp"

namespace cdef {

namespace {

std::uint64_t encode(const std::vector<std::uint8_t>& e, int order) {
  std::uint64_t key = 0;
  for (auto x : e) key = key * static_cast<std::uint64_t>(order + 1) + x;
  return key;
}

void enumerate(int vars, int degree, int pos, std::vector<std::uint8_t>& cur,
               std::vector<std::vector<std::uint8_t>>& out) {
  if (pos == vars - 1) {
    cur[pos] = static_cast<std::uint8_t>(degree);
    out.push_back(cur);
    return;
  }
  for (int k = degree; k >= 0; --k) {
    cur[pos] = static_cast<std::uint8_t>(k);
    enumerate(vars, degree - k, pos + 1, cur, out);
  }
}

struct TableCache {
  std::mutex mutex;
  std::map<std::pair<int, int>, std::shared_ptr<const MonomialTable>> tables;
  std::map<std::pair<int, int>, std::map<std::uint64_t, int>> lookup;
};

TableCache& cache() {
  static TableCache c;
  return c;
}

std::shared_ptr<const MonomialTable> build(int vars, int order,
                                           std::map<std::uint64_t, int>& lookup) {
  auto t = std::make_shared<MonomialTable>();
  t->vars = vars;
  t->order = order;
  std::vector<std::uint8_t> cur(static_cast<std::size_t>(vars), 0);
  for (int deg = 0; deg <= order; ++deg) {
    t->first_of_degree.push_back(static_cast<int>(t->exponents.size()));
    if (vars == 0) {
      if (deg == 0) t->exponents.push_back({});
      continue;
    }
    enumerate(vars, deg, 0, cur, t->exponents);
  }
  t->first_of_degree.push_back(static_cast<int>(t->exponents.size()));
  for (std::size_t m = 0; m < t->exponents.size(); ++m) {
    const auto& e = t->exponents[m];
    int deg = 0;
    double fact = 1.0;
    for (auto x : e) {
      deg += x;
      for (int k = 2; k <= x; ++k) fact *= k;
    }
    t->degree.push_back(deg);
    t->factorial.push_back(fact);
    lookup[encode(e, order)] = static_cast<int>(m);
  }
  const int size = t->size();
  t->shift.assign(static_cast<std::size_t>(size * vars), -1);
  for (int m = 0; m < size; ++m)
    for (int i = 0; i < vars; ++i) {
      if (t->degree[m] == order) continue;
      auto e = t->exponents[m];
      ++e[i];
      t->shift[m * vars + i] = lookup.at(encode(e, order));
    }
  for (int a = 0; a < size; ++a)
    for (int b = 0; b < size; ++b) {
      if (t->degree[a] + t->degree[b] > order) continue;
      std::vector<std::uint8_t> e(static_cast<std::size_t>(vars));
      for (int i = 0; i < vars; ++i) e[i] = t->exponents[a][i] + t->exponents[b][i];
      t->products.push_back({a, b, lookup.at(encode(e, order))});
    }
  return t;
}

} // namespace

std::shared_ptr<const MonomialTable> MonomialTable::get(int vars, int order) {
  auto& c = cache();
  std::lock_guard<std::mutex> lock(c.mutex);
  const auto key = std::make_pair(vars, order);
  auto it = c.tables.find(key);
  if (it != c.tables.end()) return it->second;
  auto t = build(vars, order, c.lookup[key]);
  c.tables[key] = t;
  return t;
}

int MonomialTable::index_of(const std::vector<std::uint8_t>& e) const {
  int deg = 0;
  for (auto x : e) deg += x;
  if (deg > order) return -1;
  // Walk from the constant monomial along shifts; cheap for the small orders used.
  int m = 0;
  for (int i = 0; i < vars; ++i)
    for (int k = 0; k < e[i]; ++k) m = shift[m * vars + i];
  return m;
}

// --- Jet ------------------------------------------------------------------

Jet::Jet(int vars, int order, double value)
    : table_(MonomialTable::get(vars, order)),
      coeff_(static_cast<std::size_t>(table_->size()), 0.0) {
  coeff_[0] = value;
}

Jet Jet::variable(int i, double value, int vars, int order) {
  Jet j(vars, order, value);
  if (order >= 1) j.coeff_[static_cast<std::size_t>(j.table_->shift[i])] = 1.0;
  return j;
}

Jet Jet::from_coefficients(int vars, int order, const std::vector<double>& coeff) {
  Jet j(vars, order, 0.0);
  const std::size_t n = std::min(coeff.size(), j.coeff_.size());
  for (std::size_t m = 0; m < n; ++m) j.coeff_[m] = coeff[m];
  return j;
}

double Jet::derivative(const std::vector<std::uint8_t>& e) const {
  const int m = table_->index_of(e);
  if (m < 0) throw ExpressionError("derivative beyond jet order");
  return coeff_[m] * table_->factorial[m];
}

double Jet::d(int i) const {
  const int m = table_->shift[i];
  return m < 0 ? 0.0 : coeff_[m];
}

double Jet::d(int i, int j) const {
  const int v = table_->vars;
  const int m1 = table_->shift[i];
  if (m1 < 0) return 0.0;
  const int m = table_->shift[m1 * v + j];
  return m < 0 ? 0.0 : coeff_[m] * table_->factorial[m];
}

double Jet::d(int i, int j, int k) const {
  const int v = table_->vars;
  int m = table_->shift[i];
  if (m < 0) return 0.0;
  m = table_->shift[m * v + j];
  if (m < 0) return 0.0;
  m = table_->shift[m * v + k];
  return m < 0 ? 0.0 : coeff_[m] * table_->factorial[m];
}

Jet Jet::partial(int i) const {
  const int K = order();
  const int v = vars();
  Jet out(v, K > 0 ? K - 1 : 0, 0.0);
  if (K == 0) return out;
  for (int m = 0; m < out.table_->size(); ++m) {
    // m in the lower table has the same exponents as in this table.
    const int here = table_->index_of(out.table_->exponents[m]);
    const int up = table_->shift[here * v + i];
    if (up >= 0) out.coeff_[m] = coeff_[up] * (out.table_->exponents[m][i] + 1);
  }
  return out;
}

Jet Jet::truncated(int k) const {
  if (k >= order()) return *this;
  Jet out(vars(), k, 0.0);
  for (int m = 0; m < out.table_->size(); ++m) out.coeff_[m] = coeff_[m];
  return out;
}

void Jet::match(const Jet& o) {
  if (!table_) {
    *this = Jet(o.vars(), o.order(), value());
    return;
  }
  if (table_ != o.table_ && (vars() != o.vars() || order() != o.order())) {
    if (vars() != o.vars())
      throw ExpressionError("jets over different variable counts combined");
    // Truncate to the common order.
    if (o.order() < order()) *this = truncated(o.order());
  }
}

Jet& Jet::operator+=(const Jet& o) {
  match(o);
  const int n = std::min(table_->size(), o.table_->size());
  for (int m = 0; m < n; ++m) coeff_[m] += o.coeff_[m];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  match(o);
  const int n = std::min(table_->size(), o.table_->size());
  for (int m = 0; m < n; ++m) coeff_[m] -= o.coeff_[m];
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  match(o);
  const Jet& b = o.order() > order() ? o.truncated(order()) : o;
  std::vector<double> out(coeff_.size(), 0.0);
  for (const auto& t : table_->products) out[t.c] += coeff_[t.a] * b.coeff_[t.b];
  coeff_ = std::move(out);
  return *this;
}

Jet& Jet::operator/=(const Jet& o) { return *this *= pow(o, -1.0); }

Jet& Jet::operator+=(double c) {
  coeff_[0] += c;
  return *this;
}

Jet& Jet::operator*=(double c) {
  for (auto& x : coeff_) x *= c;
  return *this;
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (auto& x : r.coeff_) x = -x;
  return r;
}

Jet Jet::compose(const std::vector<double>& series) const {
  Jet delta = *this;
  delta.coeff_[0] = 0.0;
  const int K = order();
  const int top = std::min<int>(K, static_cast<int>(series.size()) - 1);
  Jet r(vars(), K, series[top]);
  for (int k = top - 1; k >= 0; --k) {
    r *= delta;
    r.coeff_[0] += series[k];
  }
  return r;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator*(const Jet& a, const Jet& b) {
  Jet r = a;
  return r *= b;
}
Jet operator/(const Jet& a, const Jet& b) { return a * pow(b, -1.0); }
Jet operator+(Jet a, double c) { return a += c; }
Jet operator+(double c, Jet a) { return a += c; }
Jet operator-(Jet a, double c) { return a -= c; }
Jet operator-(double c, const Jet& a) { return (-a) += c; }
Jet operator*(Jet a, double c) { return a *= c; }
Jet operator*(double c, Jet a) { return a *= c; }
Jet operator/(Jet a, double c) { return a /= c; }
Jet operator/(double c, const Jet& a) { return pow(a, -1.0) * c; }

namespace {

double inv_factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return 1.0 / f;
}

} // namespace

Jet sin(const Jet& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  std::vector<double> g;
  const double cyc[4] = {s, c, -s, -c};
  for (int k = 0; k <= x.order(); ++k) g.push_back(cyc[k % 4] * inv_factorial(k));
  return x.compose(g);
}

Jet cos(const Jet& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  std::vector<double> g;
  const double cyc[4] = {c, -s, -c, s};
  for (int k = 0; k <= x.order(); ++k) g.push_back(cyc[k % 4] * inv_factorial(k));
  return x.compose(g);
}

Jet exp(const Jet& x) {
  const double e = std::exp(x.value());
  std::vector<double> g;
  for (int k = 0; k <= x.order(); ++k) g.push_back(e * inv_factorial(k));
  return x.compose(g);
}

Jet log(const Jet& x) {
  const double u = x.value();
  if (!(u > 0.0)) throw ExpressionError("log of a non-positive value");
  std::vector<double> g{std::log(u)};
  for (int k = 1; k <= x.order(); ++k)
    g.push_back((k % 2 ? 1.0 : -1.0) / (k * std::pow(u, k)));
  return x.compose(g);
}

Jet pow(const Jet& x, double r) {
  const double u = x.value();
  const bool integral = r == std::floor(r);
  if (u == 0.0 && (!integral || r < 0))
    throw ExpressionError("pow: singular expansion point");
  if (u < 0.0 && !integral) throw ExpressionError("pow: negative base");
  std::vector<double> g;
  double falling = 1.0;
  for (int k = 0; k <= x.order(); ++k) {
    const double p = r - k;
    double term = falling * inv_factorial(k);
    term *= (u == 0.0) ? (p == 0.0 ? 1.0 : 0.0) : std::pow(u, p);
    g.push_back(term);
    falling *= (r - k);
  }
  return x.compose(g);
}

Jet sqrt(const Jet& x) { return pow(x, 0.5); }
Jet square(const Jet& x) { return x * x; }

JetVec seed(const std::vector<double>& u, int order) {
  const int n = static_cast<int>(u.size());
  JetVec out;
  out.reserve(u.size());
  for (int i = 0; i < n; ++i) out.push_back(Jet::variable(i, u[i], n, order));
  return out;
}

} // namespace cdef
