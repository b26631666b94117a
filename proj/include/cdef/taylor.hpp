#pragma once

// Truncated multivariate Taylor polynomials ("jets"). A Jet in n variables of
// order K stores the Taylor coefficients f^(a)(x0)/a! for every multi-index a
// with |a| <= K. Arithmetic is exact up to truncation, so evaluating a
// closed-form map on seeded variables yields its derivatives to order K.

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace cdef {

/// Monomial bookkeeping shared by all jets with the same (vars, order).
struct MonomialTable {
  int vars = 0;
  int order = 0;
  std::vector<std::vector<std::uint8_t>> exponents;  ///< graded order
  std::vector<int> degree;
  std::vector<double> factorial;                     ///< a! per monomial
  std::vector<int> first_of_degree;                  ///< size order + 2
  /// Product table: monomial a * monomial b = monomial c, |c| <= order.
  struct Triple { int a, b, c; };
  std::vector<Triple> products;
  /// shift[m * vars + i] = index of m + e_i, or -1 when it exceeds the order.
  std::vector<int> shift;

  int index_of(const std::vector<std::uint8_t>& e) const;
  int size() const { return static_cast<int>(exponents.size()); }

  static std::shared_ptr<const MonomialTable> get(int vars, int order);
};

class Jet {
public:
  Jet() = default;
  Jet(int vars, int order, double value = 0.0);

  static Jet constant(double value, int vars, int order) { return Jet(vars, order, value); }
  /// The coordinate function x_i expanded at x_i = value.
  static Jet variable(int i, double value, int vars, int order);
  /// Jet with the given Taylor coefficients (graded monomial order, padded with zeros).
  static Jet from_coefficients(int vars, int order, const std::vector<double>& coeff);

  int vars() const { return table_ ? table_->vars : 0; }
  int order() const { return table_ ? table_->order : 0; }
  double value() const { return coeff_.empty() ? 0.0 : coeff_[0]; }
  const std::vector<double>& coefficients() const { return coeff_; }
  const MonomialTable& table() const { return *table_; }

  /// Partial derivative of the represented function at the expansion point.
  double derivative(const std::vector<std::uint8_t>& multi_index) const;
  double d(int i) const;
  double d(int i, int j) const;
  double d(int i, int j, int k) const;

  /// d/dx_i as a jet of one order lower.
  Jet partial(int i) const;
  Jet truncated(int order) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet& operator+=(double c);
  Jet& operator-=(double c) { return *this += -c; }
  Jet& operator*=(double c);
  Jet& operator/=(double c) { return *this *= 1.0 / c; }
  Jet operator-() const;

  /// sum_k g_k (x - x0)^k where g_k = g^(k)(value()) / k!.
  Jet compose(const std::vector<double>& series) const;

private:
  std::shared_ptr<const MonomialTable> table_;
  std::vector<double> coeff_;

  void match(const Jet& o);
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(Jet a, double c);
Jet operator+(double c, Jet a);
Jet operator-(Jet a, double c);
Jet operator-(double c, const Jet& a);
Jet operator*(Jet a, double c);
Jet operator*(double c, Jet a);
Jet operator/(Jet a, double c);
Jet operator/(double c, const Jet& a);

Jet sin(const Jet& x);
Jet cos(const Jet& x);
Jet exp(const Jet& x);
Jet log(const Jet& x);
Jet sqrt(const Jet& x);
Jet pow(const Jet& x, double r);
Jet square(const Jet& x);

using JetVec = std::vector<Jet>;

/// Seeds x_i = u_i + (variable i) for a chart point u.
JetVec seed(const std::vector<double>& u, int order);

/// A closed-form map R^n -> R^m evaluated on jets. Applying it to seeded
/// variables gives derivatives; applying it to the output jets of another map
/// gives the jets of the composition.
using JetMap = std::function<JetVec(const JetVec&)>;

} // namespace cdef
