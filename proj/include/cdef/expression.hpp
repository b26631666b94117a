#pragma once

// A small closed-form expression language for immersion components:
// numbers, variables, named constants, + - * / ^, unary minus, and the
// functions sin, cos, exp, sqrt and norm(a, b, ...). Expressions are
// evaluated on jets, so every parsed immersion has exact jets to order 3.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cdef/immersion.hpp"

namespace cdef {

class Expression {
public:
  /// Throws ExpressionError with the column of the offending token.
  static Expression parse(const std::string& text, const std::vector<std::string>& variables,
                          const std::map<std::string, double>& constants = {});

  Jet evaluate(const JetVec& x) const;
  double evaluate(const std::vector<double>& x) const;
  const std::string& text() const { return text_; }

  struct Node;

private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

/// Closed-form immersion whose ambient coordinates are the given expressions.
ImmersionPtr expression_immersion(const std::string& name, const std::vector<std::string>& variables,
                                  const std::vector<std::string>& components, const ScalarProduct& ambient,
                                  const std::map<std::string, double>& constants = {});

} // namespace cdef
