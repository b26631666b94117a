#include "cdef/expression.hpp"

#include <cctype>
#include <cmath>
#include <functional>

#include "cdef/errors.hpp"

namespace cdef {

struct Expression::Node {
  enum Kind { number, variable, neg, add, sub, mul, div, pow, call } kind = number;
  double value = 0.0;
  int var = -1;
  std::string fn;
  std::vector<std::shared_ptr<const Node>> args;
  bool constant = true;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

std::shared_ptr<Node> make(Node::Kind k, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  for (const auto& a : args) n->constant = n->constant && a->constant;
  n->args = std::move(args);
  return n;
}

class Parser {
public:
  Parser(const std::string& s, const std::vector<std::string>& vars, const std::map<std::string, double>& consts)
      : s_(s), vars_(vars), consts_(consts) {}

  NodePtr run() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

private:
  const std::string& s_;
  const std::vector<std::string>& vars_;
  const std::map<std::string, double>& consts_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError("column " + std::to_string(pos_ + 1) + ": " + what + " in \"" + s_ + "\"");
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr a = term();
    for (;;) {
      if (accept('+')) a = make(Node::add, {a, term()});
      else if (accept('-')) a = make(Node::sub, {a, term()});
      else return a;
    }
  }
  NodePtr term() {
    NodePtr a = unary();
    for (;;) {
      if (accept('*')) a = make(Node::mul, {a, unary()});
      else if (accept('/')) a = make(Node::div, {a, unary()});
      else return a;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(Node::neg, {unary()});
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) {
      const std::size_t at = pos_;
      NodePtr e = unary();
      if (!e->constant) {
        pos_ = at;
        fail("exponent must not depend on the variables");
      }
      return make(Node::pow, {base, e});
    }
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Node>();
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      if (accept('(')) {
        static const std::map<std::string, int> arity = {{"sin", 1}, {"cos", 1}, {"exp", 1}, {"sqrt", 1}, {"norm", -1}};
        const auto it = arity.find(id);
        if (it == arity.end()) {
          pos_ = start;
          fail("unknown function '" + id + "'");
        }
        std::vector<NodePtr> args{expr()};
        while (accept(',')) args.push_back(expr());
        if (!accept(')')) fail("expected ')'");
        if (it->second > 0 && static_cast<int>(args.size()) != it->second) {
          pos_ = start;
          fail(id + " takes one argument");
        }
        auto n = make(Node::call, std::move(args));
        n->fn = id;
        return n;
      }
      for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i] == id) {
          auto n = std::make_shared<Node>();
          n->kind = Node::variable;
          n->var = static_cast<int>(i);
          n->constant = false;
          return n;
        }
      double v = 0.0;
      if (const auto it = consts_.find(id); it != consts_.end()) v = it->second;
      else if (id == "pi") v = M_PI;
      else {
        pos_ = start;
        fail("unknown identifier '" + id + "'");
      }
      auto n = std::make_shared<Node>();
      n->value = v;
      return n;
    }
    if (accept('(')) {
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
};

template <class T>
T integer_power(const T& x, int k) {
  T acc = x;
  for (int i = 1; i < k; ++i) acc = acc * x;
  return acc;
}

// Shared evaluator for doubles and jets.
template <class T>
T eval(const Node& n, const std::vector<T>& x, const std::function<T(double)>& lift) {
  switch (n.kind) {
    case Node::number: return lift(n.value);
    case Node::variable: return x[n.var];
    case Node::neg: return -eval(*n.args[0], x, lift);
    case Node::add: return eval(*n.args[0], x, lift) + eval(*n.args[1], x, lift);
    case Node::sub: return eval(*n.args[0], x, lift) - eval(*n.args[1], x, lift);
    case Node::mul: return eval(*n.args[0], x, lift) * eval(*n.args[1], x, lift);
    case Node::div: return eval(*n.args[0], x, lift) / eval(*n.args[1], x, lift);
    case Node::pow: {
      const T base = eval(*n.args[0], x, lift);
      const double e = eval<double>(*n.args[1], {}, [](double v) { return v; });  // constant by construction
      if (e == std::floor(e) && e >= 1.0 && e <= 4.0) return integer_power(base, static_cast<int>(e));
      using std::pow;
      return pow(base, e);
    }
    case Node::call: {
      using std::cos;
      using std::exp;
      using std::sin;
      using std::sqrt;
      if (n.fn == "norm") {
        T acc = lift(0.0);
        for (const auto& a : n.args) {
          const T v = eval(*a, x, lift);
          acc = acc + v * v;
        }
        return sqrt(acc);
      }
      const T a = eval(*n.args[0], x, lift);
      if (n.fn == "sin") return sin(a);
      if (n.fn == "cos") return cos(a);
      if (n.fn == "exp") return exp(a);
      return sqrt(a);
    }
  }
  return lift(0.0);
}

} // namespace

Expression Expression::parse(const std::string& text, const std::vector<std::string>& variables,
                             const std::map<std::string, double>& constants) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text, variables, constants).run();
  return e;
}

Jet Expression::evaluate(const JetVec& x) const {
  if (x.empty()) throw ExpressionError("jet evaluation needs at least one variable");
  const int vars = x[0].vars(), order = x[0].order();
  return eval<Jet>(*root_, x, [vars, order](double v) { return Jet::constant(v, vars, order); });
}

double Expression::evaluate(const std::vector<double>& x) const {
  return eval<double>(*root_, x, [](double v) { return v; });
}

ImmersionPtr expression_immersion(const std::string& name, const std::vector<std::string>& variables,
                                  const std::vector<std::string>& components, const ScalarProduct& ambient,
                                  const std::map<std::string, double>& constants) {
  if (static_cast<int>(components.size()) != ambient.dim())
    throw ExpressionError(name + ": " + std::to_string(components.size()) + " components for an ambient of dimension " +
                          std::to_string(ambient.dim()));
  std::vector<Expression> exprs;
  for (const auto& c : components) exprs.push_back(Expression::parse(c, variables, constants));
  return std::make_shared<ClosedFormImmersion>(name, static_cast<int>(variables.size()), ambient,
                                               [exprs](const JetVec& x) {
                                                 JetVec out;
                                                 for (const auto& e : exprs) out.push_back(e.evaluate(x));
                                                 return out;
                                               });
}

} // namespace cdef
