#include <gtest/gtest.h>

#include <cmath>

#include "cdef/builtins.hpp"
#include "cdef/errors.hpp"
#include "cdef/expression.hpp"

namespace cdef {
namespace {

struct ExpressionTest : ::testing::Test {
  std::vector<std::string> xy{"x", "y"};
};

TEST_F(ExpressionTest, PrecedenceAndAssociativity) {
  EXPECT_DOUBLE_EQ(Expression::parse("1 + 2 * 3", xy).evaluate({0.0, 0.0}), 7.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2 ^ 3 ^ 2", xy).evaluate({0.0, 0.0}), 512.0);
  EXPECT_DOUBLE_EQ(Expression::parse("-x ^ 2", xy).evaluate({3.0, 0.0}), -9.0);
  EXPECT_DOUBLE_EQ(Expression::parse("8 / 4 / 2", xy).evaluate({0.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(Expression::parse("(x - y) * (x + y)", xy).evaluate({3.0, 2.0}), 5.0);
  EXPECT_DOUBLE_EQ(Expression::parse("norm(x, y, 12)", xy).evaluate({3.0, 4.0}), 13.0);
  EXPECT_NEAR(Expression::parse("R * cos(x / R)", xy, {{"R", 2.0}}).evaluate({1.0, 0.0}), 2.0 * std::cos(0.5), 1e-15);
  EXPECT_NEAR(Expression::parse("sin(pi / 2)", xy).evaluate({0.0, 0.0}), 1.0, 1e-15);
}

TEST_F(ExpressionTest, JetsMatchHandDerivatives) {
  const Expression e = Expression::parse("exp(x) * sin(y) + x^3 / 3 + sqrt(1 + y^2)", xy);
  const double x = 0.3, y = -0.7;
  const Jet j = e.evaluate(seed({x, y}, 3));
  EXPECT_NEAR(j.value(), std::exp(x) * std::sin(y) + x * x * x / 3 + std::sqrt(1 + y * y), 1e-14);
  EXPECT_NEAR(j.d(0), std::exp(x) * std::sin(y) + x * x, 1e-14);
  EXPECT_NEAR(j.d(1), std::exp(x) * std::cos(y) + y / std::sqrt(1 + y * y), 1e-14);
  EXPECT_NEAR(j.d(0, 1), std::exp(x) * std::cos(y), 1e-14);
  EXPECT_NEAR(j.d(1, 1), -std::exp(x) * std::sin(y) + std::pow(1 + y * y, -1.5), 1e-14);
  EXPECT_NEAR(j.d(0, 0, 0), std::exp(x) * std::sin(y) + 2.0, 1e-13);
}

TEST_F(ExpressionTest, ExpressionCylinderMatchesBuiltin) {
  const auto expr = expression_immersion("cyl", {"s", "y"}, {"R * cos(s / R)", "R * sin(s / R)", "y"},
                                         ScalarProduct::euclidean(3), {{"R", 1.5}});
  const auto ref = cylinder(2, 1.5);
  const Vec u = (Vec(2) << 0.4, -0.2).finished();
  const PointJet a = expr->point(u, 3), b = ref->point(u, 3);
  EXPECT_LT((a.x - b.x).norm(), 1e-15);
  EXPECT_LT((a.d1 - b.d1).norm(), 1e-15);
  for (std::size_t i = 0; i < a.d3.size(); ++i) EXPECT_LT((a.d3[i] - b.d3[i]).norm(), 1e-14);
}

TEST_F(ExpressionTest, ErrorsCarryColumns) {
  try {
    Expression::parse("x + * y", xy);
    FAIL();
  } catch (const ExpressionError& e) {
    EXPECT_NE(std::string(e.what()).find("column 5"), std::string::npos) << e.what();
  }
  EXPECT_THROW(Expression::parse("tan(x)", xy), ExpressionError);
  EXPECT_THROW(Expression::parse("x ^ y", xy), ExpressionError);
  EXPECT_THROW(Expression::parse("z + 1", xy), ExpressionError);
  EXPECT_THROW(Expression::parse("(x + 1", xy), ExpressionError);
  EXPECT_THROW(Expression::parse("sin(x, y)", xy), ExpressionError);
  EXPECT_THROW(expression_immersion("bad", xy, {"x"}, ScalarProduct::euclidean(2)), ExpressionError);
}

} // namespace
} // namespace cdef
