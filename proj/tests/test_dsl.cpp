#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "cbundle/dsl.hpp"

using namespace cbundle;
using namespace cbundle::dsl;

TEST(Parse, Examples) {
  EXPECT_EQ(to_sexpr(*parse_expression("sin(2*pi*x1)")), "sin(mul(mul(2,pi),x1))");
  EXPECT_EQ(to_sexpr(*parse_expression("x0*x1 + x2^2")), "add(mul(x0,x1),pow(x2,2))");
}

TEST(Parse, UnaryPlusIsRejected) {
  try {
    parse_expression("2*+3");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 2u);
  }
}

TEST(Parse, Precedence) {
  EXPECT_EQ(to_sexpr(*parse_expression("-x0^2")), "neg(pow(x0,2))");
  EXPECT_EQ(to_sexpr(*parse_expression("2^3^2")), "pow(2,pow(3,2))");
  EXPECT_EQ(to_sexpr(*parse_expression("2^-1")), "pow(2,neg(1))");
  EXPECT_EQ(to_sexpr(*parse_expression("a - b - c", {{"a", 0}, {"b", 1}, {"c", 2}})), "sub(sub(a,b),c)");
  EXPECT_EQ(to_sexpr(*parse_expression("x0/x1/x2")), "div(div(x0,x1),x2)");
  EXPECT_EQ(to_sexpr(*parse_expression("-x0*x1")), "mul(neg(x0),x1)");
  EXPECT_EQ(to_sexpr(*parse_expression("atan2(x1, x0 + 1)")), "atan2(x1,add(x0,1))");
  EXPECT_DOUBLE_EQ(evaluate(*parse_expression("2^3^2"), {}), 512.0);
  EXPECT_DOUBLE_EQ(evaluate(*parse_expression("-2^2"), {}), -4.0);
  EXPECT_DOUBLE_EQ(evaluate(*parse_expression("8/4/2"), {}), 1.0);
  EXPECT_DOUBLE_EQ(evaluate(*parse_expression("1.5e1 - .5"), {}), 14.5);
}

TEST(Parse, Errors) {
  auto offset = [](const char* s) -> long {
    try {
      parse_expression(s);
    } catch (const ParseError& e) {
      return static_cast<long>(e.offset());
    }
    return -1;
  };
  EXPECT_EQ(offset("x0 + foo"), 5);
  EXPECT_EQ(offset("tan(x0)"), 0);
  EXPECT_EQ(offset("sin(x0, x1)"), 0);
  EXPECT_EQ(offset("(x0 + 1"), 7);
  EXPECT_EQ(offset("x0 x1"), 3);
  EXPECT_EQ(offset(""), 0);
  EXPECT_EQ(offset("1e"), 2);
  EXPECT_EQ(offset("x01"), 0);
  EXPECT_EQ(offset("sin"), 0);
}

TEST(Evaluate, DomainErrors) {
  EXPECT_THROW(evaluate(*parse_expression("log(x0)"), {{-1.0}}), DomainError);
  EXPECT_THROW(evaluate(*parse_expression("sqrt(x0)"), {{-1e-3}}), DomainError);
  EXPECT_THROW(evaluate(*parse_expression("1/x0"), {{1e-310}}), DomainError);
  EXPECT_NO_THROW(evaluate(*parse_expression("1/x0"), {{1e-200}}));
  EXPECT_THROW(evaluate(*parse_expression("x3"), {{1.0, 2.0}}), ConstraintViolation);
}

TEST(Lower, MatchesDirectEvaluation) {
  const auto a = parse_expression("sin(2*pi*x1)*exp(x0) - atan2(x1, x2)^2/sqrt(1 + x0^2) + log(2 + cos(x2))");
  const Expr e = to_expr(*a);
  const double p[] = {0.3, -0.7, 1.9};
  EXPECT_NEAR(e(p), evaluate(*a, p), 1e-14);
  // d/dx0 against a central difference
  const double h = 1e-6;
  double pp[] = {0.3 + h, -0.7, 1.9}, pm[] = {0.3 - h, -0.7, 1.9};
  EXPECT_NEAR(e.diff(0)(p), (evaluate(*a, pp) - evaluate(*a, pm)) / (2 * h), 1e-8);
  EXPECT_EQ(max_var(*a), 2);
}

namespace {

AstPtr random_ast(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 9 : 2);
  auto a = std::make_shared<Ast>();
  switch (pick(rng)) {
    case 0:
      a->kind = Kind::Num;
      a->value = std::uniform_int_distribution<int>(0, 40)(rng) / 8.0;
      break;
    case 1:
      a->kind = Kind::Var;
      a->var = std::uniform_int_distribution<int>(0, 3)(rng);
      a->name = "x" + std::to_string(a->var);
      break;
    case 2: a->kind = Kind::Pi; break;
    case 3:
      a->kind = Kind::Neg;
      a->args = {random_ast(rng, depth - 1)};
      break;
    case 4:
    case 5:
    case 6:
    case 7:
    case 8: {
      static const Kind ops[] = {Kind::Add, Kind::Sub, Kind::Mul, Kind::Div, Kind::Pow};
      a->kind = ops[std::uniform_int_distribution<int>(0, 4)(rng)];
      a->args = {random_ast(rng, depth - 1), random_ast(rng, depth - 1)};
      break;
    }
    default: {
      static const char* fs[] = {"sin", "cos", "exp", "log", "sqrt", "atan2"};
      a->kind = Kind::Call;
      a->name = fs[std::uniform_int_distribution<int>(0, 5)(rng)];
      a->args = {random_ast(rng, depth - 1)};
      if (a->name == "atan2") a->args.push_back(random_ast(rng, depth - 1));
    }
  }
  return a;
}

}  // namespace

TEST(Property, PrintParseRoundTrip) {
  std::mt19937 rng(20261015);
  for (int i = 0; i < 2000; ++i) {
    const AstPtr a = random_ast(rng, 5);
    const std::string text = print(*a);
    const AstPtr b = parse_expression(text);
    ASSERT_TRUE(equal(*a, *b)) << text << "\n" << to_sexpr(*a) << "\n" << to_sexpr(*b);
    ASSERT_EQ(print(*b), text);
  }
}

TEST(Property, FullyParenthesisedAgrees) {
  // Every node wrapped in parentheses parses to the same tree as the
  // minimally parenthesised form.
  std::mt19937 rng(7);
  std::function<std::string(const Ast&)> full = [&](const Ast& a) -> std::string {
    auto bin = [&](const char* op) { return "(" + full(*a.args[0]) + op + full(*a.args[1]) + ")"; };
    switch (a.kind) {
      case Kind::Neg: return "(-" + full(*a.args[0]) + ")";
      case Kind::Add: return bin("+");
      case Kind::Sub: return bin("-");
      case Kind::Mul: return bin("*");
      case Kind::Div: return bin("/");
      case Kind::Pow: return bin("^");
      case Kind::Call: {
        std::string s = a.name + "(" + full(*a.args[0]);
        if (a.args.size() > 1) s += "," + full(*a.args[1]);
        return s + ")";
      }
      default: return "(" + print(a) + ")";
    }
  };
  for (int i = 0; i < 1000; ++i) {
    const AstPtr a = random_ast(rng, 4);
    ASSERT_TRUE(equal(*a, *parse_expression(full(*a)))) << full(*a);
  }
}
