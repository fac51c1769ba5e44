#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "exq/expr.hpp"

using namespace exq;

namespace {

const std::vector<std::string> kX12{"x1", "x2"};

std::string random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
  const char* vars[] = {"x1", "x2", "pi"};
  switch (pick(rng)) {
    case 0:
      return std::to_string(std::uniform_int_distribution<int>(0, 9)(rng));
    case 1:
    case 2:
      return vars[std::uniform_int_distribution<int>(0, 2)(rng)];
    case 3:
      return random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1);
    case 4:
      return random_expr(rng, depth - 1) + " - (" + random_expr(rng, depth - 1) + ")";
    case 5:
      return "(" + random_expr(rng, depth - 1) + ") * " + random_expr(rng, depth - 1);
    case 6:
      return random_expr(rng, depth - 1) + " / (" + random_expr(rng, depth - 1) + ")";
    case 7:
      return "-" + random_expr(rng, depth - 1);
    case 8:
      return "(" + random_expr(rng, depth - 1) + ")^" +
             std::to_string(std::uniform_int_distribution<int>(-2, 3)(rng));
    default: {
      const char* f[] = {"sin", "cos", "exp", "log", "sqrt"};
      return std::string(f[std::uniform_int_distribution<int>(0, 4)(rng)]) + "(" +
             random_expr(rng, depth - 1) + ")";
    }
  }
}

}  // namespace

TEST(Expr, ParsesSpecExamples) {
  Expr e = parse("sin(x1)*exp(2*x2)");
  EXPECT_EQ(e.root().kind, ExprNode::Kind::Mul);
  EXPECT_EQ(e.root().lhs->kind, ExprNode::Kind::Call);
  EXPECT_EQ(e.root().rhs->func, Func::Exp);

  Expr p = parse("x1^2 + pi");
  EXPECT_EQ(p.root().kind, ExprNode::Kind::Add);
  EXPECT_EQ(p.root().lhs->kind, ExprNode::Kind::Pow);
  EXPECT_EQ(p.root().rhs->kind, ExprNode::Kind::Pi);
}

TEST(Expr, SyntaxErrorsCarryOffsets) {
  try {
    parse("1 + ");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
  EXPECT_THROW(parse("(x1 + 2"), ParseError);
  EXPECT_THROW(parse("x1 + 2)"), ParseError);
  EXPECT_THROW(parse("tan(x1)"), ParseError);
  EXPECT_THROW(parse("x1^x2"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(Expr, Precedence) {
  std::vector<double> v{2.0, 3.0};
  auto ev = [&](const char* s) { return eval(parse(s).bind(kX12), v); };
  EXPECT_DOUBLE_EQ(ev("-x1^2"), -4.0);
  EXPECT_DOUBLE_EQ(ev("x1^3^2"), 512.0);
  EXPECT_DOUBLE_EQ(ev("x1 - x2 - 1"), -2.0);
  EXPECT_DOUBLE_EQ(ev("x2 / x1 / 2"), 0.75);
  EXPECT_DOUBLE_EQ(ev("1 + x1 * x2"), 7.0);
  EXPECT_DOUBLE_EQ(ev("x1^-1"), 0.5);
  EXPECT_DOUBLE_EQ(ev("2.5e-1 * 4"), 1.0);
}

TEST(Expr, EvalJetExamples) {
  std::vector<std::string> names{"x1"};
  std::vector<Jet> v{Jet::seed_variable(0, 3.0, 1, 2)};
  Jet sq = eval_jet(parse("x1*x1"), names, v);
  EXPECT_DOUBLE_EQ(sq.coeffs()[0], 9.0);
  EXPECT_DOUBLE_EQ(sq.coeffs()[1], 6.0);
  EXPECT_DOUBLE_EQ(sq.coeffs()[2], 1.0);

  std::vector<Jet> neg{Jet::seed_variable(0, -1.0, 1, 2)};
  EXPECT_THROW(eval_jet(parse("sqrt(x1)"), names, neg), SingularFieldError);

  std::vector<Jet> zero{Jet::seed_variable(0, 0.0, 1, 3)};
  Jet s = eval_jet(parse("sin(x1)"), names, zero);
  EXPECT_DOUBLE_EQ(s.coeffs()[1], 1.0);
  EXPECT_DOUBLE_EQ(s.coeffs()[3], -1.0 / 6.0);
}

TEST(Expr, ValidateNamesOffenders) {
  EXPECT_NO_THROW(validate(parse("x1+x2"), kX12));
  EXPECT_NO_THROW(validate(parse("pi"), std::vector<std::string>{}));
  try {
    validate(parse("x3"), kX12);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("x3"), std::string::npos);
  }
}

TEST(Expr, RoundTripIsFixedPoint) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) {
    Expr e = parse(random_expr(rng, 4));
    std::string once = print(e);
    std::string twice = print(parse(once));
    EXPECT_EQ(once, twice);
  }
}

TEST(Expr, DegreeZeroMatchesNumericEval) {
  std::mt19937_64 rng(99);
  std::vector<double> x{0.7, 1.9};
  std::vector<Jet> j{Jet::constant(0.7, 2, 0), Jet::constant(1.9, 2, 0)};
  int compared = 0;
  for (int i = 0; i < 200; ++i) {
    Expr e = parse(random_expr(rng, 3)).bind(kX12);
    double plain;
    try {
      plain = eval(e, x);
    } catch (const Error&) {
      continue;
    }
    if (!std::isfinite(plain)) continue;
    Jet jv = eval_jet(e, j);
    EXPECT_NEAR(jv.value(), plain, 1e-12 * std::max(1.0, std::abs(plain)));
    ++compared;
  }
  EXPECT_GT(compared, 50);
}

TEST(Expr, ParseIsTotal) {
  std::mt19937_64 rng(5);
  const std::string alphabet = "x12 +-*/^().e5pisncoqrtgl";
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    int len = std::uniform_int_distribution<int>(0, 24)(rng);
    for (int k = 0; k < len; ++k)
      s += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
    try {
      parse(s);
    } catch (const ParseError& e) {
      EXPECT_LE(e.offset(), s.size());
    }
  }
}
