#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "exq/jet.hpp"

using namespace exq;

namespace {

double c(const Jet& j, std::vector<int> a) { return j.coeff(a); }

}  // namespace

TEST(Jet, SeedVariable) {
  Jet x = Jet::seed_variable(0, 2.0, 2, 3);
  EXPECT_EQ(c(x, {}), 2.0);
  EXPECT_EQ(c(x, {1, 0}), 1.0);
  EXPECT_EQ(c(x, {0, 1}), 0.0);
  EXPECT_EQ(c(x, {2, 0}), 0.0);
  Jet y = Jet::seed_variable(1, 0.0, 2, 2);
  EXPECT_EQ(c(y, {0, 1}), 1.0);
  EXPECT_THROW(Jet::seed_variable(2, 1.0, 2, 3), Error);
  EXPECT_THROW(Jet::seed_variable(0, 1.0, 2, 0), DegreeError);
}

TEST(Jet, CoefficientCount) {
  // C(nvars + D, D)
  EXPECT_EQ(Jet(6, 8).coeffs().size(), 3003u);
  EXPECT_EQ(Jet(1, 3).coeffs().size(), 4u);
  EXPECT_EQ(Jet(3, 0).coeffs().size(), 1u);
}

TEST(Jet, Arithmetic) {
  Jet x = Jet::seed_variable(0, 1.0, 1, 2);
  Jet sq = x * x;
  EXPECT_DOUBLE_EQ(c(sq, {0}), 1.0);
  EXPECT_DOUBLE_EQ(c(sq, {1}), 2.0);
  EXPECT_DOUBLE_EQ(c(sq, {2}), 1.0);

  Jet t = Jet::seed_variable(0, 0.0, 1, 2);
  Jet inv = 1.0 / (1.0 + t);
  EXPECT_DOUBLE_EQ(c(inv, {0}), 1.0);
  EXPECT_DOUBLE_EQ(c(inv, {1}), -1.0);
  EXPECT_DOUBLE_EQ(c(inv, {2}), 1.0);
  EXPECT_THROW(1.0 / t, SingularFieldError);
}

TEST(Jet, DegreeIsMinimum) {
  Jet a = Jet::seed_variable(0, 1.0, 2, 4);
  Jet b = Jet::seed_variable(1, 1.0, 2, 2);
  EXPECT_EQ((a * b).degree(), 2);
  EXPECT_EQ((a + b).degree(), 2);
  EXPECT_EQ((b - a).degree(), 2);
}

TEST(Jet, Elementary) {
  Jet x = Jet::seed_variable(0, 0.0, 1, 3);
  Jet e = exp(x);
  EXPECT_DOUBLE_EQ(c(e, {0}), 1.0);
  EXPECT_DOUBLE_EQ(c(e, {1}), 1.0);
  EXPECT_DOUBLE_EQ(c(e, {2}), 0.5);
  EXPECT_DOUBLE_EQ(c(e, {3}), 1.0 / 6.0);

  Jet s = sqrt(Jet::seed_variable(0, 4.0, 1, 1));
  EXPECT_DOUBLE_EQ(c(s, {0}), 2.0);
  EXPECT_DOUBLE_EQ(c(s, {1}), 0.25);

  EXPECT_THROW(log(Jet::seed_variable(0, -1.0, 1, 2)), SingularFieldError);
  EXPECT_THROW(sqrt(Jet::seed_variable(0, -1.0, 1, 2)), SingularFieldError);

  Jet sn = sin(x);
  EXPECT_DOUBLE_EQ(c(sn, {1}), 1.0);
  EXPECT_DOUBLE_EQ(c(sn, {3}), -1.0 / 6.0);
  Jet cs = cos(x);
  EXPECT_DOUBLE_EQ(c(cs, {2}), -0.5);
}

TEST(Jet, PartialAndExtract) {
  Jet x = Jet::seed_variable(0, 1.0, 1, 2);
  Jet d = (x * x).partial(0);
  EXPECT_EQ(d.degree(), 1);
  EXPECT_DOUBLE_EQ(c(d, {0}), 2.0);
  EXPECT_DOUBLE_EQ(c(d, {1}), 2.0);

  Jet k = Jet::constant(3.0, 1, 1).partial(0);
  EXPECT_EQ(k.degree(), 0);
  EXPECT_EQ(k.value(), 0.0);
  EXPECT_THROW(k.partial(0), DegreeError);

  std::vector<int> two{2};
  EXPECT_DOUBLE_EQ((x * x).derivative(two), 2.0);
  EXPECT_DOUBLE_EQ((x * x).derivative(std::vector<int>{}), 1.0);
  std::vector<int> three{3};
  EXPECT_THROW((x * x).derivative(three), DegreeError);
}

TEST(Jet, ProductRuleProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Jet a(3, 4), b(3, 4);
    for (auto& v : a.coeffs()) v = u(rng);
    for (auto& v : b.coeffs()) v = u(rng);
    Jet p = a * b;
    for (int i = 0; i < 3; ++i) {
      std::vector<int> e(3, 0);
      e[i] = 1;
      EXPECT_NEAR(p.derivative(e), a.derivative(e) * b.value() + a.value() * b.derivative(e), 1e-14);
    }
  }
}

TEST(Jet, PartialOfExpConsistency) {
  Jet x = Jet::seed_variable(0, 0.3, 2, 5);
  Jet y = Jet::seed_variable(1, -0.2, 2, 5);
  Jet a = sin(x) * y + x * x;
  for (int i = 0; i < 2; ++i) {
    Jet lhs = exp(a).partial(i);
    Jet rhs = exp(a.truncated(4)) * a.partial(i);
    for (std::size_t k = 0; k < lhs.coeffs().size(); ++k)
      EXPECT_NEAR(lhs.coeffs()[k], rhs.coeffs()[k], 1e-13);
  }
}

TEST(Jet, DivisionInvertsMultiplication) {
  Jet x = Jet::seed_variable(0, 0.4, 2, 6);
  Jet y = Jet::seed_variable(1, 1.3, 2, 6);
  Jet a = exp(x) + y * y;
  Jet b = cos(x * y) + 2.0;
  Jet r = (a / b) * b;
  for (std::size_t k = 0; k < r.coeffs().size(); ++k) EXPECT_NEAR(r.coeffs()[k], a.coeffs()[k], 1e-12);
}

TEST(Jet, PowersAgree) {
  Jet x = Jet::seed_variable(0, 1.7, 1, 6);
  Jet p = powi(x, 3);
  Jet q = powf(x, 3.0);
  for (std::size_t k = 0; k < p.coeffs().size(); ++k) EXPECT_NEAR(p.coeffs()[k], q.coeffs()[k], 1e-12);
  Jet inv = powi(x, -2);
  Jet ref = 1.0 / (x * x);
  for (std::size_t k = 0; k < p.coeffs().size(); ++k) EXPECT_NEAR(inv.coeffs()[k], ref.coeffs()[k], 1e-12);
}

TEST(Jet, CompositionMatchesDirectEvaluation) {
  // outer F(u,v) = sin(u) * exp(v); inner u = x + y^2, v = x*y at (0.3, 0.5).
  const int D = 5;
  Jet x = Jet::seed_variable(0, 0.3, 2, D);
  Jet y = Jet::seed_variable(1, 0.5, 2, D);
  std::vector<Jet> inner{x + y * y, x * y};
  Jet u = Jet::seed_variable(0, inner[0].value(), 2, D);
  Jet v = Jet::seed_variable(1, inner[1].value(), 2, D);
  Composition comp(inner, D);
  Jet composed = comp(sin(u) * exp(v));
  Jet direct = sin(inner[0]) * exp(inner[1]);
  for (std::size_t k = 0; k < direct.coeffs().size(); ++k)
    EXPECT_NEAR(composed.coeffs()[k], direct.coeffs()[k], 1e-12);
}
