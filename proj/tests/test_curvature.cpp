#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "exq/curvature.hpp"

using namespace exq;

namespace {

constexpr double kPi = std::numbers::pi;

Chart torus(int n) {
  std::vector<Axis> axes;
  for (int i = 0; i < n; ++i)
    axes.push_back({"x" + std::to_string(i + 1), 0.0, 2 * kPi, Axis::Kind::Periodic, 0});
  return Chart(axes);
}

Metric diagonal(const Chart& c, const std::vector<std::string>& d) {
  std::vector<std::vector<Expr>> g(c.dim(), std::vector<Expr>(c.dim(), parse("0")));
  for (int i = 0; i < c.dim(); ++i) g[i][i] = parse(d[i]);
  return Metric::from_expressions(c, g);
}

// Round S^m of radius 1 in iterated polar angles.
Metric round_sphere(int m) {
  std::vector<Axis> axes;
  for (int i = 0; i + 1 < m; ++i) axes.push_back({"a" + std::to_string(i + 1), 0.0, kPi, Axis::Kind::Polar, 0});
  axes.push_back({"b", 0.0, 2 * kPi, Axis::Kind::Periodic, 0});
  Chart c(axes);
  std::vector<std::string> d;
  std::string prefix = "1";
  for (int i = 0; i < m; ++i) {
    d.push_back(prefix);
    if (i + 1 < m) prefix += "*sin(" + axes[i].name + ")^2";
  }
  return diagonal(c, d);
}

Metric perturbed_t4() {
  Chart c = torus(4);
  std::vector<std::vector<Expr>> g(4, std::vector<Expr>(4, parse("0")));
  g[0][0] = parse("1 + 0.2*sin(x2)");
  g[1][1] = parse("1 + 0.15*cos(x1 + x3)");
  g[2][2] = parse("1");
  g[3][3] = parse("exp(0.1*sin(x1))");
  g[0][1] = g[1][0] = parse("0.1*cos(x4)");
  g[2][3] = g[3][2] = parse("0.05*sin(x2 - x1)");
  return Metric::from_expressions(c, g);
}

}  // namespace

TEST(Curvature, FlatTorusIsFlat) {
  IntrinsicContext ctx(Metric::euclidean(torus(4)), std::vector<double>{1, 2, 3, 4}, 3);
  EXPECT_EQ(ctx.curv().riemann().max_abs_value(), 0.0);
  EXPECT_EQ(ctx.curv().J().value(), 0.0);
}

TEST(Curvature, UnitTwoSphere) {
  std::vector<double> x{1.1, 0.3};
  IntrinsicContext ctx(round_sphere(2), x, 3);
  EXPECT_NEAR(ctx.curv().riemann()(0, 1, 0, 1).value(), ctx.geo().det().value(), 1e-14);
  EXPECT_NEAR(ctx.curv().J().value(), 1.0, 1e-14);
  EXPECT_THROW(ctx.curv().schouten(), GeometryError);
}

TEST(Curvature, UnitFourSphere) {
  std::vector<double> x{0.7, 1.1, 0.3, 2.0};
  IntrinsicContext ctx(round_sphere(4), x, 3);
  EXPECT_NEAR(ctx.curv().scalar().value(), 12.0, 1e-12);
  EXPECT_NEAR(ctx.curv().J().value(), 2.0, 1e-12);
  Tensor rho_minus = ctx.curv().schouten() - 0.5 * ctx.geo().metric();
  EXPECT_LT(rho_minus.max_abs_value(), 1e-12);
  EXPECT_NEAR(ctx.geo().norm2(ctx.curv().schouten()).value(), 1.0, 1e-12);
  EXPECT_LT(ctx.curv().weyl().max_abs_value(), 1e-12);
  EXPECT_NEAR(ctx.geo().inner(ctx.curv().schouten(), ctx.geo().metric()).value(), 2.0, 1e-12);
}

TEST(Curvature, SymmetriesOnPerturbedTorus) {
  std::vector<double> x{0.3, 1.1, 2.5, 4.0};
  IntrinsicContext ctx(perturbed_t4(), x, 3);
  const Tensor& R = ctx.curv().riemann();
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          double bianchi = R(i, j, k, l).value() + R(i, k, l, j).value() + R(i, l, j, k).value();
          worst = std::max({worst, std::abs(bianchi), std::abs(R(i, j, k, l).value() - R(k, l, i, j).value()),
                            std::abs(R(i, j, k, l).value() + R(j, i, k, l).value()),
                            std::abs(R(i, j, k, l).value() + R(i, j, l, k).value())});
        }
  EXPECT_LT(worst, 1e-12);
  EXPECT_GT(R.max_abs_value(), 1e-3);

  const Tensor& W = ctx.curv().weyl();
  const Tensor& gi = ctx.geo().inverse();
  double trace = 0.0;
  for (int j = 0; j < 4; ++j)
    for (int l = 0; l < 4; ++l) {
      double s = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) s += gi(i, k).value() * W(i, j, k, l).value();
      trace = std::max(trace, std::abs(s));
    }
  EXPECT_LT(trace, 1e-12);
  EXPECT_GT(W.max_abs_value(), 1e-3);
  EXPECT_NEAR(ctx.geo().trace(ctx.curv().schouten()).value(), ctx.curv().J().value(), 1e-13);
}

TEST(Curvature, WeylVanishesInDimensionThree) {
  Chart c = torus(3);
  std::vector<std::vector<Expr>> g(3, std::vector<Expr>(3, parse("0")));
  g[0][0] = parse("1 + 0.2*sin(x2)");
  g[1][1] = parse("1 + 0.1*cos(x3)");
  g[2][2] = parse("exp(0.1*sin(x1))");
  g[0][2] = g[2][0] = parse("0.1*cos(x2)");
  IntrinsicContext ctx(Metric::from_expressions(c, g), std::vector<double>{0.5, 1.5, 2.5}, 3);
  EXPECT_LT(ctx.curv().weyl().max_abs_value(), 1e-12);
  EXPECT_GT(ctx.curv().riemann().max_abs_value(), 1e-3);
}

TEST(Curvature, ProductOfSpheresHasWeyl) {
  Chart c({{"a", 0.0, kPi, Axis::Kind::Polar, 0},
           {"b", 0.0, 2 * kPi, Axis::Kind::Periodic, 0},
           {"u", 0.0, kPi, Axis::Kind::Polar, 0},
           {"v", 0.0, 2 * kPi, Axis::Kind::Periodic, 0}});
  IntrinsicContext ctx(diagonal(c, {"1", "sin(a)^2", "1", "sin(u)^2"}), std::vector<double>{1.0, 0.5, 2.0, 3.0}, 2);
  EXPECT_GT(ctx.geo().norm2(ctx.curv().weyl()).value(), 1e-2);
}

TEST(Curvature, ConformalLaws) {
  Metric g = perturbed_t4();
  Chart c = g.chart();
  ScalarField phi = ScalarField::from_expr(c, parse("0.15*sin(x1 + x2) + 0.1*cos(x3)*sin(x4)"));
  Metric gh = conformal_rescale(g, phi);
  std::vector<double> x{0.9, 2.1, 0.4, 5.0};
  IntrinsicContext base(g, x, 3), hat(gh, x, 3);
  // Weyl with all indices down has weight 2.
  const double e2 = std::exp(2.0 * phi(x, 0).value());
  Tensor diff = hat.curv().weyl() - e2 * base.curv().weyl();
  EXPECT_LT(diff.max_abs_value(), 1e-10 * std::max(1.0, base.curv().weyl().max_abs_value()));

  // ρ̂ = ρ − Hess φ + dφ⊗dφ − ½|dφ|² g
  Jet p = phi(x, 3);
  Tensor dp = base.geo().d(p);
  Tensor expect = base.curv().schouten() - base.geo().hessian(p);
  Jet half = 0.5 * base.geo().norm2(dp);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) expect(i, j) += dp[i] * dp[j] - half * base.geo().metric()(i, j);
  Tensor r = hat.curv().schouten() - expect;
  EXPECT_LT(r.max_abs_value(), 1e-11);

  // scal̂ = e^{-2φ}(scal − 2(m−1)Δφ − (m−2)(m−1)|dφ|²)
  double scal_hat = hat.curv().scalar().value();
  double oracle = (base.curv().scalar().value() - 6.0 * base.geo().laplacian(p).value() -
                   6.0 * base.geo().norm2(dp).value()) /
                  e2;
  EXPECT_NEAR(scal_hat, oracle, 1e-11);
}
