#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "exq/hypersurface.hpp"

using namespace exq;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Expr> exprs(const std::vector<std::string>& s) {
  std::vector<Expr> out;
  for (const auto& t : s) out.push_back(parse(t));
  return out;
}

Chart torus(int n, const std::string& prefix = "x") {
  std::vector<Axis> axes;
  for (int i = 0; i < n; ++i)
    axes.push_back({prefix + std::to_string(i + 1), 0.0, 2 * kPi, Axis::Kind::Periodic, 0});
  return Chart(axes);
}

Metric diagonal(const Chart& c, const std::vector<std::string>& d) {
  std::vector<std::vector<Expr>> g(c.dim(), std::vector<Expr>(c.dim(), parse("0")));
  for (int i = 0; i < c.dim(); ++i) g[i][i] = parse(d[i]);
  return Metric::from_expressions(c, g);
}

// S^n(r) ⊂ R^{n+1} in iterated polar angles.
Embedding sphere_in_flat(int n, double r, int orientation) {
  std::vector<Axis> axes;
  for (int i = 0; i + 1 < n; ++i) axes.push_back({"a" + std::to_string(i + 1), 0.0, kPi, Axis::Kind::Polar, 0});
  axes.push_back({"b", 0.0, 2 * kPi, Axis::Kind::Periodic, 0});
  Chart s(axes);
  const std::string R = std::to_string(r);
  std::vector<std::string> comps;
  std::string prod = R;
  for (int i = 0; i + 1 < n; ++i) {
    comps.push_back(prod + "*cos(a" + std::to_string(i + 1) + ")");
    prod += "*sin(a" + std::to_string(i + 1) + ")";
  }
  comps.push_back(prod + "*cos(b)");
  comps.push_back(prod + "*sin(b)");
  std::vector<Axis> amb;
  for (int i = 0; i <= n; ++i) amb.push_back({"y" + std::to_string(i + 1), -10.0, 10.0, Axis::Kind::Interval, 0});
  Chart ac(amb);
  return Embedding{s, Metric::euclidean(ac), exprs(comps), orientation};
}

// {t = 0} in R × S² × S².
Embedding product_slice() {
  Chart s({{"a", 0.0, kPi, Axis::Kind::Polar, 0},
           {"b", 0.0, 2 * kPi, Axis::Kind::Periodic, 0},
           {"u", 0.0, kPi, Axis::Kind::Polar, 0},
           {"v", 0.0, 2 * kPi, Axis::Kind::Periodic, 0}});
  Chart amb({{"t", -1.0, 1.0, Axis::Kind::Interval, 0},
             {"A", 0.0, kPi, Axis::Kind::Polar, 0},
             {"B", 0.0, 2 * kPi, Axis::Kind::Periodic, 0},
             {"U", 0.0, kPi, Axis::Kind::Polar, 0},
             {"V", 0.0, 2 * kPi, Axis::Kind::Periodic, 0}});
  // unequal radii: with equal radii the normal Weyl slice vanishes
  return Embedding{s, diagonal(amb, {"1", "1", "sin(A)^2", "2", "2*sin(U)^2"}), exprs({"0", "a", "b", "u", "v"}), 1};
}

// Graph x_{n+1} = u(x) over T^n in a perturbed T^{n+1}.
Embedding graph(int n, const std::string& u, bool perturbed) {
  Chart s = torus(n);
  Chart a = torus(n + 1, "y");
  std::vector<std::vector<Expr>> g(n + 1, std::vector<Expr>(n + 1, parse("0")));
  for (int i = 0; i <= n; ++i) g[i][i] = parse("1");
  if (perturbed) {
    g[0][0] = parse("1 + 0.2*sin(y2 + y" + std::to_string(n + 1) + ")");
    g[1][1] = parse("exp(0.1*cos(y1))");
    g[0][n] = g[n][0] = parse("0.1*sin(y" + std::to_string(n + 1) + ")*cos(y2)");
    g[n][n] = parse("1 + 0.15*cos(y1 - y2)");
  }
  std::vector<Expr> iota;
  for (int i = 0; i < n; ++i) iota.push_back(parse("x" + std::to_string(i + 1)));
  iota.push_back(parse(u));
  return Embedding{s, Metric::from_expressions(a, g), iota, 1};
}

double max_abs(const Tensor& t) { return t.max_abs_value(); }

}  // namespace

TEST(Hypersurface, RoundSphereIsUmbilic) {
  Embedding e = sphere_in_flat(4, 2.0, 1);
  std::vector<double> x{0.7, 1.1, 0.3, 2.0};
  ExtrinsicContext ctx(e, x, 4);
  const double sgn = ctx.H().value() > 0 ? 1.0 : -1.0;
  EXPECT_NEAR(std::abs(ctx.H().value()), 0.5, 1e-13);
  EXPECT_LT(max_abs(ctx.L0()), 1e-13);
  // outward normal is the radial unit vector, up to orientation
  for (int a = 0; a < 5; ++a) EXPECT_NEAR(sgn * ctx.normal()[a].value(), ctx.iota()[a].value() / 2.0, 1e-13);
  // induced metric is the round metric of radius 2
  IntrinsicContext round(diagonal(e.surface, {"4", "4*sin(a1)^2", "4*sin(a1)^2*sin(a2)^2",
                                              "4*sin(a1)^2*sin(a2)^2*sin(a3)^2"}),
                         x, 3);
  EXPECT_LT(max_abs(ctx.h() - round.geo().metric()), 1e-13);
}

TEST(Hypersurface, ThreeSphereFialkowVanishes) {
  Embedding e = sphere_in_flat(3, 1.0, 1);
  std::vector<double> x{0.9, 1.4, 0.2};
  ExtrinsicContext ctx(e, x, 5);
  EXPECT_LT(max_abs(ctx.fialkow()), 1e-12);
  EXPECT_LT(max_abs(ctx.rho_bar_tangent()), 1e-14);
}

TEST(Hypersurface, ProductSliceIsTotallyGeodesic) {
  Embedding e = product_slice();
  std::vector<double> x{1.0, 0.5, 2.0, 3.0};
  ExtrinsicContext ctx(e, x, 5);
  EXPECT_LT(max_abs(ctx.L()), 1e-14);
  EXPECT_NEAR(ctx.normal()[0].value(), 1.0, 1e-15);
  for (int a = 1; a < 5; ++a) EXPECT_EQ(ctx.normal()[a].value(), 0.0);
  EXPECT_GT(ctx.surface().norm2(ctx.weyl_slice()).value(), 1e-2);
  EXPECT_NEAR(ctx.surface().trace(ctx.weyl_slice()).value(), 0.0, 1e-12);
  EXPECT_LT(max_abs(ctx.nabla0_rho_bar()), 1e-14);
  EXPECT_LT(max_abs(ctx.nabla0_weyl_0ij0()), 1e-14);
  // 𝔉 = ι*ρ̄ − ρ when H = L̊ = 0
  EXPECT_LT(max_abs(ctx.fialkow() - (ctx.rho_bar_tangent() - ctx.surface_curvature().schouten())), 1e-14);
}

TEST(Hypersurface, GraphStructure) {
  Embedding e = graph(4, "0.1*sin(x1) + 0.05*cos(x2 + x3)", true);
  std::vector<double> x{0.4, 1.3, 2.2, 5.1};
  ExtrinsicContext ctx(e, x, 5);
  const int N = 5;
  // unit normal orthogonal to the tangent frame
  const Tensor gb = ctx.compose(ctx.ambient().metric());
  double nn = 0.0;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) nn += gb(a, b).value() * ctx.normal()[a].value() * ctx.normal()[b].value();
  EXPECT_NEAR(nn, 1.0, 1e-13);
  for (int i = 0; i < 4; ++i) {
    double s = 0.0;
    for (int a = 0; a < N; ++a) s += ctx.conormal()[a].value() * ctx.tangent()[i * N + a].value();
    EXPECT_NEAR(s, 0.0, 1e-13);
  }
  EXPECT_GT(ctx.normal()[N - 1].value(), 0.0);
  EXPECT_NEAR(ctx.surface().trace(ctx.L()).value(), 4.0 * ctx.H().value(), 1e-13);
  EXPECT_NEAR(ctx.surface().trace(ctx.L0()).value(), 0.0, 1e-13);
  EXPECT_NEAR(ctx.surface().trace(ctx.weyl_slice()).value(), 0.0, 1e-12);
  EXPECT_GT(ctx.surface().norm2(ctx.L0()).value(), 1e-6);
}

TEST(Hypersurface, FlatGraphInducedMetric) {
  Embedding e = graph(4, "0.1*sin(x1)", false);
  std::vector<double> x{0.4, 1.3, 2.2, 5.1};
  ExtrinsicContext ctx(e, x, 3);
  const double du = 0.1 * std::cos(0.4);
  EXPECT_NEAR(ctx.h()(0, 0).value(), 1.0 + du * du, 1e-15);
  EXPECT_NEAR(ctx.h()(1, 1).value(), 1.0, 1e-15);
  EXPECT_LT(max_abs(ctx.weyl_slice()), 1e-15);
  // upward normal: L_11 = −u'' / sqrt(1 + u'^2)
  const double upp = -0.1 * std::sin(0.4);
  EXPECT_NEAR(ctx.L()(0, 0).value(), -upp / std::sqrt(1 + du * du), 1e-14);
}

TEST(Hypersurface, OrientationFlip) {
  Embedding e = graph(4, "0.1*sin(x1) + 0.05*cos(x2 + x3)", true);
  std::vector<double> x{0.4, 1.3, 2.2, 5.1};
  ExtrinsicContext a(e, x, 5), b(e.flipped(), x, 5);
  EXPECT_LT(max_abs(a.L() + b.L()), 1e-14);
  EXPECT_NEAR(a.H().value(), -b.H().value(), 1e-14);
  EXPECT_LT(max_abs(a.nabla0_rho_bar() + b.nabla0_rho_bar()), 1e-13);
  EXPECT_LT(max_abs(a.nabla0_weyl_0ij0() + b.nabla0_weyl_0ij0()), 1e-13);
  EXPECT_LT(max_abs(a.weyl_slice() - b.weyl_slice()), 1e-13);
  EXPECT_LT(max_abs(a.G_bar() - b.G_bar()), 1e-13);
  EXPECT_NEAR(a.rho_bar_00().value(), b.rho_bar_00().value(), 1e-14);
}

TEST(Hypersurface, ConformalWeights) {
  Embedding e = graph(4, "0.1*sin(x1) + 0.05*cos(x2 + x3)", true);
  ScalarField phi = ScalarField::from_expr(e.ambient.chart(), parse("0.15*sin(y1 + y5) + 0.1*cos(y3)"));
  Embedding eh = e.rescaled(phi);
  std::vector<double> x{0.4, 1.3, 2.2, 5.1};
  ExtrinsicContext a(e, x, 5), b(eh, x, 5);
  const double w = std::exp(pullback(e, phi)(x, 0).value());
  EXPECT_LT(max_abs(b.L0() - a.L0() * w), 1e-13);
  EXPECT_LT(max_abs(b.fialkow() - a.fialkow()), 1e-12);
  EXPECT_LT(max_abs(b.weyl_slice() - a.weyl_slice()), 1e-12);
  EXPECT_GT(max_abs(a.weyl_slice()), 1e-4);
  // Ĥ = e^{−φ}(H + ∂_ν φ)
  ExtrinsicContext c(e, x, 5);
  Jet phi_amb = phi(c.ambient_point(), 1);
  double dnu = 0.0;
  for (int k = 0; k < 5; ++k) dnu += c.normal()[k].value() * phi_amb.partial(k).value();
  EXPECT_NEAR(b.H().value(), (a.H().value() + dnu) / w, 1e-13);
}

TEST(Hypersurface, NormalDerivativeFiniteDifferenceOracle) {
  // ∇̄_ν ρ̄ along the straight coordinate ray y(s) = ι(x) + s ν, with the
  // Christoffel correction applied at s = 0.
  Embedding e = graph(4, "0.1*sin(x1) + 0.05*cos(x2 + x3)", true);
  std::vector<double> x{0.4, 1.3, 2.2, 5.1};
  ExtrinsicContext ctx(e, x, 5);
  const int N = 5;
  std::vector<double> y(ctx.ambient_point().begin(), ctx.ambient_point().end());
  std::vector<double> nu;
  for (int a = 0; a < N; ++a) nu.push_back(ctx.normal()[a].value());
  auto rho_at = [&](double s) {
    std::vector<double> p = y;
    for (int a = 0; a < N; ++a) p[a] += s * nu[a];
    IntrinsicContext ic(e.ambient, p, 2);
    return ic.curv().schouten().values();
  };
  auto deriv = [&](double h) {
    auto plus = rho_at(h), minus = rho_at(-h);
    std::vector<double> d(plus.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = (plus[k] - minus[k]) / (2 * h);
    return d;
  };
  auto d1 = deriv(1e-3), d2 = deriv(5e-4);
  std::vector<double> rich(d1.size());
  for (std::size_t k = 0; k < d1.size(); ++k) rich[k] = (4 * d2[k] - d1[k]) / 3;
  IntrinsicContext here(e.ambient, y, 2);
  const auto rho = here.curv().schouten().values();
  std::vector<double> cov(N * N);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      double v = rich[a * N + b];
      for (int c = 0; c < N; ++c)
        for (int k = 0; k < N; ++k) {
          v -= nu[c] * here.geo().christoffel(k, c, a).value() * rho[k * N + b];
          v -= nu[c] * here.geo().christoffel(k, c, b).value() * rho[a * N + k];
        }
      cov[a * N + b] = v;
    }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double v = 0.0;
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
          v += cov[a * N + b] * ctx.tangent()[i * N + a].value() * ctx.tangent()[j * N + b].value();
      EXPECT_NEAR(ctx.nabla0_rho_bar()(i, j).value(), v, 1e-8);
    }
}

TEST(Hypersurface, InducedMetricMatchesContext) {
  Embedding e = graph(4, "0.1*sin(x1) + 0.05*cos(x2 + x3)", true);
  const std::vector<double> x{0.3, 1.2, 2.5, 4.1};
  Metric h = induced_metric(e);
  ExtrinsicContext ctx(e, x, 4);
  auto hj = h.jets(x, 3);
  for (int k = 0; k < 16; ++k) {
    auto a = hj[k].coeffs();
    auto b = ctx.h()[k].coeffs();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
  }
  auto h0 = h.jets(x, 0);
  EXPECT_NEAR(h0[5].value(), ctx.h()(1, 1).value(), 1e-15);
}

// At x1 = 0 every ∂u below vanishes, so several normal minors have zero
// constant term but nonzero derivatives.
TEST(Hypersurface, NormalDerivativesWhereSlopesVanish) {
  Embedding e = graph(4, "0.1*sin(x1) * sin(x2) + 0.05*sin(x3)*sin(x4)", false);
  const std::vector<double> x{0.0, 0.0, 0.0, 0.0};
  ExtrinsicContext ctx(e, x, 3);
  const double h = 1e-4;
  for (int i = 0; i < 4; ++i) {
    std::vector<double> xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    ExtrinsicContext p(e, xp, 2), m(e, xm, 2);
    for (int a = 0; a < 5; ++a) {
      const double fd = (p.normal()[a].value() - m.normal()[a].value()) / (2 * h);
      EXPECT_NEAR(ctx.normal()[a].partial(i).value(), fd, 1e-7) << i << "," << a;
    }
  }
}
