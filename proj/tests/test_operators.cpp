#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "exq/operators.hpp"
#include "exq/scenario.hpp"

using namespace exq;

namespace {

using Pt = std::vector<double>;

ScalarField field(const Chart& c, const std::string& s) { return ScalarField::from_expr(c, parse(s)); }

double rel(double l, double r) { return std::abs(l - r) / std::max({1.0, std::abs(l), std::abs(r)}); }

double at(const ScalarField& f, const Pt& x) { return f(x, 0).value(); }

OperatorSettings settings(double c_rho = 2.0) {
  OperatorSettings s;
  s.c_rho = c_rho;
  return s;
}

double intrinsic_cov(Op op, const Scenario& sc, const std::string& phi_s, const std::string& f_s, const Pt& x,
                     double c_rho = 2.0) {
  const auto st = settings(c_rho);
  const auto phi = field(sc.chart(), phi_s);
  const auto f = field(sc.chart(), f_s);
  const auto spec = operator_spec(op, sc.n());
  double l = std::exp(spec.a * at(phi, x)) * at(intrinsic_field(op, conformal_rescale(sc.metric, phi), f, st), x);
  double r = at(intrinsic_field(op, sc.metric, exp_scaled(phi, spec.b) * f, st), x);
  return rel(l, r);
}

double intrinsic_q_law(Op q, const Scenario& sc, const std::string& phi_s, const Pt& x, double c_rho = 2.0) {
  const auto st = settings(c_rho);
  const auto qs = q_spec(q);
  const auto phi = field(sc.chart(), phi_s);
  double l = std::exp(qs.weight * at(phi, x)) *
             at(intrinsic_field(q, conformal_rescale(sc.metric, phi), ScalarField(), st), x);
  double q0 = at(intrinsic_field(q, sc.metric, ScalarField(), st), x);
  double p = at(intrinsic_field(qs.p, sc.metric, phi, st), x);
  return rel(l, q0 + qs.sign * p);
}

double extrinsic_cov(Op op, const Scenario& sc, const std::string& phi_s, const std::string& f_s, const Pt& x) {
  const auto st = settings();
  const auto phi_amb = field(sc.embedding.ambient.chart(), phi_s);
  const auto phi = pullback(sc.embedding, phi_amb);
  const auto f = field(sc.chart(), f_s);
  const auto spec = operator_spec(op, sc.n());
  double l = std::exp(spec.a * at(phi, x)) * at(extrinsic_field(op, sc.embedding.rescaled(phi_amb), f, st), x);
  double r = at(extrinsic_field(op, sc.embedding, exp_scaled(phi, spec.b) * f, st), x);
  return rel(l, r);
}

double extrinsic_q_law(Op q, const Scenario& sc, const std::string& phi_s, const Pt& x) {
  const auto st = settings();
  const auto qs = q_spec(q);
  const auto phi_amb = field(sc.embedding.ambient.chart(), phi_s);
  const auto phi = pullback(sc.embedding, phi_amb);
  double l = std::exp(qs.weight * at(phi, x)) *
             at(extrinsic_field(q, sc.embedding.rescaled(phi_amb), ScalarField(), st), x);
  double q0 = at(extrinsic_field(q, sc.embedding, ScalarField(), st), x);
  double p = at(extrinsic_field(qs.p, sc.embedding, phi, st), x);
  return rel(l, q0 + qs.sign * p);
}

double extrinsic_weight(Op op, const Scenario& sc, const std::string& phi_s, const Pt& x, double w,
                        const OperatorSettings& st = settings()) {
  const auto phi_amb = field(sc.embedding.ambient.chart(), phi_s);
  const auto phi = pullback(sc.embedding, phi_amb);
  double l = std::exp(w * at(phi, x)) * at(extrinsic_field(op, sc.embedding.rescaled(phi_amb), ScalarField(), st), x);
  double r = at(extrinsic_field(op, sc.embedding, ScalarField(), st), x);
  return rel(l, r);
}

const Pt kX4{0.3, 1.2, 2.5, 4.1};
const Pt kX5{0.3, 1.2, 2.5, 4.1, 5.5};
const Pt kSlice{1.0, 0.5, 2.0, 3.0};
const std::string kPhiT4 = "0.1*sin(x1+x2) + 0.08*cos(x3) + 0.05*sin(x4)";
const std::string kPhiT5 = "0.1*sin(x1+x2) + 0.08*cos(x3) + 0.05*sin(x4 - x5)";
const std::string kPhiY5 = "0.1*sin(y1+y5) + 0.07*cos(y2) + 0.05*sin(y3-y4)";
const std::string kPhiSlice = "0.1*t + 0.08*sin(Ya1)*cos(Yb) + 0.06*cos(Yap1) + 0.05*t*cos(Ya1)";

}  // namespace

TEST(Intrinsic, FlatExamples) {
  auto sc = make_scenario("FLAT_T4");
  auto f = field(sc.chart(), "sin(x1)");
  const auto st = settings();
  EXPECT_NEAR(at(intrinsic_field(Op::P2, sc.metric, f, st), kX4), -std::sin(0.3), 1e-14);
  EXPECT_NEAR(at(intrinsic_field(Op::P4, sc.metric, f, st), kX4), std::sin(0.3), 1e-14);
  EXPECT_NEAR(at(intrinsic_field(Op::Q4, sc.metric, f, st), kX4), 0.0, 1e-14);
}

TEST(Intrinsic, RoundSphereValues) {
  auto s4 = make_scenario("ROUND_S(4,1)");
  const Pt x{0.7, 1.1, 0.3, 2.0};
  auto one = ScalarField::constant(4, 1.0);
  EXPECT_NEAR(at(intrinsic_field(Op::P2, s4.metric, one, settings()), x), -2.0, 1e-12);
  EXPECT_NEAR(at(intrinsic_field(Op::Q4, s4.metric, one, settings()), x), 6.0, 1e-10);
  EXPECT_NEAR(at(intrinsic_field(Op::Q4, s4.metric, one, settings(1.0)), x), 7.0, 1e-10);
  auto s2 = make_scenario("ROUND_S(2,1)");
  EXPECT_NEAR(at(intrinsic_field(Op::Q2, s2.metric, ScalarField(), settings()), {0.9, 2.0}), 1.0, 1e-12);
}

TEST(Intrinsic, Covariance) {
  auto t2 = make_scenario("PERTURBED_T(2)");
  auto t3 = make_scenario("PERTURBED_T(3)");
  auto t4 = make_scenario("PERTURBED_T(4)");
  auto t5 = make_scenario("PERTURBED_T(5)");
  EXPECT_LT(intrinsic_cov(Op::P2, t2, "0.1*sin(x1+x2)", "cos(x1) + sin(2*x2)", {0.4, 2.0}), 1e-10);
  EXPECT_LT(intrinsic_cov(Op::P2, t3, "0.1*sin(x1+x2) + 0.05*cos(x3)", "cos(x1)*sin(x3)", {0.4, 2.0, 1.0}), 1e-10);
  EXPECT_LT(intrinsic_cov(Op::P2, t4, kPhiT4, "sin(x1)*cos(x2) + 0.3*cos(x4)", kX4), 1e-10);
  EXPECT_LT(intrinsic_cov(Op::P4, t4, kPhiT4, "sin(x1)*cos(x2) + 0.3*cos(x4)", kX4), 1e-10);
  EXPECT_LT(intrinsic_cov(Op::P4, t5, kPhiT5, "sin(x1)*cos(x2) + 0.3*cos(x4)", kX5), 1e-10);
}

TEST(Intrinsic, RhoCoefficientAudit) {
  auto t4 = make_scenario("PERTURBED_T(4)");
  auto t5 = make_scenario("PERTURBED_T(5)");
  const std::string f = "sin(x1)*cos(x2) + 0.3*cos(x4)";
  // n = 5 covariance pins the zeroth-order term of P4.
  EXPECT_LT(intrinsic_cov(Op::P4, t5, kPhiT5, f, kX5, 2.0), 1e-10);
  EXPECT_GT(intrinsic_cov(Op::P4, t5, kPhiT5, f, kX5, 1.0), 1e-4);
  EXPECT_LT(intrinsic_q_law(Op::Q4, t4, kPhiT4, kX4, 2.0), 1e-10);
  EXPECT_GT(intrinsic_q_law(Op::Q4, t4, kPhiT4, kX4, 1.0), 1e-3);
}

TEST(Intrinsic, QLaws) {
  auto t2 = make_scenario("PERTURBED_T(2)");
  EXPECT_LT(intrinsic_q_law(Op::Q2, t2, "0.1*sin(x1+x2)", {0.4, 2.0}), 1e-10);
}

TEST(Intrinsic, DegreeCapEnforced) {
  auto t4 = make_scenario("FLAT_T4");
  OperatorSettings st;
  st.degree_cap = 4;
  auto f = field(t4.chart(), "sin(x1)");
  auto p4 = intrinsic_field(Op::P4, t4.metric, f, st);
  EXPECT_NO_THROW(p4(kX4, 0));
  EXPECT_THROW(p4(kX4, 1), DegreeError);
}

TEST(Extrinsic, ReducesToIntrinsicWhenUmbilic) {
  auto sc = make_scenario("SPHERE_IN_FLAT(4,2)");
  const Pt x{0.7, 1.1, 0.3, 2.0};
  const auto st = settings();
  auto f = field(sc.chart(), "cos(a1) + sin(a2)*cos(b)");
  ExtrinsicContext e(sc.embedding, x, 6);
  Jet fj = f(x, 6);
  const auto& g = e.surface();
  const auto& c = e.surface_curvature();
  EXPECT_NEAR(ext_p2(e, fj).value(), p2(g, c, fj).value(), 1e-10);
  EXPECT_NEAR(ext_q2(e).value(), q2(c).value(), 1e-10);
  EXPECT_NEAR(ext_p3(e, fj).value(), 0.0, 1e-10);
  EXPECT_NEAR(ext_q3(e).value(), 0.0, 1e-10);
  EXPECT_NEAR(ext_p4_umbilic(e, fj, st).value(), p4(g, c, fj, 2.0).value(), 1e-10);
  EXPECT_NEAR(ext_q4_umbilic(e, st).value(), q4(g, c, 2.0).value(), 1e-10);
  EXPECT_NEAR(ext_p4_critical(e, fj).value(), ext_p4_umbilic(e, fj, st).value(), 1e-9);
  EXPECT_NEAR(c_invariant(e, st.c_lap).value(), 0.0, 1e-10);
  EXPECT_NEAR(lemma_simple_residual(e, st).value(), 0.0, 1e-10);
  // S^4(2): Q4 = n/2 J^2 - 2|rho|^2 = 2·(1/2)^2 - 2·4·(1/8)^2
  EXPECT_NEAR(q4(g, c, 2.0).value(), 0.375, 1e-12);
}

TEST(Extrinsic, P2CorrectionOnFlatGraph) {
  auto sc = make_scenario("GRAPH_FLAT(3)");
  const Pt x{0.4, 2.0, 1.1};
  ExtrinsicContext e(sc.embedding, x, 5);
  Jet f = field(sc.chart(), "sin(x1) + cos(x2 + x3)")(x, 5);
  const auto& g = e.surface();
  const double l0 = g.norm2(e.L0()).value();
  ASSERT_GT(l0, 1e-4);
  EXPECT_NEAR(ext_p2(e, f).value() - p2(g, e.surface_curvature(), f).value(), l0 / 8.0 * f.value(), 1e-12);
  // (n − 3) = 0 drops the ρ term: Q3 = 4(δδL̊ + 2(L̊, 𝔉))
  const double q3 = 4.0 * (div_div(g, e.L0()).value() + 2.0 * g.inner(e.L0(), e.fialkow()).value());
  EXPECT_NEAR(ext_q3(e).value(), q3, 1e-12);
}

TEST(Extrinsic, LowOrderLaws) {
  auto g2 = make_scenario("GRAPH(2)");
  auto g3 = make_scenario("GRAPH(3)");
  const std::string phi3 = "0.1*sin(y1+y3) + 0.07*cos(y2)";
  const std::string phi4 = "0.1*sin(y1+y4) + 0.07*cos(y2)";
  const Pt x3{0.4, 2.0, 1.1};
  EXPECT_LT(extrinsic_q_law(Op::ExtQ2, g2, phi3, {0.4, 2.0}), 1e-10);
  EXPECT_LT(extrinsic_q_law(Op::ExtQ3, g3, phi4, x3), 1e-10);
  EXPECT_LT(extrinsic_cov(Op::ExtP2, g3, phi4, "sin(x1) + cos(x2+x3)", x3), 1e-10);
  EXPECT_LT(extrinsic_cov(Op::ExtP3, g3, phi4, "sin(x1) + cos(x2+x3)", x3), 1e-10);
}

TEST(Extrinsic, CriticalP4) {
  auto g4 = make_scenario("GRAPH(4)");
  EXPECT_LT(extrinsic_cov(Op::ExtP4Critical, g4, kPhiY5, "sin(x1) + cos(x2+x3)*sin(x4)", kX4), 1e-10);
  auto p1 = extrinsic_field(Op::ExtP4Critical, g4.embedding, ScalarField::constant(4, 1.0), settings());
  EXPECT_NEAR(at(p1, kX4), 0.0, 1e-12);
}

TEST(Extrinsic, UmbilicOnlyGuard) {
  auto g4 = make_scenario("GRAPH(4)");
  auto q = extrinsic_field(Op::ExtQ4Umbilic, g4.embedding, ScalarField(), settings());
  try {
    q(kX4, 0);
    FAIL() << "expected NonUmbilicError";
  } catch (const NonUmbilicError& e) {
    EXPECT_GT(e.max_abs(), 1e-4);
    EXPECT_NE(std::string(e.what()).find("0.3"), std::string::npos);
  }
}

TEST(Extrinsic, ProductSliceCriticalLaw) {
  auto sc = make_scenario("SLICE_S2xS2");
  const auto st = settings();
  ExtrinsicContext e(sc.embedding, kSlice, 6);
  const auto& g = e.surface();
  const double corr = ext_q4_umbilic(e, st).value() - q4(g, e.surface_curvature(), 2.0).value();
  const double expect = 4.5 * g.norm2(e.weyl_slice()).value() + 3.0 * div_div(g, e.weyl_slice()).value();
  EXPECT_GT(std::abs(corr), 1e-3);
  EXPECT_NEAR(corr, expect, 1e-12);
  EXPECT_LT(extrinsic_q_law(Op::ExtQ4Umbilic, sc, kPhiSlice, kSlice), 1e-10);
  EXPECT_LT(extrinsic_cov(Op::ExtP4Umbilic, sc, kPhiSlice, "cos(a1) + sin(ap1)*cos(bp)", kSlice), 1e-10);
}

TEST(Extrinsic, CInvariance) {
  auto g4 = make_scenario("GRAPH(4)");
  EXPECT_LT(extrinsic_weight(Op::CInvariant, g4, kPhiY5, kX4, 4.0), 1e-10);
  // the opposite sign on Δ|L̊|² breaks invariance
  OperatorSettings audit = settings();
  audit.c_lap = -0.5;
  EXPECT_GT(extrinsic_weight(Op::CInvariant, g4, kPhiY5, kX4, 4.0, audit), 1e-3);
}

TEST(Extrinsic, CUnderOrientationFlip) {
  auto g4 = make_scenario("GRAPH(4)");
  auto c = extrinsic_field(Op::CInvariant, g4.embedding, ScalarField(), settings());
  auto cf = extrinsic_field(Op::CInvariant, g4.embedding.flipped(), ScalarField(), settings());
  const double v = at(c, kX4);
  EXPECT_GT(std::abs(v), 1e-6);
  EXPECT_NEAR(at(cf, kX4), v, 1e-12 * std::max(1.0, std::abs(v)));
}

TEST(Extrinsic, LemmaSimple) {
  for (const char* name : {"SLICE_S2xS2", "CONF_PERTURBED(SLICE_S2xS2)"}) {
    auto sc = make_scenario(name);
    auto r = extrinsic_field(Op::LemmaSimple, sc.embedding, ScalarField(), settings());
    EXPECT_LT(std::abs(at(r, kSlice)), 1e-8) << name;
  }
  for (const char* name : {"SLICE_S3", "CONF_PERTURBED(SLICE_S3)"}) {
    auto sc = make_scenario(name);
    auto r = extrinsic_field(Op::LemmaSimple, sc.embedding, ScalarField(), settings());
    EXPECT_LT(std::abs(at(r, {1.0, 0.5, 2.0})), 1e-8) << name;
  }
}

TEST(Extrinsic, QuarticWeights) {
  auto g4 = make_scenario("GRAPH(4)");
  for (Op op : {Op::L0Norm4, Op::TrL0Fourth, Op::L0SqWeyl, Op::WeylSliceNorm2, Op::WeylNorm2})
    EXPECT_LT(extrinsic_weight(op, g4, kPhiY5, kX4, 4.0), 1e-10) << op_info(op).name;
  auto sc = make_scenario("SPHERE_IN_FLAT(4,2)");
  ExtrinsicContext e(sc.embedding, Pt{0.7, 1.1, 0.3, 2.0}, 4);
  auto q = quartic_invariants(e);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(q[i].value(), 0.0, 1e-12);
}

TEST(Catalog, SpecsAndLookup) {
  auto s = operator_spec(Op::P4, 4);
  EXPECT_EQ(s.a, 4.0);
  EXPECT_EQ(s.b, 0.0);
  auto s3 = operator_spec(Op::ExtP3, 3);
  EXPECT_EQ(s3.a, 3.0);
  EXPECT_EQ(s3.b, 0.0);
  EXPECT_EQ(q_spec(Op::ExtQ2).sign, -1);
  EXPECT_EQ(q_spec(Op::ExtQ3).sign, +1);
  EXPECT_EQ(op_info("ext_p4_critical").op, Op::ExtP4Critical);
  EXPECT_THROW(op_info("p6"), ConfigError);
  EXPECT_THROW(operator_spec(Op::Q4, 4), ConfigError);
  EXPECT_THROW(intrinsic_field(Op::P4, make_scenario("FLAT_T(2)").metric, ScalarField(), settings()), GeometryError);
  EXPECT_THROW(extrinsic_field(Op::ExtP4Critical, make_scenario("GRAPH(3)").embedding, ScalarField(), settings()),
               GeometryError);
}
