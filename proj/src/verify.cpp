#include "exq/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <memory>
#include <mutex>
#include <numbers>
#include <thread>

namespace exq {

namespace {

constexpr double kPi = std::numbers::pi;

struct SuiteName {
  Suite suite;
  const char* name;
};
constexpr SuiteName kSuites[] = {{Suite::Intrinsic, "intrinsic"},
                                 {Suite::Extrinsic, "extrinsic"},
                                 {Suite::Integral, "integral"},
                                 {Suite::Structural, "structural"},
                                 {Suite::Audit, "audit"}};

bool has(const std::vector<Suite>& s, Suite x) { return std::find(s.begin(), s.end(), x) != s.end(); }

double value_at(const ScalarField& f, std::span<const double> x) { return f(x, 0).value(); }

const Chart& phi_chart(const Scenario& sc) { return sc.embedded() ? sc.embedding.ambient.chart() : sc.chart(); }

const std::vector<Expr>& phi_features(const Scenario& sc) {
  return sc.embedded() ? sc.ambient_features : sc.features;
}

ScalarField bound_field(const Chart& c, const Expr& e) {
  validate(e, c.names());
  return ScalarField::from_expr(c, e);
}

// φ on its own chart, and φ as seen on the manifold.
struct Phi {
  ScalarField own;
  ScalarField on_manifold;
};

Phi make_phi(const Scenario& sc, const Expr& phi) {
  Phi p;
  p.own = bound_field(phi_chart(sc), phi);
  p.on_manifold = sc.embedded() ? pullback(sc.embedding, p.own) : p.own;
  return p;
}

// The quantity for g, or for e^{2φ}g when `phi` is given.
ScalarField quantity(Op op, const Scenario& sc, const ScalarField* phi, const ScalarField& f,
                     const OperatorSettings& s) {
  if (sc.embedded()) return extrinsic_field(op, phi ? sc.embedding.rescaled(*phi) : sc.embedding, f, s);
  return intrinsic_field(op, phi ? conformal_rescale(sc.metric, *phi) : sc.metric, f, s);
}

Metric volume_metric(const Scenario& sc) { return sc.embedded() ? induced_metric(sc.embedding) : sc.metric; }

double max_abs_of(const Tensor& t) { return t.max_abs_value(); }

}  // namespace

// ---- suites -----------------------------------------------------------------

const char* suite_name(Suite s) {
  for (const auto& e : kSuites)
    if (e.suite == s) return e.name;
  return "?";
}

std::vector<Suite> parse_suites(std::string_view text) {
  std::vector<Suite> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string_view item = text.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item == "all") {
      for (const auto& e : kSuites)
        if (!has(out, e.suite)) out.push_back(e.suite);
    } else {
      bool found = false;
      for (const auto& e : kSuites)
        if (item == e.name) {
          found = true;
          if (!has(out, e.suite)) out.push_back(e.suite);
        }
      if (!found)
        throw ConfigError("unknown suite '" + std::string(item) +
                          "' (known: all, intrinsic, extrinsic, integral, structural, audit)");
    }
    pos = comma + 1;
  }
  // canonical order so that equivalent selections plan identically
  std::vector<Suite> sorted;
  for (const auto& e : kSuites)
    if (has(out, e.suite)) sorted.push_back(e.suite);
  return sorted;
}

std::string suites_text(const std::vector<Suite>& s) {
  if (s.size() == std::size(kSuites)) return "all";
  std::string out;
  for (Suite x : s) out += (out.empty() ? "" : ",") + std::string(suite_name(x));
  return out;
}

OperatorSettings VerifyOptions::settings() const {
  OperatorSettings s = ops;
  s.degree_cap = degree;
  return s;
}

// ---- results ----------------------------------------------------------------

void ErrorAccumulator::add(double lhs, double rhs) {
  add_residual(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
}

void ErrorAccumulator::add_residual(double residual, double size) {
  ++samples_;
  const double d = std::abs(residual);
  if (std::isnan(d) || d > max_abs_) max_abs_ = d;
  if (std::isnan(size) || size > scale_) scale_ = size;
}

void ErrorAccumulator::merge(const ErrorAccumulator& o) {
  samples_ += o.samples_;
  if (std::isnan(o.max_abs_) || o.max_abs_ > max_abs_) max_abs_ = o.max_abs_;
  if (std::isnan(o.scale_) || o.scale_ > scale_) scale_ = o.scale_;
}

CheckResult finish_check(std::string check, std::string scenario, const ErrorAccumulator& acc, double tol,
                         bool expect_above) {
  CheckResult r;
  r.check = std::move(check);
  r.scenario = std::move(scenario);
  r.samples = acc.samples();
  r.max_abs = acc.max_abs();
  r.scale = acc.scale();
  r.rel = r.max_abs / r.scale;
  r.tol = tol;
  r.expect_above = expect_above;
  r.pass = expect_above ? r.rel > tol : r.rel < tol;
  return r;
}

// ---- randomness -------------------------------------------------------------

std::uint64_t stable_hash(std::string_view s) {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Sampler::Sampler(std::uint64_t seed, std::string_view scenario, std::string_view check) {
  const std::uint64_t a = stable_hash(scenario), b = stable_hash(check);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32)};
  std::uint32_t w[2];
  seq.generate(w, w + 2);
  seed_ = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
  rng_.seed(seed_);
}

std::vector<double> Sampler::point(const Chart& c) {
  std::vector<double> x;
  for (const Axis& a : c.axes()) {
    double lo = a.lo, hi = a.hi;
    if (a.kind == Axis::Kind::Polar) {
      lo += 0.3;
      hi -= 0.3;
    } else if (a.kind == Axis::Kind::Interval) {
      const double w = hi - lo;
      lo += 0.25 * w;
      hi -= 0.25 * w;
    }
    x.push_back(std::uniform_real_distribution<double>(lo, hi)(rng_));
  }
  return x;
}

Points Sampler::points(const Chart& c, int k) {
  Points p;
  for (int i = 0; i < k; ++i) p.push_back(point(c));
  return p;
}

Expr Sampler::field(const std::vector<Expr>& features, int terms, double amplitude, bool constant) {
  std::vector<std::size_t> idx(features.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(terms, 0)), idx.size());
  // partial Fisher–Yates keeps the draw count independent of the pool size
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, idx.size() - 1)(rng_);
    std::swap(idx[i], idx[j]);
  }
  std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  std::uniform_real_distribution<double> coef(-amplitude, amplitude);
  std::vector<Expr> t;
  std::vector<double> c;
  if (constant) {
    t.push_back(Expr::number(1.0));
    c.push_back(coef(rng_));
  }
  for (std::size_t i = 0; i < k; ++i) {
    t.push_back(features[idx[i]]);
    c.push_back(coef(rng_));
  }
  return linear_combination(t, c);
}

// ---- explicit checks --------------------------------------------------------

ErrorAccumulator covariance_errors(Op op, const Scenario& sc, const Expr& phi, const Expr& f, const Points& pts,
                                   const OperatorSettings& s) {
  const Phi p = make_phi(sc, phi);
  const ScalarField ff = bound_field(sc.chart(), f);
  const OperatorSpec spec = operator_spec(op, sc.n());
  const ScalarField lhs = quantity(op, sc, &p.own, ff, s);
  const ScalarField rhs = quantity(op, sc, nullptr, exp_scaled(p.on_manifold, spec.b) * ff, s);
  ErrorAccumulator acc;
  for (const auto& x : pts)
    acc.add(std::exp(spec.a * value_at(p.on_manifold, x)) * value_at(lhs, x), value_at(rhs, x));
  return acc;
}

ErrorAccumulator q_law_errors(Op q, const Scenario& sc, const Expr& phi, const Points& pts,
                              const OperatorSettings& s) {
  const Phi p = make_phi(sc, phi);
  const QSpec qs = q_spec(q);
  const ScalarField none;
  const ScalarField qhat = quantity(q, sc, &p.own, none, s);
  const ScalarField q0 = quantity(q, sc, nullptr, none, s);
  const ScalarField pphi = quantity(qs.p, sc, nullptr, p.on_manifold, s);
  ErrorAccumulator acc;
  for (const auto& x : pts)
    acc.add(std::exp(qs.weight * value_at(p.on_manifold, x)) * value_at(qhat, x),
            value_at(q0, x) + qs.sign * value_at(pphi, x));
  return acc;
}

ErrorAccumulator weight_errors(Op op, double w, const Scenario& sc, const Expr& phi, const Points& pts,
                               const OperatorSettings& s) {
  const Phi p = make_phi(sc, phi);
  const ScalarField none;
  const ScalarField hat = quantity(op, sc, &p.own, none, s);
  const ScalarField base = quantity(op, sc, nullptr, none, s);
  ErrorAccumulator acc;
  for (const auto& x : pts) acc.add(std::exp(w * value_at(p.on_manifold, x)) * value_at(hat, x), value_at(base, x));
  return acc;
}

IntegralPair global_invariant(const Scenario& sc, const Expr& phi, const NodeCounts& nodes, int threads) {
  if (!sc.embedded() || sc.n() != 4) throw ConfigError("global invariant needs a 4-dimensional hypersurface");
  if (!sc.closed()) throw ConfigError("global invariant needs a closed surface chart");
  const Phi p = make_phi(sc, phi);
  const Quadrature q(sc.chart(), nodes);
  auto total = [](const Embedding& e) {
    return [&e](std::span<const double> x) {
      ExtrinsicContext c(e, x, op_info(Op::Q4Total).margin);
      const auto i = q4_total_integrand(c);
      const double v = i[0].value() + i[1].value() + i[2].value();
      return std::vector<double>{v, std::abs(v)};
    };
  };
  const Embedding hat = sc.embedding.rescaled(p.own);
  const auto a = integrate_many(q, induced_metric(sc.embedding), total(sc.embedding), threads);
  const auto b = integrate_many(q, induced_metric(hat), total(hat), threads);
  return {a[0], b[0], std::max(1.0, a[1]), q.size()};
}

IntegralPair gauss_bonnet(const Scenario& sc, const NodeCounts& nodes, double c_rho, int threads) {
  if (sc.n() != 4) throw ConfigError("Gauss-Bonnet check needs dimension 4");
  if (!sc.euler) throw ConfigError("scenario " + sc.name + " has no known Euler characteristic");
  if (!sc.closed()) throw ConfigError("Gauss-Bonnet check needs a closed chart");
  const Quadrature q(sc.chart(), nodes);
  const Metric g = volume_metric(sc);
  const auto r = integrate_many(
      q, g,
      [&](std::span<const double> x) {
        IntrinsicContext c(g, x, 4);
        const double Q = q4(c.geo(), c.curv(), c_rho).value();
        const double W = c.geo().norm2(c.curv().weyl()).value();
        return std::vector<double>{Q + 0.25 * W, std::abs(Q) + 0.25 * std::abs(W)};
      },
      threads);
  const double rhs = 8.0 * kPi * kPi * *sc.euler;
  return {r[0], rhs, std::max({1.0, std::abs(rhs), r[1]}), q.size()};
}

// ---- planning ---------------------------------------------------------------

namespace {

using ScenarioPtr = std::shared_ptr<const Scenario>;

CheckResult from_pair(const std::string& check, const Scenario& sc, const IntegralPair& p, double tol,
                      std::uint64_t seed, std::string detail) {
  ErrorAccumulator acc;
  acc.add_residual(p.lhs - p.rhs, p.scale);
  CheckResult r = finish_check(check, sc.name, acc, tol);
  r.samples = p.nodes;
  r.seed = seed;
  r.detail = std::move(detail);
  return r;
}

std::string show(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class Planner {
 public:
  Planner(ScenarioPtr sc, const std::vector<Suite>& suites, const VerifyOptions& opt)
      : sc_(std::move(sc)), suites_(suites), opt_(opt) {}

  std::vector<PlannedCheck> plan() {
    if (sc_->embedded())
      plan_extrinsic();
    else
      plan_intrinsic();
    return std::move(out_);
  }

 private:
  ScenarioPtr sc_;
  std::vector<Suite> suites_;
  VerifyOptions opt_;
  std::vector<PlannedCheck> out_;

  bool want(Suite s) const { return has(suites_, s); }

  void add(Suite suite, std::vector<std::string> names, std::function<std::vector<CheckResult>()> run) {
    out_.push_back({sc_->name, suite, std::move(names), std::move(run)});
  }

  // Random pairs, then a φ = 0 control on a few points.
  void covariance(Suite suite, Op op, const std::string& name, const OperatorSettings& s, double tol,
                  bool expect_above = false, bool control = true) {
    std::vector<std::string> names{name};
    if (control) names.push_back(name + "_control");
    add(suite, names, [sc = sc_, op, name, s, tol, expect_above, control, opt = opt_] {
      Sampler rng(opt.seed, sc->name, name);
      ErrorAccumulator acc;
      for (int k = 0; k < opt.pairs; ++k) {
        const Expr phi = rng.field(phi_features(*sc), 4, 0.2, false);
        const Expr f = rng.field(sc->features, 4, 1.0, true);
        acc.merge(covariance_errors(op, *sc, phi, f, rng.points(sc->chart(), opt.points), s));
      }
      std::vector<CheckResult> r{finish_check(name, sc->name, acc, tol, expect_above)};
      r[0].seed = rng.seed();
      r[0].detail = std::to_string(opt.pairs) + " random (phi, f) pairs";
      if (control) {
        const Expr f = rng.field(sc->features, 4, 1.0, true);
        auto c = finish_check(name + "_control", sc->name,
                              covariance_errors(op, *sc, Expr::number(0.0), f, rng.points(sc->chart(), 3), s),
                              opt.tol.control);
        c.seed = rng.seed();
        c.detail = "phi = 0";
        r.push_back(c);
      }
      return r;
    });
  }

  void q_law(Suite suite, Op q, const std::string& name, const OperatorSettings& s, double tol,
             bool expect_above = false, bool control = true) {
    std::vector<std::string> names{name};
    if (control) names.push_back(name + "_control");
    add(suite, names, [sc = sc_, q, name, s, tol, expect_above, control, opt = opt_] {
      Sampler rng(opt.seed, sc->name, name);
      ErrorAccumulator acc;
      for (int k = 0; k < opt.pairs; ++k) {
        const Expr phi = rng.field(phi_features(*sc), 4, 0.2, false);
        acc.merge(q_law_errors(q, *sc, phi, rng.points(sc->chart(), opt.points), s));
      }
      std::vector<CheckResult> r{finish_check(name, sc->name, acc, tol, expect_above)};
      r[0].seed = rng.seed();
      r[0].detail = std::to_string(opt.pairs) + " random phi";
      if (control) {
        auto c = finish_check(name + "_control", sc->name,
                              q_law_errors(q, *sc, Expr::number(0.0), rng.points(sc->chart(), 3), s),
                              opt.tol.control);
        c.seed = rng.seed();
        c.detail = "phi = 0";
        r.push_back(c);
      }
      return r;
    });
  }

  // e^{wφ} X(ĝ) = X(g) for each listed scalar.
  void weights(Suite suite, std::vector<Op> ops, double w, const std::string& name, const OperatorSettings& s,
               double tol, bool expect_above = false, bool control = true) {
    std::vector<std::string> names{name};
    if (control) names.push_back(name + "_control");
    add(suite, names, [sc = sc_, ops, w, name, s, tol, expect_above, control, opt = opt_] {
      Sampler rng(opt.seed, sc->name, name);
      ErrorAccumulator acc, ctl;
      for (int k = 0; k < opt.pairs; ++k) {
        const Expr phi = rng.field(phi_features(*sc), 4, 0.2, false);
        const Points pts = rng.points(sc->chart(), opt.points);
        for (Op op : ops) acc.merge(weight_errors(op, w, *sc, phi, pts, s));
      }
      std::vector<CheckResult> r{finish_check(name, sc->name, acc, tol, expect_above)};
      r[0].seed = rng.seed();
      r[0].detail = std::to_string(opt.pairs) + " random phi";
      if (control) {
        const Points pts = rng.points(sc->chart(), 3);
        for (Op op : ops) ctl.merge(weight_errors(op, w, *sc, Expr::number(0.0), pts, s));
        auto c = finish_check(name + "_control", sc->name, ctl, opt.tol.control);
        c.seed = rng.seed();
        c.detail = "phi = 0";
        r.push_back(c);
      }
      return r;
    });
  }

  // Pointwise residuals without any conformal change.
  void residual(Suite suite, const std::string& name, double tol, const Chart* chart,
                std::function<void(ErrorAccumulator&, std::span<const double>)> body, std::string detail,
                bool expect_above = false) {
    add(suite, {name}, [sc = sc_, name, tol, chart, body, detail, expect_above, opt = opt_] {
      Sampler rng(opt.seed, sc->name, name);
      ErrorAccumulator acc;
      const Chart& c = chart ? *chart : sc->chart();
      for (const auto& x : rng.points(c, opt.points)) body(acc, x);
      CheckResult r = finish_check(name, sc->name, acc, tol, expect_above);
      r.seed = rng.seed();
      r.detail = detail;
      return std::vector<CheckResult>{r};
    });
  }

  void curvature_identities(const Metric& g, const std::string& prefix, const Chart* chart) {
    const int m = g.dim();
    residual(Suite::Structural, prefix + "bianchi", opt_.tol.structural, chart,
             [g, m](ErrorAccumulator& acc, std::span<const double> x) {
               IntrinsicContext c(g, x, 2);
               const Tensor& R = c.curv().riemann();
               double worst = 0.0;
               for (int i = 0; i < m; ++i)
                 for (int j = 0; j < m; ++j)
                   for (int k = 0; k < m; ++k)
                     for (int l = 0; l < m; ++l)
                       worst = std::max(worst, std::abs(R(i, j, k, l).value() + R(i, k, l, j).value() +
                                                        R(i, l, j, k).value()));
               acc.add_residual(worst, max_abs_of(R));
             },
             "R_ijkl + R_iklj + R_iljk");
    if (m < 3) return;
    residual(Suite::Structural, prefix + "weyl_trace", opt_.tol.structural, chart,
             [g, m](ErrorAccumulator& acc, std::span<const double> x) {
               IntrinsicContext c(g, x, 2);
               const Tensor& W = c.curv().weyl();
               const Tensor& gi = c.geo().inverse();
               double worst = 0.0;
               for (int j = 0; j < m; ++j)
                 for (int l = 0; l < m; ++l) {
                   double s = 0.0;
                   for (int i = 0; i < m; ++i)
                     for (int k = 0; k < m; ++k) s += gi(i, k).value() * W(i, j, k, l).value();
                   worst = std::max(worst, std::abs(s));
                 }
               acc.add_residual(worst, max_abs_of(c.curv().riemann()));
             },
             "g^ik W_ijkl");
    if (m == 3)
      residual(Suite::Structural, prefix + "weyl_vanishes", opt_.tol.structural, chart,
               [g](ErrorAccumulator& acc, std::span<const double> x) {
                 IntrinsicContext c(g, x, 2);
                 acc.add_residual(max_abs_of(c.curv().weyl()), max_abs_of(c.curv().riemann()));
               },
               "W = 0 in dimension 3");
  }

  // Self-adjointness test functions for a closed chart.
  static std::pair<Expr, Expr> test_pair(Sampler& rng, const Scenario& sc) {
    Expr f = rng.field(sc.features, 4, 1.0, true);
    Expr g = rng.field(sc.features, 4, 1.0, true);
    return {f, g};
  }

  void plan_intrinsic() {
    const Scenario& sc = *sc_;
    const int n = sc.n();
    const OperatorSettings s = opt_.settings();
    const double pw = opt_.tol.pointwise;
    OperatorSettings rejected = s;
    rejected.c_rho = s.c_rho == 2.0 ? 1.0 : 2.0;

    if (want(Suite::Intrinsic)) {
      covariance(Suite::Intrinsic, Op::P2, "cov_p2", s, pw);
      if (n >= 3) covariance(Suite::Intrinsic, Op::P4, "cov_p4", s, pw);
      if (n == 2) q_law(Suite::Intrinsic, Op::Q2, "qlaw_q2", s, pw);
      if (n == 4) q_law(Suite::Intrinsic, Op::Q4, "qlaw_q4", s, pw);
    }
    if (want(Suite::Structural)) {
      curvature_identities(sc.metric, "", nullptr);
      if (n == 4)
        residual(Suite::Structural, "p4_one", opt_.tol.reduction, nullptr,
                 [sc = sc_, s](ErrorAccumulator& acc, std::span<const double> x) {
                   const auto one = ScalarField::constant(4, 1.0);
                   acc.add(value_at(intrinsic_field(Op::P4, sc->metric, one, s), x), 0.0);
                 },
                 "P4(1) = 0 in dimension 4");
    }
    if (want(Suite::Integral) && sc.closed()) plan_intrinsic_integrals(s);
    if (want(Suite::Audit)) {
      if (n == 5) covariance(Suite::Audit, Op::P4, "audit_c_rho_cov_p4", rejected, opt_.tol.audit, true, false);
      if (n == 4) q_law(Suite::Audit, Op::Q4, "audit_c_rho_qlaw_q4", rejected, opt_.tol.audit, true, false);
      // ρ ≡ 0 on a flat manifold leaves nothing to discriminate
      if (n == 4 && sc.euler && sc.closed() && !sc.flat)
        add(Suite::Audit, {"audit_c_rho_gauss_bonnet"}, [sc = sc_, opt = opt_, c = rejected.c_rho] {
          const auto p = gauss_bonnet(*sc, opt.nodes, c, 1);
          return std::vector<CheckResult>{[&] {
            ErrorAccumulator acc;
            acc.add_residual(p.lhs - p.rhs, p.scale);
            CheckResult r = finish_check("audit_c_rho_gauss_bonnet", sc->name, acc, opt.tol.audit, true);
            r.samples = p.nodes;
            r.seed = opt.seed;
            r.detail = "c_rho = " + show(c) + ": integral " + show(p.lhs) + " vs " + show(p.rhs);
            return r;
          }()};
        });
    }
  }

  void plan_intrinsic_integrals(const OperatorSettings& s) {
    const int n = sc_->n();
    std::vector<std::string> names{"laplacian_integral"};
    const bool gb = n == 4 && sc_->euler.has_value();
    if (gb) names.push_back("gauss_bonnet");
    if (n == 4) names.push_back("self_adjoint_p4");
    add(Suite::Integral, names, [sc = sc_, s, gb, opt = opt_] {
      const int n = sc->n();
      Sampler rng(opt.seed, sc->name, "integrals");
      const auto [fe, ge] = test_pair(rng, *sc);
      const ScalarField f = bound_field(sc->chart(), fe), g = bound_field(sc->chart(), ge);
      const Quadrature q(sc->chart(), opt.nodes);
      const auto v = integrate_many(q, sc->metric, [&](std::span<const double> x) {
        const int deg = n == 4 ? 4 : 2;
        IntrinsicContext c(sc->metric, x, deg);
        const Jet fj = f(x, deg), gj = g(x, deg);
        const double lap = c.geo().laplacian(fj).value();
        std::vector<double> out{lap, std::abs(lap)};
        if (n == 4) {
          const double Q = q4(c.geo(), c.curv(), s.c_rho).value();
          const double W = c.geo().norm2(c.curv().weyl()).value();
          const double a = fj.value() * p4(c.geo(), c.curv(), gj, s.c_rho).value();
          const double b = gj.value() * p4(c.geo(), c.curv(), fj, s.c_rho).value();
          out.insert(out.end(), {Q + 0.25 * W, std::abs(Q) + 0.25 * std::abs(W), a, b, std::abs(a), std::abs(b)});
        }
        return out;
      }, 1);
      std::vector<CheckResult> r;
      const std::string nodes = std::to_string(q.size()) + " nodes";
      r.push_back(from_pair("laplacian_integral", *sc, {v[0], 0.0, std::max(1.0, v[1]), q.size()},
                            opt.tol.divergence, rng.seed(), "integral of the Laplacian of a random f, " + nodes));
      if (gb) {
        const double rhs = 8.0 * kPi * kPi * *sc->euler;
        r.push_back(from_pair("gauss_bonnet", *sc, {v[2], rhs, std::max({1.0, std::abs(rhs), v[3]}), q.size()},
                              opt.tol.gauss_bonnet, rng.seed(),
                              "int Q4 + |W|^2/4 = " + show(v[2]) + ", 8 pi^2 chi = " + show(rhs)));
      }
      if (n == 4)
        r.push_back(from_pair("self_adjoint_p4", *sc, {v[4], v[5], std::max({1.0, v[6], v[7]}), q.size()},
                              opt.tol.self_adjoint, rng.seed(), "int f P4 g against int g P4 f, " + nodes));
      return r;
    });
  }

  void plan_extrinsic() {
    const Scenario& sc = *sc_;
    const int n = sc.n();
    const OperatorSettings s = opt_.settings();
    const double pw = opt_.tol.pointwise;
    const Chart* amb = &sc_->embedding.ambient.chart();

    if (want(Suite::Extrinsic)) {
      if (n >= 2 && n <= 5) covariance(Suite::Extrinsic, Op::ExtP2, "cov_ext_p2", s, pw);
      if (n >= 3 && n <= 5) covariance(Suite::Extrinsic, Op::ExtP3, "cov_ext_p3", s, pw);
      if (n == 4) covariance(Suite::Extrinsic, Op::ExtP4Critical, "cov_ext_p4_critical", s, pw);
      if (sc.umbilic && n >= 4) covariance(Suite::Extrinsic, Op::ExtP4Umbilic, "cov_ext_p4_umbilic", s, pw);
      if (n == 2) q_law(Suite::Extrinsic, Op::ExtQ2, "qlaw_ext_q2", s, pw);
      if (n == 3) q_law(Suite::Extrinsic, Op::ExtQ3, "qlaw_ext_q3", s, pw);
      if (n == 4 && sc.umbilic) q_law(Suite::Extrinsic, Op::ExtQ4Umbilic, "qlaw_ext_q4_umbilic", s, pw);
      if (n == 4) weights(Suite::Extrinsic, {Op::CInvariant}, 4.0, "weight_c_invariant", s, pw);
      if (n == 4 && sc.umbilic) plan_umbilic_reduction(s);
      if (sc.umbilic && n >= 3)
        residual(Suite::Extrinsic, "lemma_simple", opt_.tol.weight, nullptr,
                 [sc = sc_, s](ErrorAccumulator& acc, std::span<const double> x) {
                   ExtrinsicContext c(sc->embedding, x, op_info(Op::LemmaSimple).margin);
                   acc.add_residual(lemma_simple_residual(c, s).value(), 1.0);
                 },
                 "umbilic lemma residual");
    }
    if (want(Suite::Structural)) {
      residual(Suite::Structural, "trace_L", opt_.tol.structural, nullptr,
               [sc = sc_](ErrorAccumulator& acc, std::span<const double> x) {
                 ExtrinsicContext c(sc->embedding, x, 2);
                 acc.add(c.surface().trace(c.L()).value(), c.n() * c.H().value());
               },
               "tr L = n H");
      residual(Suite::Structural, "trace_L0", opt_.tol.structural, nullptr,
               [sc = sc_](ErrorAccumulator& acc, std::span<const double> x) {
                 ExtrinsicContext c(sc->embedding, x, 2);
                 acc.add_residual(c.surface().trace(c.L0()).value(), max_abs_of(c.L()));
               },
               "tr L0 = 0");
      residual(Suite::Structural, "trace_weyl_slice", opt_.tol.structural, nullptr,
               [sc = sc_](ErrorAccumulator& acc, std::span<const double> x) {
                 ExtrinsicContext c(sc->embedding, x, 3);
                 acc.add_residual(c.surface().trace(c.weyl_slice()).value(), max_abs_of(c.G_bar()));
               },
               "tr of the normal Weyl slice = 0");
      curvature_identities(sc.embedding.ambient, "ambient_", amb);
      add(Suite::Structural, {"weight_L0", "weight_L0_control"}, [sc = sc_, opt = opt_] {
        Sampler rng(opt.seed, sc->name, "weight_L0");
        auto run = [&](const Expr& phi, int k) {
          const Phi p = make_phi(*sc, phi);
          const Embedding hat = sc->embedding.rescaled(p.own);
          ErrorAccumulator acc;
          for (const auto& x : rng.points(sc->chart(), k)) {
            ExtrinsicContext a(sc->embedding, x, 2), b(hat, x, 2);
            const double e = std::exp(value_at(p.on_manifold, x));
            double worst = 0.0;
            for (std::size_t i = 0; i < a.L0().size(); ++i)
              worst = std::max(worst, std::abs(b.L0()[i].value() - e * a.L0()[i].value()));
            acc.add_residual(worst, std::max(max_abs_of(b.L0()), e * max_abs_of(a.L0())));
          }
          return acc;
        };
        ErrorAccumulator acc;
        for (int k = 0; k < opt.pairs; ++k) acc.merge(run(rng.field(phi_features(*sc), 4, 0.2, false), opt.points));
        CheckResult r = finish_check("weight_L0", sc->name, acc, opt.tol.weight);
        r.seed = rng.seed();
        r.detail = "L0 of the rescaled ambient is e^phi L0";
        CheckResult c = finish_check("weight_L0_control", sc->name, run(Expr::number(0.0), 3), opt.tol.control);
        c.seed = rng.seed();
        c.detail = "phi = 0";
        return std::vector<CheckResult>{r, c};
      });
      if (n == 4) {
        weights(Suite::Structural,
                {Op::L0Norm4, Op::TrL0Fourth, Op::L0SqWeyl, Op::WeylSliceNorm2},
                4.0, "weight_quartic", s, opt_.tol.weight);
        residual(Suite::Structural, "ext_p4_critical_one", opt_.tol.reduction, nullptr,
                 [sc = sc_, s](ErrorAccumulator& acc, std::span<const double> x) {
                   const auto one = ScalarField::constant(4, 1.0);
                   acc.add(value_at(extrinsic_field(Op::ExtP4Critical, sc->embedding, one, s), x), 0.0);
                 },
                 "critical P4(1) = 0");
        if (sc.umbilic)
          residual(Suite::Structural, "ext_p4_umbilic_one", opt_.tol.reduction, nullptr,
                   [sc = sc_, s](ErrorAccumulator& acc, std::span<const double> x) {
                     const auto one = ScalarField::constant(4, 1.0);
                     acc.add(value_at(extrinsic_field(Op::ExtP4Umbilic, sc->embedding, one, s), x), 0.0);
                   },
                   "umbilic P4(1) = 0 in n = 4");
      }
    }
    if (want(Suite::Integral) && sc.closed() && n == 4) plan_extrinsic_integrals(s);
    // 𝒞 differs between the two signs only through Δ|L̊|²
    if (want(Suite::Audit) && n == 4 && !sc.umbilic) {
      OperatorSettings flipped = s;
      flipped.c_lap = -s.c_lap;
      weights(Suite::Audit, {Op::CInvariant}, 4.0, "audit_c_lap_c_invariant", flipped, opt_.tol.audit, true, false);
    }
  }

  // Umbilic P4, Q4 against the intrinsic ones of the induced metric. Equal
  // when the ambient is conformally flat; otherwise the normal Weyl slice
  // must leave a visible correction.
  void plan_umbilic_reduction(const OperatorSettings& s) {
    const bool flat = sc_->conformally_flat;
    for (const Op op : {Op::ExtP4Umbilic, Op::ExtQ4Umbilic}) {
      const bool is_p = op == Op::ExtP4Umbilic;
      const std::string name = std::string(flat ? "umbilic_reduction_" : "weyl_correction_") + (is_p ? "p4" : "q4");
      const double tol = flat ? opt_.tol.reduction : opt_.tol.nonzero;
      add(Suite::Extrinsic, {name}, [sc = sc_, op, is_p, name, tol, flat, s, opt = opt_] {
        Sampler rng(opt.seed, sc->name, name);
        const Metric h = induced_metric(sc->embedding);
        ErrorAccumulator acc;
        for (int k = 0; k < opt.pairs; ++k) {
          const ScalarField f = is_p ? bound_field(sc->chart(), rng.field(sc->features, 4, 1.0, true)) : ScalarField();
          const ScalarField ext = extrinsic_field(op, sc->embedding, f, s);
          const ScalarField in = intrinsic_field(is_p ? Op::P4 : Op::Q4, h, f, s);
          for (const auto& x : rng.points(sc->chart(), opt.points)) acc.add(value_at(ext, x), value_at(in, x));
        }
        CheckResult r = finish_check(name, sc->name, acc, tol, !flat);
        r.seed = rng.seed();
        r.detail = flat ? "extrinsic equals intrinsic of the induced metric"
                        : "extrinsic minus intrinsic of the induced metric is nonzero";
        return std::vector<CheckResult>{r};
      });
    }
  }

  void plan_extrinsic_integrals(const OperatorSettings& s) {
    const bool umb = sc_->umbilic;
    const bool gb = sc_->euler.has_value();
    std::vector<std::string> names{"global_invariant",
                                   "global_invariant_control",
                                   "divergence_divdiv_weyl_slice",
                                   "divergence_divdiv_l0sq",
                                   "divergence_lap_l0_norm2",
                                   "self_adjoint_ext_p4_critical"};
    if (umb) names.push_back("self_adjoint_ext_p4_umbilic");
    if (gb) names.push_back("gauss_bonnet_induced");
    add(Suite::Integral, names, [sc = sc_, s, umb, gb, opt = opt_] {
      Sampler rng(opt.seed, sc->name, "integrals");
      const Expr phi = rng.field(sc->ambient_features, 4, 0.2, false);
      const auto [fe, ge] = test_pair(rng, *sc);
      const ScalarField f = bound_field(sc->chart(), fe), g = bound_field(sc->chart(), ge);
      const Quadrature q(sc->chart(), opt.nodes);
      const Metric h = induced_metric(sc->embedding);
      const int deg = op_info(Op::DivDivWeylSlice).margin;
      const auto v = integrate_many(q, h, [&](std::span<const double> x) {
        ExtrinsicContext c(sc->embedding, x, deg);
        const auto& geo = c.surface();
        const auto I = q4_total_integrand(c);
        const double tot = I[0].value() + I[1].value() + I[2].value();
        const double ddw = div_div(geo, c.weyl_slice()).value();
        const double ddl = div_div(geo, c.L0_squared()).value();
        const double lap = geo.laplacian(geo.norm2(c.L0())).value();
        const Jet fj = f(x, deg), gj = g(x, deg);
        const double a = fj.value() * ext_p4_critical(c, gj).value();
        const double b = gj.value() * ext_p4_critical(c, fj).value();
        std::vector<double> out{tot, std::abs(tot), ddw, std::abs(ddw), ddl, std::abs(ddl), lap, std::abs(lap),
                                a, b, std::abs(a), std::abs(b)};
        if (umb) {
          const double ua = fj.value() * ext_p4_umbilic(c, gj, s).value();
          const double ub = gj.value() * ext_p4_umbilic(c, fj, s).value();
          out.insert(out.end(), {ua, ub, std::abs(ua), std::abs(ub)});
        }
        if (gb) {
          const double Q = q4(geo, c.surface_curvature(), s.c_rho).value();
          const double W = geo.norm2(c.surface_curvature().weyl()).value();
          out.insert(out.end(), {Q + 0.25 * W, std::abs(Q) + 0.25 * std::abs(W)});
        }
        return out;
      }, 1);
      const Embedding hat = sc->embedding.rescaled(bound_field(sc->embedding.ambient.chart(), phi));
      const auto w = integrate_many(q, induced_metric(hat), [&](std::span<const double> x) {
        ExtrinsicContext c(hat, x, op_info(Op::Q4Total).margin);
        const auto I = q4_total_integrand(c);
        return std::vector<double>{I[0].value() + I[1].value() + I[2].value()};
      }, 1);
      const std::size_t N = q.size();
      const std::string nodes = std::to_string(N) + " nodes";
      std::vector<CheckResult> r;
      const double gtol = sc->umbilic ? opt.tol.global_umbilic : opt.tol.integral;
      r.push_back(from_pair("global_invariant", *sc, {v[0], w[0], std::max(1.0, v[1]), N}, gtol, rng.seed(),
                            "int Q4 = " + show(v[0]) + " before, " + show(w[0]) + " after rescaling"));
      // φ = 0 reproduces the metric exactly, so a coarse grid suffices
      const NodeCounts coarse{2, 2};
      const auto c0 = global_invariant(*sc, Expr::number(0.0), coarse, 1);
      r.push_back(from_pair("global_invariant_control", *sc, c0, opt.tol.control, rng.seed(), "phi = 0"));
      const char* div_names[] = {"divergence_divdiv_weyl_slice", "divergence_divdiv_l0sq",
                                 "divergence_lap_l0_norm2"};
      for (int k = 0; k < 3; ++k)
        r.push_back(from_pair(div_names[k], *sc, {v[2 + 2 * k], 0.0, std::max(1.0, v[3 + 2 * k]), N},
                              opt.tol.divergence, rng.seed(), "integral of a divergence, " + nodes));
      r.push_back(from_pair("self_adjoint_ext_p4_critical", *sc, {v[8], v[9], std::max({1.0, v[10], v[11]}), N},
                            opt.tol.self_adjoint, rng.seed(), "int f P g against int g P f, " + nodes));
      std::size_t k = 12;
      if (umb) {
        r.push_back(from_pair("self_adjoint_ext_p4_umbilic", *sc,
                              {v[k], v[k + 1], std::max({1.0, v[k + 2], v[k + 3]}), N}, opt.tol.self_adjoint,
                              rng.seed(), "int f P g against int g P f, " + nodes));
        k += 4;
      }
      if (gb) {
        const double rhs = 8.0 * kPi * kPi * *sc->euler;
        r.push_back(from_pair("gauss_bonnet_induced", *sc, {v[k], rhs, std::max({1.0, std::abs(rhs), v[k + 1]}), N},
                              opt.tol.gauss_bonnet, rng.seed(),
                              "int Q4 + |W|^2/4 = " + show(v[k]) + ", 8 pi^2 chi = " + show(rhs)));
      }
      return r;
    });
  }
};

}  // namespace

std::vector<PlannedCheck> plan_checks(const Scenario& sc, const std::vector<Suite>& suites,
                                      const VerifyOptions& opt) {
  return Planner(std::make_shared<const Scenario>(sc), suites, opt).plan();
}

std::vector<ScenarioResults> run_checks(const std::vector<Scenario>& scenarios, const std::vector<Suite>& suites,
                                        const VerifyOptions& opt, const ResultCallback& progress) {
  std::vector<PlannedCheck> tasks;
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < scenarios.size(); ++i)
    for (auto& t : plan_checks(scenarios[i], suites, opt)) {
      tasks.push_back(std::move(t));
      owner.push_back(i);
    }
  std::vector<std::vector<CheckResult>> done(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex report_lock;
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < tasks.size();) {
      try {
        done[k] = tasks[k].run();
        if (progress) {
          std::lock_guard lock(report_lock);
          for (const auto& r : done[k]) progress(r);
        }
      } catch (...) {
        errors[k] = std::current_exception();
        next = tasks.size();  // stop handing out work
      }
    }
  };
  int threads = opt.threads > 0 ? opt.threads : default_threads();
  threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), std::max<std::size_t>(tasks.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<ScenarioResults> out;
  for (const auto& sc : scenarios) out.push_back({sc.name, sc.description, {}});
  for (std::size_t k = 0; k < tasks.size(); ++k)
    for (auto& r : done[k]) out[owner[k]].checks.push_back(std::move(r));
  return out;
}

bool all_pass(const std::vector<ScenarioResults>& r) {
  for (const auto& s : r)
    for (const auto& c : s.checks)
      if (!c.pass) return false;
  return true;
}

}  // namespace exq
