#include "exq/operators.hpp"

#include <cmath>
#include <sstream>

namespace exq {

namespace {

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(10);
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

void require_dim(const OpInfo& info, int n) {
  if (n < info.min_n || n > info.max_n) {
    std::string range = info.min_n == info.max_n ? "n = " + std::to_string(info.min_n)
                                                 : "n in " + std::to_string(info.min_n) + ".." +
                                                       std::to_string(info.max_n);
    throw GeometryError(std::string(info.name) + " requires " + range + ", got n = " + std::to_string(n));
  }
}

int needed_degree(const OpInfo& info, int out_degree, const OperatorSettings& s) {
  const int need = out_degree + info.margin;
  if (need > s.degree_cap)
    throw DegreeError(std::string(info.name) + " at output degree " + std::to_string(out_degree) +
                      " needs jet degree " + std::to_string(need) + " but the cap is " +
                      std::to_string(s.degree_cap));
  return need;
}

Jet finish(const OpInfo& info, const Jet& v, int out_degree) {
  if (v.degree() < out_degree)
    throw DegreeError(std::string(info.name) + " produced degree " + std::to_string(v.degree()) +
                      " < requested " + std::to_string(out_degree));
  return v.truncated(out_degree);
}

}  // namespace

// ---- intrinsic ----------------------------------------------------------------

Jet div_div(const LocalGeometry& g, const Tensor& t) { return g.divergence_scalar(g.divergence(t)); }

Jet p2(const LocalGeometry& g, const Curvature& c, const Jet& f) {
  const double n = g.dim();
  return g.laplacian(f) - (n / 2.0 - 1.0) * c.J() * f;
}

Jet q2(const Curvature& c) { return c.J(); }

Jet q4(const LocalGeometry& g, const Curvature& c, double c_rho) {
  const double n = g.dim();
  const Jet& J = c.J();
  return (n / 2.0) * J * J - c_rho * g.norm2(c.schouten()) - g.laplacian(J);
}

Jet p4(const LocalGeometry& g, const Curvature& c, const Jet& f, double c_rho) {
  const double n = g.dim();
  Tensor T = g.metric() * ((n - 2.0) * c.J()) - 4.0 * c.schouten();
  Jet out = g.laplacian(g.laplacian(f)) - g.div_apply(T, f);
  if (n != 4.0) out += (n / 2.0 - 2.0) * q4(g, c, c_rho) * f;
  return out;
}

// ---- extrinsic ----------------------------------------------------------------

void require_umbilic(const ExtrinsicContext& e, double tol) {
  const double m = e.L0().max_abs_value();
  if (m > tol) {
    std::ostringstream os;
    os.precision(6);
    os << "embedding is not umbilic at " << format_point(e.point()) << ": max|L0| = " << m
       << " exceeds " << tol;
    throw NonUmbilicError(os.str(), m);
  }
}

Jet ext_p2(const ExtrinsicContext& e, const Jet& f) {
  const double n = e.n();
  const auto& g = e.surface();
  return p2(g, e.surface_curvature(), f) + ((n - 2.0) / (4.0 * (n - 1.0))) * g.norm2(e.L0()) * f;
}

Jet ext_q2(const ExtrinsicContext& e) {
  const double n = e.n();
  return e.surface_curvature().J() + (1.0 / (2.0 * (n - 1.0))) * e.surface().norm2(e.L0());
}

Jet ext_q3(const ExtrinsicContext& e) {
  const double n = e.n();
  const auto& g = e.surface();
  const Tensor& L0 = e.L0();
  Jet s = div_div(g, L0) + (n - 1.0) * g.inner(L0, e.fialkow());
  if (n != 3.0) s -= (n - 3.0) * g.inner(L0, e.surface_curvature().schouten());
  return (4.0 / (n - 2.0)) * s;
}

Jet ext_p3(const ExtrinsicContext& e, const Jet& f) {
  const double n = e.n();
  Jet out = 8.0 * e.surface().div_apply(e.L0(), f);
  if (n != 3.0) out += ((n - 3.0) / 2.0) * ext_q3(e) * f;
  return out;
}

namespace {

// 2(n−1)/((n−2)(n−3)) ((n−1)/(n−2)|𝒲|² − (n−4)(ρ,𝒲) + δδ𝒲)
Jet umbilic_correction(const ExtrinsicContext& e) {
  const double n = e.n();
  const auto& g = e.surface();
  const Tensor& W = e.weyl_slice();
  Jet s = ((n - 1.0) / (n - 2.0)) * g.norm2(W) + div_div(g, W);
  if (n != 4.0) s -= (n - 4.0) * g.inner(e.surface_curvature().schouten(), W);
  return (2.0 * (n - 1.0) / ((n - 2.0) * (n - 3.0))) * s;
}

}  // namespace

Jet ext_p4_umbilic(const ExtrinsicContext& e, const Jet& f, const OperatorSettings& s) {
  if (e.n() < 4) throw GeometryError("umbilic P4 requires n >= 4");
  require_umbilic(e, s.umbilic_tol);
  const double n = e.n();
  const auto& g = e.surface();
  Jet out = p4(g, e.surface_curvature(), f, s.c_rho) +
            (4.0 * (n - 1.0) / (n - 2.0)) * g.div_apply(e.weyl_slice(), f);
  if (n != 4.0) out += (n / 2.0 - 2.0) * umbilic_correction(e) * f;
  return out;
}

Jet ext_q4_umbilic(const ExtrinsicContext& e, const OperatorSettings& s) {
  if (e.n() < 4) throw GeometryError("umbilic Q4 requires n >= 4");
  require_umbilic(e, s.umbilic_tol);
  return q4(e.surface(), e.surface_curvature(), s.c_rho) + umbilic_correction(e);
}

Jet ext_p4_critical(const ExtrinsicContext& e, const Jet& f) {
  if (e.n() != 4) throw GeometryError("critical P4 requires n = 4");
  const auto& g = e.surface();
  const auto& c = e.surface_curvature();
  const Tensor& h = g.metric();
  Tensor second = g.metric() * (2.0 * c.J()) - 4.0 * c.schouten();
  Tensor ext = 2.0 * e.L0_squared() + 6.0 * e.weyl_slice();
  ext -= h * ((4.0 / 3.0) * g.norm2(e.L0()));
  return g.laplacian(g.laplacian(f)) - g.div_apply(second, f) + g.div_apply(ext, f);
}

namespace {

// The L̊-linear group shared by 𝒞 and I₂.
Jet linear_group(const ExtrinsicContext& e) {
  const auto& g = e.surface();
  const Tensor& L0 = e.L0();
  const Jet& H = e.H();
  Jet s = 2.0 * g.inner(L0, e.nabla0_rho_bar()) - 4.0 * g.inner(L0, e.nabla0_weyl_0ij0()) +
          2.0 * g.inner(L0, g.hessian(H));
  s += 2.0 * H * g.inner(L0, e.surface_curvature().schouten());
  s -= 9.0 * H * g.inner(L0, e.weyl_slice());
  return s;
}

// The L̊-quadratic group without the (L̊², 𝒲) term.
Jet quadratic_group(const ExtrinsicContext& e) {
  const auto& g = e.surface();
  const Tensor& L0 = e.L0();
  const Jet& H = e.H();
  const Jet n2 = g.norm2(L0);
  Jet s = 8.0 * g.inner(e.L0_squared(), e.surface_curvature().schouten());
  s -= 2.0 * e.rho_bar_00() * n2;
  s -= 3.0 * e.surface_curvature().J() * n2;
  s -= 3.0 * H * H * n2;
  s -= H * g.inner(e.L0_squared(), L0);
  return s;
}

}  // namespace

Jet c_invariant(const ExtrinsicContext& e, double c_lap) {
  if (e.n() != 4) throw GeometryError("the invariant C requires n = 4");
  const auto& g = e.surface();
  return linear_group(e) + quadratic_group(e) + 2.0 * div_div(g, e.L0_squared()) +
         c_lap * g.laplacian(g.norm2(e.L0()));
}

Jet i2_integrand(const ExtrinsicContext& e) { return linear_group(e); }

Jet i3_integrand(const ExtrinsicContext& e) {
  return quadratic_group(e) + 21.0 * e.surface().inner(e.L0_squared(), e.weyl_slice());
}

std::array<Jet, 3> q4_total_integrand(const ExtrinsicContext& e) {
  if (e.n() != 4) throw GeometryError("the total Q4 integrand requires n = 4");
  const auto& g = e.surface();
  const auto& c = e.surface_curvature();
  Jet i1 = 2.0 * c.J() * c.J() - 2.0 * g.norm2(c.schouten()) + 4.5 * g.norm2(e.weyl_slice());
  return {std::move(i1), i2_integrand(e), i3_integrand(e)};
}

Jet lemma_simple_residual(const ExtrinsicContext& e, const OperatorSettings& s) {
  if (e.n() < 3) throw GeometryError("lemma residual requires n >= 3");
  require_umbilic(e, s.umbilic_tol);
  const double n = e.n();
  const auto& g = e.surface();
  return g.divergence_scalar(e.nabla0_rho_bar_0()) - g.laplacian(e.rho_bar_00() + e.H() * e.H()) +
         (1.0 / (n - 2.0)) * div_div(g, e.weyl_slice());
}

std::array<Jet, 5> quartic_invariants(const ExtrinsicContext& e) {
  const auto& g = e.surface();
  const Jet n2 = g.norm2(e.L0());
  return {n2 * n2, g.norm2(e.L0_squared()), g.inner(e.L0_squared(), e.weyl_slice()),
          g.norm2(e.weyl_slice()), g.norm2(e.surface_curvature().weyl())};
}

// ---- catalog ----------------------------------------------------------------

const std::vector<OpInfo>& operator_catalog() {
  static const std::vector<OpInfo> cat = {
      {Op::P2, "p2", false, true, 2, 2, 2, 6, false},
      {Op::Q2, "q2", false, false, 2, 2, 2, 6, false},
      {Op::P4, "p4", false, true, 4, 4, 3, 6, false},
      {Op::Q4, "q4", false, false, 4, 4, 3, 6, false},
      {Op::ExtP2, "ext_p2", true, true, 2, 3, 2, 5, false},
      {Op::ExtQ2, "ext_q2", true, false, 2, 3, 2, 5, false},
      {Op::ExtP3, "ext_p3", true, true, 3, 4, 3, 5, false},
      {Op::ExtQ3, "ext_q3", true, false, 3, 4, 3, 5, false},
      {Op::ExtP4Umbilic, "ext_p4_umbilic", true, true, 4, 5, 4, 5, true},
      {Op::ExtQ4Umbilic, "ext_q4_umbilic", true, false, 4, 5, 4, 5, true},
      {Op::ExtP4Critical, "ext_p4_critical", true, true, 4, 4, 4, 4, false},
      {Op::CInvariant, "c_invariant", true, false, 4, 4, 4, 4, false},
      {Op::I1, "q4_integrand_i1", true, false, 4, 3, 4, 4, false},
      {Op::I2, "q4_integrand_i2", true, false, 4, 4, 4, 4, false},
      {Op::I3, "q4_integrand_i3", true, false, 4, 3, 4, 4, false},
      {Op::Q4Total, "q4_integrand_total", true, false, 4, 4, 4, 4, false},
      {Op::LemmaSimple, "lemma_simple_residual", true, false, 4, 5, 3, 5, true},
      {Op::L0Norm4, "l0_norm4", true, false, 0, 2, 2, 5, false},
      {Op::TrL0Fourth, "tr_l0_fourth", true, false, 0, 2, 2, 5, false},
      {Op::L0SqWeyl, "l0sq_weyl", true, false, 0, 3, 3, 5, false},
      {Op::WeylSliceNorm2, "weyl_slice_norm2", true, false, 0, 3, 3, 5, false},
      {Op::WeylNorm2, "weyl_norm2", true, false, 0, 3, 3, 5, false},
      {Op::DivDivWeylSlice, "divdiv_weyl_slice", true, false, 0, 5, 3, 5, false},
      {Op::DivDivL0Sq, "divdiv_l0sq", true, false, 0, 4, 2, 5, false},
      {Op::LapL0Norm2, "lap_l0_norm2", true, false, 0, 4, 2, 5, false},
      {Op::ScalarOne, "one", false, false, 0, 0, 1, 6, false},
  };
  return cat;
}

const OpInfo& op_info(Op op) {
  for (const auto& i : operator_catalog())
    if (i.op == op) return i;
  throw Error("operator missing from catalog");
}

const OpInfo& op_info(std::string_view name) {
  for (const auto& i : operator_catalog())
    if (i.name == name) return i;
  std::string known;
  for (const auto& i : operator_catalog()) known += (known.empty() ? "" : ", ") + std::string(i.name);
  throw ConfigError("unknown operator '" + std::string(name) + "' (known: " + known + ")");
}

OperatorSpec operator_spec(Op op, int n) {
  const OpInfo& info = op_info(op);
  if (!info.takes_function) throw ConfigError(std::string(info.name) + " is not an operator");
  const double N = info.order;
  // Intrinsic P_{2N'} and extrinsic P_N share (n ± N)/2 with N the order.
  return {op, (n + N) / 2.0, (n - N) / 2.0};
}

QSpec q_spec(Op q) {
  switch (q) {
    case Op::Q2:
      return {Op::Q2, Op::P2, 2, -1};
    case Op::Q4:
      return {Op::Q4, Op::P4, 4, +1};
    case Op::ExtQ2:
      return {Op::ExtQ2, Op::ExtP2, 2, -1};
    case Op::ExtQ3:
      return {Op::ExtQ3, Op::ExtP3, 3, +1};
    case Op::ExtQ4Umbilic:
      return {Op::ExtQ4Umbilic, Op::ExtP4Umbilic, 4, +1};
    default:
      throw ConfigError(std::string(op_info(q).name) + " has no transformation law");
  }
}

ScalarField intrinsic_field(Op op, const Metric& g, const ScalarField& f, const OperatorSettings& s) {
  const OpInfo& info = op_info(op);
  if (info.extrinsic) throw ConfigError(std::string(info.name) + " needs an embedding");
  require_dim(info, g.dim());
  if (info.takes_function && f.dim() != g.dim())
    throw ConfigError(std::string(info.name) + " needs a function on the same chart");
  const int n = g.dim();
  return ScalarField(n, [op, g, f, s, &info](std::span<const double> x, int d) {
    if (op == Op::ScalarOne) return Jet::constant(1.0, g.dim(), d);
    const int D = needed_degree(info, d, s);
    LocalGeometry geo(g.jets(x, D), g.dim(), x);
    Curvature c(geo);
    Jet v(g.dim(), 0);
    switch (op) {
      case Op::P2:
        v = p2(geo, c, f(x, D));
        break;
      case Op::Q2:
        v = q2(c);
        break;
      case Op::P4:
        v = p4(geo, c, f(x, D), s.c_rho);
        break;
      case Op::Q4:
        v = q4(geo, c, s.c_rho);
        break;
      default:
        throw Error("unreachable intrinsic operator");
    }
    return finish(info, v, d);
  });
}

ScalarField extrinsic_field(Op op, const Embedding& e, const ScalarField& f, const OperatorSettings& s) {
  const OpInfo& info = op_info(op);
  require_dim(info, e.n());
  if (info.takes_function && f.dim() != e.n())
    throw ConfigError(std::string(info.name) + " needs a function on the surface chart");
  const int n = e.n();
  if (!info.extrinsic) {
    if (op == Op::ScalarOne) return ScalarField::constant(n, 1.0);
    throw ConfigError(std::string(info.name) + " is intrinsic; apply it to the induced metric");
  }
  return ScalarField(n, [op, e, f, s, &info](std::span<const double> x, int d) {
    const int D = std::max(needed_degree(info, d, s), 2);
    ExtrinsicContext ctx(e, x, D);
    auto fx = [&] { return f(x, D); };
    Jet v(e.n(), 0);
    switch (op) {
      case Op::ExtP2:
        v = ext_p2(ctx, fx());
        break;
      case Op::ExtQ2:
        v = ext_q2(ctx);
        break;
      case Op::ExtP3:
        v = ext_p3(ctx, fx());
        break;
      case Op::ExtQ3:
        v = ext_q3(ctx);
        break;
      case Op::ExtP4Umbilic:
        v = ext_p4_umbilic(ctx, fx(), s);
        break;
      case Op::ExtQ4Umbilic:
        v = ext_q4_umbilic(ctx, s);
        break;
      case Op::ExtP4Critical:
        v = ext_p4_critical(ctx, fx());
        break;
      case Op::CInvariant:
        v = c_invariant(ctx, s.c_lap);
        break;
      case Op::I1:
      case Op::I2:
      case Op::I3: {
        const auto& g = ctx.surface();
        const auto& c = ctx.surface_curvature();
        // separately, so each uses only the degree it needs
        if (op == Op::I1)
          v = 2.0 * c.J() * c.J() - 2.0 * g.norm2(c.schouten()) + 4.5 * g.norm2(ctx.weyl_slice());
        else if (op == Op::I2)
          v = i2_integrand(ctx);
        else
          v = i3_integrand(ctx);
        break;
      }
      case Op::Q4Total: {
        auto t = q4_total_integrand(ctx);
        v = t[0] + t[1] + t[2];
        break;
      }
      case Op::LemmaSimple:
        v = lemma_simple_residual(ctx, s);
        break;
      case Op::L0Norm4: {
        Jet n2 = ctx.surface().norm2(ctx.L0());
        v = n2 * n2;
        break;
      }
      case Op::TrL0Fourth:
        v = ctx.surface().norm2(ctx.L0_squared());
        break;
      case Op::L0SqWeyl:
        v = ctx.surface().inner(ctx.L0_squared(), ctx.weyl_slice());
        break;
      case Op::WeylSliceNorm2:
        v = ctx.surface().norm2(ctx.weyl_slice());
        break;
      case Op::WeylNorm2:
        v = ctx.surface().norm2(ctx.surface_curvature().weyl());
        break;
      case Op::DivDivWeylSlice:
        v = div_div(ctx.surface(), ctx.weyl_slice());
        break;
      case Op::DivDivL0Sq:
        v = div_div(ctx.surface(), ctx.L0_squared());
        break;
      case Op::LapL0Norm2:
        v = ctx.surface().laplacian(ctx.surface().norm2(ctx.L0()));
        break;
      default:
        throw Error("unreachable extrinsic operator");
    }
    return finish(info, v, d);
  });
}

}  // namespace exq
