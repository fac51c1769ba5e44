#include "exq/packs.hpp"

namespace exq {

namespace {

std::vector<double> values_of(const std::vector<Jet>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const Jet& j : v) out.push_back(j.value());
  return out;
}

}  // namespace

CurvaturePack curvature_pack(const Metric& g, std::span<const double> x) {
  if (static_cast<int>(x.size()) != g.dim()) throw ConfigError("point has the wrong number of coordinates");
  IntrinsicContext c(g, x, 2);
  CurvaturePack p;
  p.dim = g.dim();
  p.point.assign(x.begin(), x.end());
  p.metric = c.geo().metric().values();
  p.riemann = c.curv().riemann().values();
  p.ricci = c.curv().ricci().values();
  p.scal = c.curv().scalar().value();
  p.J = c.curv().J().value();
  if (p.dim >= 3) {
    p.schouten = c.curv().schouten().values();
    p.weyl = c.curv().weyl().values();
  }
  return p;
}

ExtrinsicPack extrinsic_pack(const Embedding& e, std::span<const double> x) {
  if (static_cast<int>(x.size()) != e.n()) throw ConfigError("point has the wrong number of coordinates");
  // ∇̄W̄ needs three ambient derivatives, which the context keeps at degree − 1
  ExtrinsicContext c(e, x, 4);
  ExtrinsicPack p;
  p.n = e.n();
  p.point.assign(x.begin(), x.end());
  p.ambient_point.assign(c.ambient_point().begin(), c.ambient_point().end());
  p.normal = values_of(c.normal());
  p.h = c.h().values();
  p.L = c.L().values();
  p.H = c.H().value();
  p.L0 = c.L0().values();
  if (p.n >= 3) p.fialkow = c.fialkow().values();
  p.weyl_slice = c.weyl_slice().values();
  p.rho_bar = c.rho_bar_tangent().values();
  p.rho_bar_0 = c.rho_bar_0().values();
  p.rho_bar_00 = c.rho_bar_00().value();
  p.G_bar = c.G_bar().values();
  p.nabla0_rho_bar = c.nabla0_rho_bar().values();
  p.nabla0_rho_bar_0 = c.nabla0_rho_bar_0().values();
  p.nabla0_weyl_0ij0 = c.nabla0_weyl_0ij0().values();
  return p;
}

}  // namespace exq
