#include "exq/curvature.hpp"

namespace exq {

namespace {

// Visits a<b, c<d with (a,b) ≤ (c,d) lexicographically.
template <class F>
void for_each_pair_of_pairs(int m, F&& f) {
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      for (int c = a; c < m; ++c)
        for (int d = c + 1; d < m; ++d)
          if (c > a || d >= b) f(a, b, c, d);
}

// Writes v into all eight slots related by the curvature symmetries.
void fill_algebraic(Tensor& t, int a, int b, int c, int d, Jet v) {
  Jet n = -v;
  t(b, a, c, d) = n;
  t(a, b, d, c) = n;
  t(c, d, b, a) = n;
  t(d, c, a, b) = n;
  t(b, a, d, c) = v;
  t(c, d, a, b) = v;
  t(d, c, b, a) = v;
  t(a, b, c, d) = std::move(v);
}

}  // namespace

const Tensor& Curvature::riemann() const {
  if (riemann_) return *riemann_;
  const int m = geo_.dim();
  const auto& gamma = geo_.christoffel();
  const int nv = gamma[0].nvars();
  auto G = [&](int a, int b, int c) -> const Jet& {
    return gamma[(static_cast<std::size_t>(a) * m + b) * m + c];
  };
  // ∂_c Γ^a_{db}
  std::vector<Jet> dgamma;
  dgamma.reserve(static_cast<std::size_t>(m) * m * m * m);
  for (int c = 0; c < m; ++c)
    for (std::size_t k = 0; k < gamma.size(); ++k) dgamma.push_back(gamma[k].partial(c));
  auto dG = [&](int c, int a, int d, int b) -> const Jet& {
    return dgamma[static_cast<std::size_t>(c) * gamma.size() + (static_cast<std::size_t>(a) * m + d) * m + b];
  };

  // R^a_{bcd} = ∂_cΓ^a_{db} − ∂_dΓ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}
  Tensor up(m, 4, nv, 0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = c + 1; d < m; ++d) {
          Jet v = dG(c, a, d, b) - dG(d, a, c, b);
          for (int e = 0; e < m; ++e) {
            v.fma(G(a, c, e), G(e, d, b));
            v.fma(-G(a, d, e), G(e, c, b));
          }
          up(a, b, d, c) = -v;
          up(a, b, c, d) = std::move(v);
        }
  const int rdeg = gamma[0].degree() - 1;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) up(a, b, c, c) = Jet(nv, rdeg);

  const Tensor& g = geo_.metric();
  const int udeg = up.degree();
  Tensor low(m, 4, nv, udeg);
  for_each_pair_of_pairs(m, [&](int a, int b, int c, int d) {
    Jet s(nv, udeg);
    for (int e = 0; e < m; ++e) s.fma(g(a, e), up(e, b, c, d));
    fill_algebraic(low, a, b, c, d, std::move(s));
  });
  riemann_ = std::move(low);
  return *riemann_;
}

const Tensor& Curvature::ricci() const {
  if (ricci_) return *ricci_;
  const int m = geo_.dim();
  if (m < 2) throw GeometryError("Ricci curvature needs dimension >= 2");
  const Tensor& R = riemann();
  const Tensor& gi = geo_.inverse();
  const int nv = gi[0].nvars();
  Tensor ric(m, 2, nv, 0);
  const int rdeg = R.degree();
  for (int b = 0; b < m; ++b)
    for (int d = b; d < m; ++d) {
      Jet s(nv, rdeg);
      for (int a = 0; a < m; ++a)
        for (int c = 0; c < m; ++c) s.fma(gi(a, c), R(a, b, c, d));
      ric(d, b) = s;
      ric(b, d) = std::move(s);
    }
  ricci_ = std::move(ric);
  return *ricci_;
}

const Jet& Curvature::scalar() const {
  if (!scal_) scal_ = geo_.trace(ricci());
  return *scal_;
}

const Jet& Curvature::J() const {
  if (!J_) {
    const int m = geo_.dim();
    J_ = scalar() * (1.0 / (2.0 * (m - 1)));
  }
  return *J_;
}

const Tensor& Curvature::schouten() const {
  if (schouten_) return *schouten_;
  const int m = geo_.dim();
  if (m < 3) throw GeometryError("Schouten tensor is undefined in dimension " + std::to_string(m));
  Tensor rho = ricci() - geo_.metric() * J();
  rho *= 1.0 / (m - 2);
  schouten_ = std::move(rho);
  return *schouten_;
}

Tensor kulkarni_nomizu(const Tensor& a, const Tensor& b) {
  const int m = a.dim();
  const int nv = a[0].nvars();
  Tensor out(m, 4, nv, 0);
  const int deg = std::min(a.degree(), b.degree());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          Jet s(nv, deg);
          s.fma(a(i, k), b(j, l));
          s.fma(a(j, l), b(i, k));
          s.fma(-a(i, l), b(j, k));
          s.fma(-a(j, k), b(i, l));
          out(i, j, k, l) = std::move(s);
        }
  return out;
}

const Tensor& Curvature::weyl() const {
  if (weyl_) return *weyl_;
  const int m = geo_.dim();
  if (m < 3) throw GeometryError("Weyl tensor needs dimension >= 3");
  const Tensor& R = riemann();
  const Tensor& p = schouten();
  const Tensor& g = geo_.metric();
  const int nv = g[0].nvars();
  const int deg = std::min(R.degree(), p.degree());
  Tensor w(m, 4, nv, deg);
  // W = R − ρ⊙g on independent components only
  for_each_pair_of_pairs(m, [&](int i, int j, int k, int l) {
    Jet s = R(i, j, k, l);
    s.fma(-p(i, k), g(j, l));
    s.fma(-g(i, k), p(j, l));
    s.fma(p(i, l), g(j, k));
    s.fma(g(i, l), p(j, k));
    fill_algebraic(w, i, j, k, l, std::move(s));
  });
  weyl_ = std::move(w);
  return *weyl_;
}

}  // namespace exq
