#include "exq/hypersurface.hpp"

#include <bit>
#include <cmath>

namespace exq {

namespace {

// Determinant of a row-major k×k jet matrix by expansion over row subsets:
// d[mask] is the determinant of the rows in `mask` against the first
// popcount(mask) columns. Division-free, so jets whose constant terms vanish
// keep their derivatives.
Jet jet_det(const std::vector<Jet>& a, int k) {
  const int nv = a[0].nvars();
  int deg = kMaxJetDegree;
  for (const Jet& j : a) deg = std::min(deg, j.degree());
  std::vector<Jet> d(std::size_t{1} << k, Jet(nv, deg));
  d[0] = Jet::constant(1.0, nv, deg);
  for (unsigned mask = 0; mask + 1 < (1u << k); ++mask) {
    const int c = std::popcount(mask);
    bool nonzero = false;
    for (double v : d[mask].coeffs())
      if (v != 0.0) {
        nonzero = true;
        break;
      }
    if (!nonzero) continue;
    for (int r = 0; r < k; ++r) {
      if (mask & (1u << r)) continue;
      // sign of moving row r past the rows above it already used
      const int above = std::popcount(mask & ((1u << r) - 1));
      const Jet term = a[static_cast<std::size_t>(r) * k + c] * d[mask];
      if ((c + above) % 2 == 0)
        d[mask | (1u << r)] += term;
      else
        d[mask | (1u << r)] -= term;
    }
  }
  return d[(1u << k) - 1];
}

bool is_zero(const Jet& j) {
  for (double v : j.coeffs())
    if (v != 0.0) return false;
  return true;
}

std::vector<Expr> bind_all(const std::vector<Expr>& es, const std::vector<std::string>& names) {
  std::vector<Expr> out;
  out.reserve(es.size());
  for (const Expr& e : es) out.push_back(e.is_bound() ? e : e.bind(names));
  return out;
}

}  // namespace

void Embedding::validate() const {
  if (surface.dim() < 2) throw ConfigError("hypersurface dimension must be at least 2");
  if (ambient.dim() != surface.dim() + 1)
    throw ConfigError("ambient dimension " + std::to_string(ambient.dim()) +
                      " is not surface dimension + 1 (" + std::to_string(surface.dim() + 1) + ")");
  if (static_cast<int>(iota.size()) != ambient.dim())
    throw ConfigError("embedding needs " + std::to_string(ambient.dim()) + " component maps, got " +
                      std::to_string(iota.size()));
  for (const Expr& e : iota) exq::validate(e, surface.names());
  if (orientation != 1 && orientation != -1) throw ConfigError("orientation must be +1 or -1");
}

Embedding Embedding::rescaled(const ScalarField& ambient_phi) const {
  Embedding e = *this;
  e.ambient = conformal_rescale(ambient, ambient_phi);
  return e;
}

Embedding Embedding::flipped() const {
  Embedding e = *this;
  e.orientation = -orientation;
  return e;
}

ScalarField pullback(const Embedding& e, const ScalarField& ambient_field) {
  if (ambient_field.dim() != e.ambient.dim())
    throw GeometryError("pullback of a field that does not live on the ambient chart");
  const auto bound = bind_all(e.iota, e.surface.names());
  const Chart chart = e.surface;
  return ScalarField(chart.dim(), [bound, chart, ambient_field](std::span<const double> x, int degree) {
    const auto xs = chart.seed(x, degree);
    std::vector<Jet> iota;
    std::vector<double> y;
    for (const Expr& b : bound) {
      iota.push_back(eval_jet(b, xs));
      y.push_back(iota.back().value());
    }
    if (degree == 0) return Jet::constant(ambient_field(y, 0).value(), chart.dim(), 0);
    Composition comp(iota, degree);
    return comp(ambient_field(y, degree));
  });
}

CurvaturePairs::CurvaturePairs(int dim) : dim_(dim), pair_(static_cast<std::size_t>(dim) * dim, -1) {
  for (int a = 0; a < dim; ++a)
    for (int b = a + 1; b < dim; ++b) {
      pair_[a * dim + b] = pair_[b * dim + a] = npairs();
      pairs_.push_back({a, b});
    }
  canon_.resize(ncanon());
  for (int P = 0; P < npairs(); ++P)
    for (int Q = P; Q < npairs(); ++Q)
      canon_[canon(P, Q)] = {pairs_[P].first, pairs_[P].second, pairs_[Q].first, pairs_[Q].second};
}

Metric induced_metric(const Embedding& e) {
  const auto bound = bind_all(e.iota, e.surface.names());
  const Chart chart = e.surface;
  const Metric amb = e.ambient;
  return Metric(chart, [bound, chart, amb](std::span<const double> x, int degree) {
    const int n = chart.dim();
    const int N = n + 1;
    const auto xs = chart.seed(x, degree + 1);
    std::vector<Jet> iota;
    std::vector<double> y;
    for (const Expr& b : bound) {
      iota.push_back(eval_jet(b, xs));
      y.push_back(iota.back().value());
    }
    Composition comp(iota, degree);
    std::vector<Jet> gbar;
    for (const Jet& g : amb.jets(y, degree)) gbar.push_back(comp(g));
    std::vector<Jet> t;
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < N; ++a) t.push_back(iota[a].partial(i));
    std::vector<Jet> h(static_cast<std::size_t>(n) * n, Jet(n, degree));
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet s(n, degree);
        for (int a = 0; a < N; ++a) {
          Jet ga(n, degree);
          for (int b = 0; b < N; ++b) ga.fma(gbar[a * N + b], t[j * N + b]);
          s.fma(t[i * N + a], ga);
        }
        h[i * n + j] = s;
        h[j * n + i] = std::move(s);
      }
    return h;
  });
}

ExtrinsicContext::ExtrinsicContext(const Embedding& e, std::span<const double> x, int degree)
    : n_(e.n()), degree_(degree), x_(x.begin(), x.end()) {
  if (degree < 2) throw DegreeError("extrinsic geometry needs embedding degree >= 2");
  const int n = n_;
  const int N = n + 1;
  const int K = degree - 1;
  if (e.ambient.dim() != N) throw GeometryError("ambient dimension must be n + 1");

  xj_ = e.surface.seed(x, degree);
  const auto bound = bind_all(e.iota, e.surface.names());
  for (const Expr& b : bound) {
    iota_.push_back(eval_jet(b, xj_));
    y0_.push_back(iota_.back().value());
  }
  comp_ = std::make_unique<Composition>(iota_, K);

  amb_ = std::make_unique<LocalGeometry>(e.ambient.jets(y0_, K), N, y0_);
  amb_curv_ = std::make_unique<Curvature>(*amb_);

  for (int i = 0; i < n; ++i)
    for (int a = 0; a < N; ++a) tangent_.push_back(iota_[a].partial(i));
  auto T = [&](int i, int a) -> const Jet& { return tangent_[static_cast<std::size_t>(i) * N + a]; };

  const Tensor gbar = compose(amb_->metric());
  const Tensor gbar_inv = compose(amb_->inverse());

  // h_ij = ḡ_ab ∂_iι^a ∂_jι^b
  std::vector<Jet> h(static_cast<std::size_t>(n) * n, Jet(n, K));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet s(n, K);
      for (int a = 0; a < N; ++a) {
        Jet ga(n, K);
        for (int b = 0; b < N; ++b) ga.fma(gbar(a, b), T(j, b));
        s.fma(T(i, a), ga);
      }
      h[i * n + j] = s;
      h[j * n + i] = std::move(s);
    }
  surf_ = std::make_unique<LocalGeometry>(std::move(h), n, x);
  surf_curv_ = std::make_unique<Curvature>(*surf_);

  // Cofactor normal: n_a = σ det[∂_1ι, …, ∂_nι, e_a].
  std::vector<Jet> conormal;
  for (int a = 0; a < N; ++a) {
    std::vector<Jet> minor;
    for (int r = 0; r < N; ++r) {
      if (r == a) continue;
      for (int i = 0; i < n; ++i) minor.push_back(T(i, r));
    }
    Jet c = jet_det(std::move(minor), n);
    if ((a + n) % 2 != 0) c = -c;
    if (e.orientation < 0) c = -c;
    conormal.push_back(std::move(c));
  }
  std::vector<Jet> raised;
  for (int a = 0; a < N; ++a) {
    Jet s(n, K);
    for (int b = 0; b < N; ++b) s.fma(gbar_inv(a, b), conormal[b]);
    raised.push_back(std::move(s));
  }
  Jet len2(n, K);
  for (int a = 0; a < N; ++a) len2.fma(raised[a], conormal[a]);
  if (!(len2.value() > 1e-24)) throw GeometryError("embedding is not an immersion at this point");
  const Jet inv_len = reciprocal(sqrt(len2));
  for (int a = 0; a < N; ++a) {
    nu_.push_back(raised[a] * inv_len);
    nu_low_.push_back(conormal[a] * inv_len);
  }

  if (K >= 1) {
    for (const Jet& g : amb_->christoffel()) christoffel_bar_.push_back(compose(g));
  }
}

Tensor ExtrinsicContext::compose(const Tensor& t) const {
  Tensor out(t.dim(), t.rank(), n_, 0);
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = (*comp_)(t[k]);
  return out;
}

const Tensor& ExtrinsicContext::L() const {
  if (L_) return *L_;
  const int n = n_, N = n + 1;
  if (christoffel_bar_.empty()) throw DegreeError("second fundamental form needs embedding degree >= 2");
  auto T = [&](int i, int a) -> const Jet& { return tangent_[static_cast<std::size_t>(i) * N + a]; };
  auto G = [&](int a, int b, int c) -> const Jet& {
    return christoffel_bar_[(static_cast<std::size_t>(a) * N + b) * N + c];
  };
  // L_ij = −ν_a (∂_i∂_jι^a + Γ̄^a_bc ∂_iι^b ∂_jι^c)
  Tensor L(n, 2, n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet s(n, degree_ - 2);
      for (int a = 0; a < N; ++a) {
        Jet acc = T(j, a).partial(i);
        for (int b = 0; b < N; ++b) {
          Jet gb(n, degree_ - 2);
          for (int c = 0; c < N; ++c) gb.fma(G(a, b, c), T(j, c));
          acc.fma(gb, T(i, b));
        }
        s.fma(nu_low_[a], acc);
      }
      L(i, j) = -s;
      L(j, i) = -s;
    }
  L_ = std::move(L);
  return *L_;
}

const Jet& ExtrinsicContext::H() const {
  if (!H_) H_ = surface().trace(L()) * (1.0 / n_);
  return *H_;
}

const Tensor& ExtrinsicContext::L0() const {
  if (!L0_) L0_ = L() - h() * H();
  return *L0_;
}

const Tensor& ExtrinsicContext::L0_squared() const {
  if (!L0sq_) L0sq_ = surface().compose(L0(), L0());
  return *L0sq_;
}

Tensor ExtrinsicContext::pull_back2(const Tensor& a2) const {
  const int n = n_, N = n + 1;
  const Tensor c = compose(a2);
  const int cdeg = c.degree();
  auto T = [&](int i, int a) -> const Jet& { return tangent_[static_cast<std::size_t>(i) * N + a]; };
  Tensor out(n, 2, n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s(n, cdeg);
      for (int a = 0; a < N; ++a) {
        Jet row(n, cdeg);
        for (int b = 0; b < N; ++b) row.fma(c(a, b), T(j, b));
        s.fma(T(i, a), row);
      }
      out(i, j) = std::move(s);
    }
  return out;
}

Tensor ExtrinsicContext::normal_slice4(const Tensor& a4) const {
  const CurvaturePairs P(n_ + 1);
  const int deg = a4.degree();
  std::vector<Jet> c(P.ncanon(), Jet(n_, deg));
  for (int k = 0; k < P.ncanon(); ++k) {
    const auto [a, p, b, q] = P.indices(k);
    const Jet& comp = a4(a, p, b, q);
    if (!is_zero(comp)) c[k] = (*comp_)(comp);
  }
  return slice_canonical(c, deg);
}

Tensor ExtrinsicContext::slice_canonical(const std::vector<Jet>& c, int deg) const {
  const int n = n_, N = n + 1;
  const CurvaturePairs P(N);
  auto T = [&](int i, int a) -> const Jet& { return tangent_[static_cast<std::size_t>(i) * N + a]; };
  // S_pq = ν^a ν^b C_{apbq}
  std::vector<Jet> S(static_cast<std::size_t>(N) * N, Jet(n, deg));
  for (int p = 0; p < N; ++p)
    for (int q = p; q < N; ++q) {
      Jet s(n, deg);
      for (int a = 0; a < N; ++a) {
        if (a == p) continue;
        Jet inner(n, deg);
        for (int b = 0; b < N; ++b) {
          if (b == q) continue;
          const int sign = P.sign(a, p) * P.sign(b, q);
          const Jet& v = c[P.canon(P.pair(a, p), P.pair(b, q))];
          if (sign > 0)
            inner.fma(nu_[b], v);
          else
            inner.fma(-nu_[b], v);
        }
        s.fma(nu_[a], inner);
      }
      S[p * N + q] = s;
      S[q * N + p] = std::move(s);
    }
  Tensor out(n, 2, n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet s(n, deg);
      for (int p = 0; p < N; ++p) {
        Jet row(n, deg);
        for (int q = 0; q < N; ++q) row.fma(S[p * N + q], T(j, q));
        s.fma(T(i, p), row);
      }
      out(i, j) = s;
      out(j, i) = std::move(s);
    }
  return out;
}

const Tensor& ExtrinsicContext::rho_bar_tangent() const {
  if (!rho_t_) rho_t_ = pull_back2(amb_curv_->schouten());
  return *rho_t_;
}

const Jet& ExtrinsicContext::rho_bar_00() const {
  if (rho_00_) return *rho_00_;
  const int N = n_ + 1;
  const Tensor c = compose(amb_curv_->schouten());
  const int cdeg = c.degree();
  Jet s(n_, cdeg);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) s.fma(c(a, b), nu_[a] * nu_[b]);
  rho_00_ = std::move(s);
  return *rho_00_;
}

const Tensor& ExtrinsicContext::rho_bar_0() const {
  if (rho_0_) return *rho_0_;
  const int n = n_, N = n + 1;
  const Tensor c = compose(amb_curv_->schouten());
  const int cdeg = c.degree();
  Tensor out(n, 1, n, 0);
  for (int i = 0; i < n; ++i) {
    Jet s(n, cdeg);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) s.fma(c(a, b), nu_[a] * tangent_[static_cast<std::size_t>(i) * N + b]);
    out[i] = std::move(s);
  }
  rho_0_ = std::move(out);
  return *rho_0_;
}

const Tensor& ExtrinsicContext::fialkow() const {
  if (fialkow_) return *fialkow_;
  if (n_ < 3) throw GeometryError("Fialkow tensor needs n >= 3");
  Tensor F = rho_bar_tangent() - surf_curv_->schouten();
  F += L0() * H();
  F += h() * (0.5 * H() * H());
  fialkow_ = std::move(F);
  return *fialkow_;
}

const Tensor& ExtrinsicContext::weyl_slice() const {
  if (W_) return *W_;
  if (n_ + 1 < 4) {
    // Weyl vanishes identically for three-dimensional ambients.
    W_ = Tensor(n_, 2, n_, std::max(degree_ - 3, 0));
  } else {
    W_ = normal_slice4(amb_curv_->weyl());
  }
  return *W_;
}

const Tensor& ExtrinsicContext::G_bar() const {
  if (!G_) G_ = normal_slice4(amb_curv_->riemann());
  return *G_;
}

const Tensor& ExtrinsicContext::nabla0_rho_bar() const {
  if (n_rho_) return *n_rho_;
  const int n = n_, N = n + 1;
  const Tensor d = amb_->covariant_derivative(amb_curv_->schouten());
  const int ddeg = d.degree();
  auto T = [&](int i, int a) -> const Jet& { return tangent_[static_cast<std::size_t>(i) * N + a]; };
  // contract the derivative slot with ν first, in ambient components
  std::vector<Jet> S(static_cast<std::size_t>(N) * N, Jet(n, ddeg));
  for (int a = 0; a < N; ++a)
    for (int b = a; b < N; ++b) {
      Jet s(n, ddeg);
      for (int c = 0; c < N; ++c) s.fma(nu_[c], (*comp_)(d(c, a, b)));
      S[a * N + b] = s;
      S[b * N + a] = std::move(s);
    }
  Tensor out(n, 2, n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s(n, ddeg);
      for (int a = 0; a < N; ++a) {
        Jet row(n, ddeg);
        for (int b = 0; b < N; ++b) row.fma(S[a * N + b], T(j, b));
        s.fma(T(i, a), row);
      }
      out(i, j) = std::move(s);
    }
  n_rho_ = std::move(out);

  Tensor one(n, 1, n, 0);
  for (int i = 0; i < n; ++i) {
    Jet s(n, ddeg);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) s.fma(S[a * N + b], nu_[a] * T(i, b));
    one[i] = std::move(s);
  }
  n_rho_0_ = std::move(one);
  return *n_rho_;
}

const Tensor& ExtrinsicContext::nabla0_rho_bar_0() const {
  if (!n_rho_0_) nabla0_rho_bar();
  return *n_rho_0_;
}

const Tensor& ExtrinsicContext::nabla0_weyl_0ij0() const {
  if (n_weyl_) return *n_weyl_;
  const int n = n_, N = n + 1;
  if (N < 4) {
    n_weyl_ = Tensor(n, 2, n, std::max(degree_ - 4, 0));
    return *n_weyl_;
  }
  // (∇̄_c W̄)_{apbq} on independent components only, composed, then
  // contracted with ν^c.
  const CurvaturePairs P(N);
  const Tensor& W = amb_curv_->weyl();
  const auto& G = amb_->christoffel();
  auto gam = [&](int e, int c, int a) -> const Jet& { return G[(static_cast<std::size_t>(e) * N + c) * N + a]; };
  const int adeg = std::min(W.degree() - 1, G[0].degree());
  const int deg = std::min(adeg, degree_ - 1);
  std::vector<Jet> e0(P.ncanon(), Jet(n, deg));
  for (int k = 0; k < P.ncanon(); ++k) {
    const auto [a, p, b, q] = P.indices(k);
    for (int c = 0; c < N; ++c) {
      Jet v = W(a, p, b, q).partial(c);
      for (int e = 0; e < N; ++e) {
        v.fma(-gam(e, c, a), W(e, p, b, q));
        v.fma(-gam(e, c, p), W(a, e, b, q));
        v.fma(-gam(e, c, b), W(a, p, e, q));
        v.fma(-gam(e, c, q), W(a, p, b, e));
      }
      if (!is_zero(v)) e0[k].fma(nu_[c], (*comp_)(v));
    }
  }
  Tensor out = slice_canonical(e0, deg);
  n_weyl_ = std::move(out);
  return *n_weyl_;
}

}  // namespace exq
