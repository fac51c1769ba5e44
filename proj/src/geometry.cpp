#include "exq/geometry.hpp"

#include <cmath>
#include <sstream>

namespace exq {

namespace {

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace

const char* axis_kind_name(Axis::Kind k) {
  switch (k) {
    case Axis::Kind::Periodic:
      return "periodic";
    case Axis::Kind::Polar:
      return "polar";
    case Axis::Kind::Interval:
      return "interval";
  }
  return "?";
}

Chart::Chart(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || static_cast<int>(axes_.size()) > kMaxJetVars)
    throw GeometryError("chart dimension must be in 1.." + std::to_string(kMaxJetVars));
  for (const auto& a : axes_) {
    if (!(a.hi > a.lo)) throw GeometryError("axis '" + a.name + "' has an empty domain");
    for (const auto& n : names_)
      if (n == a.name) throw GeometryError("duplicate axis name '" + a.name + "'");
    names_.push_back(a.name);
  }
}

bool Chart::closed() const {
  for (const auto& a : axes_)
    if (a.kind == Axis::Kind::Interval) return false;
  return true;
}

bool Chart::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    const auto& a = axes_[i];
    if (a.kind == Axis::Kind::Periodic) continue;
    if (!(x[i] > a.lo && x[i] < a.hi)) return false;
  }
  return true;
}

std::vector<Jet> Chart::seed(std::span<const double> x, int degree) const {
  if (static_cast<int>(x.size()) != dim())
    throw GeometryError("point has " + std::to_string(x.size()) + " coordinates, chart has " +
                        std::to_string(dim()));
  std::vector<Jet> out;
  out.reserve(dim());
  for (int i = 0; i < dim(); ++i)
    out.push_back(degree == 0 ? Jet::constant(x[i], dim(), 0)
                              : Jet::seed_variable(i, x[i], dim(), degree));
  return out;
}

ScalarField ScalarField::from_expr(const Chart& chart, const Expr& e) {
  Expr bound = e.bind(chart.names());
  return ScalarField(chart.dim(), [chart, bound](std::span<const double> x, int degree) {
    return eval_jet(bound, chart.seed(x, degree));
  });
}

ScalarField ScalarField::constant(int dim, double c) {
  return ScalarField(dim, [dim, c](std::span<const double>, int degree) {
    return Jet::constant(c, dim, degree);
  });
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  if (a.dim() != b.dim()) throw GeometryError("field product across different charts");
  return ScalarField(a.dim(), [a, b](std::span<const double> x, int degree) {
    return a(x, degree) * b(x, degree);
  });
}

ScalarField exp_scaled(const ScalarField& phi, double s) {
  return ScalarField(phi.dim(), [phi, s](std::span<const double> x, int degree) {
    return exp(s * phi(x, degree));
  });
}

Metric Metric::from_expressions(const Chart& chart, const std::vector<std::vector<Expr>>& g) {
  const int m = chart.dim();
  if (static_cast<int>(g.size()) != m)
    throw ConfigError("metric needs " + std::to_string(m) + " rows");
  std::vector<Expr> bound;
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(g[i].size()) != m)
      throw ConfigError("metric row " + std::to_string(i) + " needs " + std::to_string(m) +
                        " entries");
    for (int j = 0; j < m; ++j) {
      if (print(g[i][j]) != print(g[j][i]))
        throw ConfigError("metric is not symmetric at (" + std::to_string(i) + "," +
                          std::to_string(j) + ")");
      bound.push_back(g[i][j].bind(chart.names()));
    }
  }
  return Metric(chart, [chart, bound, m](std::span<const double> x, int degree) {
    const auto seeds = chart.seed(x, degree);
    std::vector<Jet> out(static_cast<std::size_t>(m) * m, Jet(m, degree));
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        out[i * m + j] = eval_jet(bound[i * m + j], seeds);
        if (j != i) out[j * m + i] = out[i * m + j];
      }
    return out;
  });
}

Metric Metric::euclidean(const Chart& chart) {
  const int m = chart.dim();
  return Metric(chart, [m](std::span<const double>, int degree) {
    std::vector<Jet> out(static_cast<std::size_t>(m) * m, Jet(m, degree));
    for (int i = 0; i < m; ++i) out[i * m + i] += 1.0;
    return out;
  });
}

Metric conformal_rescale(const Metric& g, const ScalarField& phi) {
  if (phi.dim() != g.dim()) throw GeometryError("conformal factor lives on a different chart");
  return Metric(g.chart(), [g, phi](std::span<const double> x, int degree) {
    auto out = g.jets(x, degree);
    const Jet w = exp(2.0 * phi(x, degree));
    for (Jet& c : out) c = c * w;
    return out;
  });
}

Tensor::Tensor(int dim, int rank, int nvars, int degree)
    : dim_(dim), rank_(rank), c_(ipow(dim, rank), Jet(nvars, degree)) {}

int Tensor::degree() const {
  int d = kMaxJetDegree;
  for (const Jet& j : c_) d = std::min(d, j.degree());
  return d;
}

Tensor& Tensor::operator+=(const Tensor& o) {
  if (o.c_.size() != c_.size()) throw GeometryError("tensor shape mismatch");
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& o) {
  if (o.c_.size() != c_.size()) throw GeometryError("tensor shape mismatch");
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (Jet& j : c_) j *= s;
  return *this;
}

Tensor& Tensor::operator*=(const Jet& s) {
  for (Jet& j : c_) j = j * s;
  return *this;
}

double Tensor::max_abs_value() const {
  double m = 0.0;
  for (const Jet& j : c_) m = std::max(m, std::abs(j.value()));
  return m;
}

std::vector<double> Tensor::values() const {
  std::vector<double> v;
  v.reserve(c_.size());
  for (const Jet& j : c_) v.push_back(j.value());
  return v;
}

std::vector<double> leading_minors(std::span<const double> a, int m) {
  std::vector<double> out;
  for (int k = 1; k <= m; ++k) {
    std::vector<double> s(static_cast<std::size_t>(k) * k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) s[i * k + j] = a[i * m + j];
    double det = 1.0;
    for (int c = 0; c < k; ++c) {
      int piv = c;
      for (int r = c + 1; r < k; ++r)
        if (std::abs(s[r * k + c]) > std::abs(s[piv * k + c])) piv = r;
      if (s[piv * k + c] == 0.0) {
        det = 0.0;
        break;
      }
      if (piv != c) {
        for (int j = 0; j < k; ++j) std::swap(s[c * k + j], s[piv * k + j]);
        det = -det;
      }
      det *= s[c * k + c];
      for (int r = c + 1; r < k; ++r) {
        const double f = s[r * k + c] / s[c * k + c];
        for (int j = c; j < k; ++j) s[r * k + j] -= f * s[c * k + j];
      }
    }
    out.push_back(det);
  }
  return out;
}

LocalGeometry::LocalGeometry(std::vector<Jet> g, int dim, std::span<const double> where)
    : dim_(dim), nvars_(g.at(0).nvars()), det_(Jet::constant(1.0, g[0].nvars(), g[0].degree())) {
  const int m = dim;
  if (static_cast<int>(g.size()) != m * m) throw GeometryError("metric jet matrix has wrong size");
  std::vector<double> g0(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) g0[k] = g[k].value();
  const auto minors = leading_minors(g0, m);
  // Each elimination pivot minor_k / minor_{k-1} must be a non-negligible
  // fraction of its diagonal entry; scale-free, so polar charts near the
  // poles are accepted.
  for (int k = 0; k < m; ++k)
    if (!(g0[k * m + k] > 0.0) || !(minors[k] > 0.0) ||
        !(minors[k] / (k ? minors[k - 1] : 1.0) > 1e-12 * g0[k * m + k])) {
      std::string where_s = where.empty() ? std::string("") : " at " + format_point(where);
      std::ostringstream os;
      os << "metric is not positive definite" << where_s << " (leading minor " << k + 1 << " = " << minors[k] << ")";
      throw GeometryError(os.str());
    }

  int degree = kMaxJetDegree;
  for (const Jet& j : g) degree = std::min(degree, j.degree());
  g_ = Tensor(m, 2, nvars_, degree);
  for (int k = 0; k < m * m; ++k) g_[k] = g[k].truncated(degree);

  // Gauss-Jordan without pivoting; SPD guarantees positive pivots.
  std::vector<Jet> a(g_.size(), Jet(nvars_, degree));
  std::vector<Jet> inv(g_.size(), Jet(nvars_, degree));
  for (int k = 0; k < m * m; ++k) a[k] = g_[k];
  for (int i = 0; i < m; ++i) inv[i * m + i] += 1.0;
  det_ = Jet::constant(1.0, nvars_, degree);
  for (int c = 0; c < m; ++c) {
    const Jet piv = a[c * m + c];
    det_ = det_ * piv;
    const Jet r = reciprocal(piv);
    for (int j = 0; j < m; ++j) {
      a[c * m + j] = a[c * m + j] * r;
      inv[c * m + j] = inv[c * m + j] * r;
    }
    for (int i = 0; i < m; ++i) {
      if (i == c) continue;
      const Jet f = a[i * m + c];
      for (int j = 0; j < m; ++j) {
        a[i * m + j] -= f * a[c * m + j];
        inv[i * m + j] -= f * inv[c * m + j];
      }
    }
  }
  ginv_ = Tensor(m, 2, nvars_, degree);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) ginv_(i, j) = 0.5 * (inv[i * m + j] + inv[j * m + i]);
}

const std::vector<Jet>& LocalGeometry::christoffel() const {
  if (!gamma_.empty()) return gamma_;
  const int m = dim_;
  const int deg = g_.degree();
  if (deg < 1) throw DegreeError("degree exhausted: Christoffel symbols need metric degree >= 1");
  // dg[(l*m + i)*m + j] = ∂_l g_ij
  std::vector<Jet> dg;
  dg.reserve(static_cast<std::size_t>(m) * m * m);
  for (int l = 0; l < m; ++l)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) dg.push_back(g_(i, j).partial(l));
  auto D = [&](int l, int i, int j) -> const Jet& { return dg[(l * m + i) * m + j]; };
  // first kind Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
  std::vector<Jet> first(static_cast<std::size_t>(m) * m * m, Jet(nvars_, deg - 1));
  for (int l = 0; l < m; ++l)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        Jet v = D(i, j, l) + D(j, i, l) - D(l, i, j);
        v *= 0.5;
        first[(l * m + i) * m + j] = v;
        first[(l * m + j) * m + i] = v;
      }
  gamma_.assign(static_cast<std::size_t>(m) * m * m, Jet(nvars_, deg - 1));
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        Jet s(nvars_, deg - 1);
        for (int l = 0; l < m; ++l) s.fma(ginv_(k, l), first[(l * m + i) * m + j]);
        gamma_[(k * m + i) * m + j] = s;
        gamma_[(k * m + j) * m + i] = s;
      }
  return gamma_;
}

Tensor LocalGeometry::d(const Jet& f) const {
  Tensor out(dim_, 1, nvars_, 0);
  for (int i = 0; i < dim_; ++i) out[i] = f.partial(i);
  return out;
}

Tensor LocalGeometry::covariant_derivative(const Tensor& t) const {
  const int m = dim_;
  const int r = t.rank();
  if (t.dim() != m) throw GeometryError("tensor dimension does not match the metric");
  if (r == 0) return d(t[0]);
  const auto& gamma = christoffel();
  std::vector<Jet> neg_gamma;
  neg_gamma.reserve(gamma.size());
  for (const Jet& g : gamma) neg_gamma.push_back(-g);

  const std::size_t block = t.size();  // m^r
  Tensor out(m, r + 1, nvars_, 0);
  std::vector<std::size_t> stride(r);
  for (int p = 0; p < r; ++p) stride[p] = ipow(m, r - 1 - p);
  for (int c = 0; c < m; ++c) {
    for (std::size_t rest = 0; rest < block; ++rest) {
      Jet v = t[rest].partial(c);
      for (int p = 0; p < r; ++p) {
        const int ap = static_cast<int>((rest / stride[p]) % m);
        const std::size_t base = rest - ap * stride[p];
        for (int e = 0; e < m; ++e)
          v.fma(neg_gamma[(static_cast<std::size_t>(e) * m + c) * m + ap], t[base + e * stride[p]]);
      }
      out[c * block + rest] = std::move(v);
    }
  }
  return out;
}

Tensor LocalGeometry::divergence(const Tensor& t) const {
  const int m = dim_;
  const int r = t.rank();
  if (r < 1) throw GeometryError("divergence needs a tensor of rank >= 1");
  const Tensor nt = covariant_derivative(t);
  const std::size_t tail = ipow(m, r - 1);
  Tensor out(m, r - 1, nvars_, 0);
  const int deg = nt.degree();
  for (std::size_t k = 0; k < tail; ++k) {
    Jet s(nvars_, deg);
    for (int c = 0; c < m; ++c)
      for (int a = 0; a < m; ++a) s.fma(ginv_(c, a), nt[(c * m + a) * tail + k]);
    out[k] = std::move(s);
  }
  return out;
}

Jet LocalGeometry::divergence_scalar(const Tensor& one_form) const {
  if (one_form.rank() != 1) throw GeometryError("divergence_scalar needs a 1-form");
  return divergence(one_form)[0];
}

Tensor LocalGeometry::hessian(const Jet& f) const {
  Tensor t(dim_, 0, nvars_, f.degree());
  t[0] = f;
  return covariant_derivative(covariant_derivative(t));
}

Jet LocalGeometry::laplacian(const Jet& f) const { return trace(hessian(f)); }

Jet LocalGeometry::trace(const Tensor& two) const {
  if (two.rank() != 2) throw GeometryError("trace needs a rank-2 tensor");
  Jet s(nvars_, std::min(two.degree(), ginv_.degree()));
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) s.fma(ginv_(i, j), two(i, j));
  return s;
}

Jet LocalGeometry::inner(const Tensor& a, const Tensor& b) const {
  if (a.rank() != b.rank() || a.dim() != b.dim())
    throw GeometryError("inner product of tensors with different shapes");
  const int m = dim_;
  const int r = b.rank();
  Tensor raised = b;
  for (int p = 0; p < r; ++p) {
    const std::size_t stride = ipow(m, r - 1 - p);
    Tensor next(m, r, nvars_, 0);
    const int deg = std::min(raised.degree(), ginv_.degree());
    for (std::size_t k = 0; k < raised.size(); ++k) {
      const int ip = static_cast<int>((k / stride) % m);
      const std::size_t base = k - ip * stride;
      Jet s(nvars_, deg);
      for (int j = 0; j < m; ++j) s.fma(ginv_(ip, j), raised[base + j * stride]);
      next[k] = std::move(s);
    }
    raised = std::move(next);
  }
  Jet s(nvars_, std::min(a.degree(), raised.degree()));
  for (std::size_t k = 0; k < a.size(); ++k) s.fma(a[k], raised[k]);
  return s;
}

Tensor LocalGeometry::compose(const Tensor& a, const Tensor& b) const {
  if (a.rank() != 2 || b.rank() != 2) throw GeometryError("compose needs rank-2 tensors");
  const int m = dim_;
  // (g^{-1} b)^k_j first, then contract with a.
  Tensor mixed(m, 2, nvars_, 0);
  const int bdeg = std::min(b.degree(), ginv_.degree());
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j) {
      Jet s(nvars_, bdeg);
      for (int l = 0; l < m; ++l) s.fma(ginv_(k, l), b(l, j));
      mixed(k, j) = std::move(s);
    }
  Tensor out(m, 2, nvars_, 0);
  const int adeg = std::min(a.degree(), mixed.degree());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Jet s(nvars_, adeg);
      for (int k = 0; k < m; ++k) s.fma(a(i, k), mixed(k, j));
      out(i, j) = std::move(s);
    }
  return out;
}

Tensor LocalGeometry::apply(const Tensor& two, const Tensor& one_form) const {
  if (two.rank() != 2 || one_form.rank() != 1) throw GeometryError("apply needs (2-tensor, 1-form)");
  const int m = dim_;
  Tensor raised(m, 1, nvars_, 0);
  const int odeg = std::min(one_form.degree(), ginv_.degree());
  for (int j = 0; j < m; ++j) {
    Jet s(nvars_, odeg);
    for (int k = 0; k < m; ++k) s.fma(ginv_(j, k), one_form[k]);
    raised[j] = std::move(s);
  }
  Tensor out(m, 1, nvars_, 0);
  const int tdeg = std::min(two.degree(), raised.degree());
  for (int i = 0; i < m; ++i) {
    Jet s(nvars_, tdeg);
    for (int j = 0; j < m; ++j) s.fma(two(i, j), raised[j]);
    out[i] = std::move(s);
  }
  return out;
}

Jet LocalGeometry::div_apply(const Tensor& two, const Jet& f) const {
  return divergence_scalar(apply(two, d(f)));
}

}  // namespace exq
