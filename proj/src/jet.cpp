#include "exq/jet.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>

namespace exq {

namespace {

// Appends all multi-indices of total order `total` in `nvars` variables,
// lexicographically descending in the leading exponent.
void enumerate_order(int nvars, int total, int var, MultiIndex& cur,
                     std::vector<MultiIndex>& out) {
  if (var == nvars - 1) {
    cur[var] = static_cast<std::uint8_t>(total);
    out.push_back(cur);
    cur[var] = 0;
    return;
  }
  for (int e = total; e >= 0; --e) {
    cur[var] = static_cast<std::uint8_t>(e);
    enumerate_order(nvars, total - e, var + 1, cur, out);
  }
  cur[var] = 0;
}

long encode(const MultiIndex& a, int nvars) {
  long code = 0;
  for (int v = 0; v < nvars; ++v) code = code * (kMaxJetDegree + 1) + a[v];
  return code;
}

void check_nvars(int nvars) {
  if (nvars < 1 || nvars > kMaxJetVars)
    throw Error("jet variable count must be in 1.." +
                std::to_string(kMaxJetVars) + ", got " +
                std::to_string(nvars));
}

void check_degree(int degree) {
  if (degree < 0 || degree > kMaxJetDegree)
    throw DegreeError("jet degree must be in 0.." +
                      std::to_string(kMaxJetDegree) + ", got " +
                      std::to_string(degree));
}

}  // namespace

JetLayout::JetLayout(int nvars) : nvars_(nvars) {
  MultiIndex cur{};
  for (int d = 0; d <= kMaxJetDegree; ++d) {
    enumerate_order(nvars, d, 0, cur, alpha_);
    count_upto_.push_back(alpha_.size());
  }
  order_.resize(alpha_.size());
  long codes = 1;
  for (int v = 0; v < nvars; ++v) codes *= kMaxJetDegree + 1;
  lookup_.assign(codes, -1);
  for (std::size_t k = 0; k < alpha_.size(); ++k) {
    int o = 0;
    for (int v = 0; v < nvars; ++v) o += alpha_[k][v];
    order_[k] = o;
    lookup_[encode(alpha_[k], nvars)] = static_cast<long>(k);
  }

  // Product table sorted by output order so truncation is a prefix.
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    const std::size_t jmax = count_upto_[kMaxJetDegree - order_[i]];
    for (std::size_t j = 0; j < jmax; ++j) {
      MultiIndex s{};
      for (int v = 0; v < nvars; ++v) s[v] = alpha_[i][v] + alpha_[j][v];
      mul_.push_back({static_cast<std::uint16_t>(i),
                      static_cast<std::uint16_t>(j),
                      static_cast<std::uint16_t>(index(s))});
    }
  }
  std::stable_sort(mul_.begin(), mul_.end(),
                   [](const MulTerm& a, const MulTerm& b) { return a.out < b.out; });
  mul_upto_.resize(kMaxJetDegree + 1);
  for (int d = 0; d <= kMaxJetDegree; ++d) {
    const std::size_t limit = count_upto_[d];
    mul_upto_[d] = static_cast<std::size_t>(
        std::lower_bound(mul_.begin(), mul_.end(), limit,
                         [](const MulTerm& t, std::size_t lim) { return t.out < lim; }) -
        mul_.begin());
  }

  shift_.resize(nvars);
  for (int v = 0; v < nvars; ++v) {
    const std::size_t n = count_upto_[kMaxJetDegree - 1];
    shift_[v].reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      MultiIndex s = alpha_[k];
      s[v] += 1;
      shift_[v].push_back({static_cast<std::uint16_t>(index(s)),
                           static_cast<double>(alpha_[k][v] + 1)});
    }
  }

  parent_.assign(alpha_.size(), 0);
  parent_var_.assign(alpha_.size(), -1);
  for (std::size_t k = 1; k < alpha_.size(); ++k) {
    int v = 0;
    while (alpha_[k][v] == 0) ++v;
    MultiIndex p = alpha_[k];
    p[v] -= 1;
    parent_[k] = static_cast<std::size_t>(index(p));
    parent_var_[k] = v;
  }
}

long JetLayout::index(const MultiIndex& a) const {
  int o = 0;
  for (int v = 0; v < nvars_; ++v) o += a[v];
  if (o > kMaxJetDegree) return -1;
  return lookup_[encode(a, nvars_)];
}

const JetLayout& JetLayout::get(int nvars) {
  check_nvars(nvars);
  static std::once_flag flags[kMaxJetVars];
  static std::unique_ptr<JetLayout> layouts[kMaxJetVars];
  std::call_once(flags[nvars - 1],
                 [nvars] { layouts[nvars - 1].reset(new JetLayout(nvars)); });
  return *layouts[nvars - 1];
}

Jet::Jet(const JetLayout* layout, int degree)
    : layout_(layout), degree_(degree), c_(layout->size(degree), 0.0) {}

Jet::Jet(int nvars, int degree) : Jet(&JetLayout::get(nvars), (check_degree(degree), degree)) {}

Jet Jet::constant(double c, int nvars, int degree) {
  Jet j(nvars, degree);
  j.c_[0] = c;
  return j;
}

Jet Jet::seed_variable(int i, double x0, int nvars, int degree) {
  check_nvars(nvars);
  if (i < 0 || i >= nvars)
    throw Error("seed_variable: index " + std::to_string(i) +
                " out of range for " + std::to_string(nvars) + " variables");
  if (degree < 1)
    throw DegreeError("seed_variable: degree 0 cannot carry a derivative");
  Jet j(nvars, degree);
  j.c_[0] = x0;
  j.c_[1 + i] = 1.0;
  return j;
}

void Jet::set_degree(int degree) {
  degree_ = degree;
  c_.resize(layout_->size(degree));
}

double Jet::coeff(std::span<const int> alpha) const {
  MultiIndex a{};
  int o = 0;
  for (std::size_t v = 0; v < alpha.size(); ++v) {
    if (static_cast<int>(v) >= nvars()) {
      if (alpha[v] != 0) throw Error("multi-index has more entries than variables");
      continue;
    }
    if (alpha[v] < 0) throw Error("negative multi-index entry");
    a[v] = static_cast<std::uint8_t>(std::min(alpha[v], 255));
    o += alpha[v];
  }
  if (o > degree_)
    throw DegreeError("requested derivative of order " + std::to_string(o) +
                      " from a jet of degree " + std::to_string(degree_));
  return c_[layout_->index(a)];
}

double Jet::derivative(std::span<const int> alpha) const {
  double fact = 1.0;
  for (int e : alpha)
    for (int k = 2; k <= e; ++k) fact *= k;
  return fact * coeff(alpha);
}

Jet Jet::partial(int i) const {
  if (i < 0 || i >= nvars()) throw Error("partial: variable index out of range");
  if (degree_ == 0)
    throw DegreeError("degree exhausted: cannot differentiate a degree-0 jet");
  Jet r(layout_, degree_ - 1);
  const auto terms = layout_->shift_terms(i, degree_);
  for (std::size_t k = 0; k < terms.size(); ++k) r.c_[k] = terms[k].factor * c_[terms[k].src];
  return r;
}

Jet Jet::truncated(int degree) const {
  if (degree > degree_)
    throw DegreeError("cannot raise jet degree from " + std::to_string(degree_) +
                      " to " + std::to_string(degree));
  Jet r = *this;
  r.set_degree(degree);
  return r;
}

Jet Jet::without_constant() const {
  Jet r = *this;
  r.c_[0] = 0.0;
  return r;
}

Jet& Jet::operator+=(const Jet& o) {
  if (o.layout_ != layout_) throw Error("jet variable counts differ");
  if (o.degree_ < degree_) set_degree(o.degree_);
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (o.layout_ != layout_) throw Error("jet variable counts differ");
  if (o.degree_ < degree_) set_degree(o.degree_);
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Jet& Jet::operator*=(double c) {
  for (double& x : c_) x *= c;
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  *this = *this * o;
  return *this;
}

void Jet::fma(const Jet& a, const Jet& b) {
  if (a.layout_ != layout_ || b.layout_ != layout_) throw Error("jet variable counts differ");
  const int d = std::min({degree_, a.degree_, b.degree_});
  if (d < degree_) set_degree(d);
  const double* pa = a.c_.data();
  const double* pb = b.c_.data();
  double* pc = c_.data();
  for (const auto& t : layout_->mul_terms(d)) pc[t.out] += pa[t.lhs] * pb[t.rhs];
}

void Jet::axpy(double s, const Jet& a) {
  if (a.layout_ != layout_) throw Error("jet variable counts differ");
  if (a.degree_ < degree_) set_degree(a.degree_);
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += s * a.c_[k];
}

Jet operator-(Jet a) {
  for (double& x : a.c_) x = -x;
  return a;
}

Jet operator-(double c, Jet a) {
  a = -std::move(a);
  a.c_[0] += c;
  return a;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (a.layout_ != b.layout_) throw Error("jet variable counts differ");
  Jet r(a.layout_, std::min(a.degree_, b.degree_));
  const double* pa = a.c_.data();
  const double* pb = b.c_.data();
  double* pc = r.c_.data();
  for (const auto& t : a.layout_->mul_terms(r.degree_)) pc[t.out] += pa[t.lhs] * pb[t.rhs];
  return r;
}

namespace {

// Σ_k coef[k] u^k by Horner; u must have zero constant term.
Jet horner(const std::vector<double>& coef, const Jet& u) {
  const int d = u.degree();
  Jet r = Jet::constant(coef[d], u.nvars(), d);
  for (int k = d - 1; k >= 0; --k) {
    r = r * u;
    r += coef[k];
  }
  return r;
}

}  // namespace

Jet reciprocal(const Jet& a) {
  const double a0 = a.value();
  if (!(std::abs(a0) > 1e-300))
    throw SingularFieldError("division by a jet with vanishing constant term");
  std::vector<double> coef(a.degree() + 1);
  double p = 1.0 / a0;
  for (int k = 0; k <= a.degree(); ++k) {
    coef[k] = p;
    p *= -1.0 / a0;
  }
  return horner(coef, a.without_constant());
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

Jet operator/(double c, const Jet& a) { return c * reciprocal(a); }

Jet exp(const Jet& a) {
  std::vector<double> coef(a.degree() + 1);
  double e = std::exp(a.value());
  for (int k = 0; k <= a.degree(); ++k) {
    coef[k] = e;
    e /= (k + 1);
  }
  return horner(coef, a.without_constant());
}

Jet log(const Jet& a) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw SingularFieldError("log of a non-positive value");
  std::vector<double> coef(a.degree() + 1);
  coef[0] = std::log(a0);
  double p = 1.0;
  for (int k = 1; k <= a.degree(); ++k) {
    p /= a0;
    coef[k] = ((k % 2) ? 1.0 : -1.0) * p / k;
  }
  return horner(coef, a.without_constant());
}

namespace {

Jet sincos(const Jet& a, bool want_sin) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  // derivatives of sin: sin, cos, -sin, -cos; of cos: cos, -sin, -cos, sin
  const double cyc_sin[4] = {s, c, -s, -c};
  const double cyc_cos[4] = {c, -s, -c, s};
  std::vector<double> coef(a.degree() + 1);
  double fact = 1.0;
  for (int k = 0; k <= a.degree(); ++k) {
    if (k > 0) fact *= k;
    coef[k] = (want_sin ? cyc_sin[k % 4] : cyc_cos[k % 4]) / fact;
  }
  return horner(coef, a.without_constant());
}

}  // namespace

Jet sin(const Jet& a) { return sincos(a, true); }
Jet cos(const Jet& a) { return sincos(a, false); }

Jet powf(const Jet& a, double p) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw SingularFieldError("real power of a non-positive value");
  std::vector<double> coef(a.degree() + 1);
  double binom = 1.0;
  double base = std::pow(a0, p);
  for (int k = 0; k <= a.degree(); ++k) {
    coef[k] = binom * base;
    binom *= (p - k) / (k + 1);
    base /= a0;
  }
  return horner(coef, a.without_constant());
}

Jet sqrt(const Jet& a) {
  if (!(a.value() > 0.0)) throw SingularFieldError("sqrt of a non-positive value");
  return powf(a, 0.5);
}

Jet powi(const Jet& a, int n) {
  if (n < 0) return reciprocal(powi(a, -n));
  Jet result = Jet::constant(1.0, a.nvars(), a.degree());
  Jet base = a;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n) base = base * base;
  }
  return result;
}

Composition::Composition(std::span<const Jet> inner, int max_outer_degree)
    : outer_nvars_(static_cast<int>(inner.size())) {
  if (inner.empty()) throw Error("composition needs at least one inner jet");
  check_nvars(outer_nvars_);
  result_nvars_ = inner[0].nvars();
  inner_degree_ = inner[0].degree();
  for (const Jet& j : inner) {
    if (j.nvars() != result_nvars_) throw Error("inner jets disagree on variable count");
    inner_degree_ = std::min(inner_degree_, j.degree());
  }
  const int d = std::min(max_outer_degree, inner_degree_);
  std::vector<Jet> shifted;
  for (const Jet& j : inner) {
    base_.push_back(j.value());
    shifted.push_back(j.truncated(inner_degree_).without_constant());
  }
  const JetLayout& outer = JetLayout::get(outer_nvars_);
  const std::size_t n = outer.size(std::max(d, 0));
  monomials_.reserve(n);
  monomials_.push_back(Jet::constant(1.0, result_nvars_, inner_degree_));
  for (std::size_t k = 1; k < n; ++k)
    monomials_.push_back(monomials_[outer.parent(k)] * shifted[outer.parent_var(k)]);
}

Jet Composition::operator()(const Jet& outer) const {
  if (outer.nvars() != outer_nvars_) throw Error("outer jet has wrong variable count");
  const int d = std::min(outer.degree(), inner_degree_);
  const std::size_t n = outer.layout().size(d);
  if (n > monomials_.size())
    throw DegreeError("composition basis built for a lower outer degree");
  Jet r(result_nvars_, d);
  const auto c = outer.coeffs();
  for (std::size_t k = 0; k < n; ++k)
    if (c[k] != 0.0) r.axpy(c[k], monomials_[k]);
  return r;
}

}  // namespace exq
