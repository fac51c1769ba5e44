#pragma once

// Charts, scalar and metric fields, and the covariant calculus at a point.
//
// Sign conventions used everywhere downstream:
//   δω   = g^{ij} ∇_i ω_j          (trace of ∇, no minus sign)
//   Δf   = δ(df) = g^{ij} ∇_i ∇_j f (non-positive Laplacian)
// Tensors are stored with all indices covariant.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exq/expr.hpp"
#include "exq/jet.hpp"

namespace exq {

struct Axis {
  enum class Kind {
    Periodic,  // [lo, hi) identified at the ends
    Polar,     // polar angle in (0, π); the sphere measure lives in det g
    Interval,  // open interval, not closed
  };
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  Kind kind = Kind::Interval;
  int nodes = 0;  // quadrature hint; 0 means the global default
};

const char* axis_kind_name(Axis::Kind k);

class Chart {
 public:
  Chart() = default;
  explicit Chart(std::vector<Axis> axes);

  int dim() const { return static_cast<int>(axes_.size()); }
  const std::vector<Axis>& axes() const { return axes_; }
  const std::vector<std::string>& names() const { return names_; }
  /// Every axis is periodic or polar, so integrals over the chart are
  /// integrals over a closed manifold.
  bool closed() const;
  bool contains(std::span<const double> x) const;
  /// Coordinate jets at x.
  std::vector<Jet> seed(std::span<const double> x, int degree) const;

 private:
  std::vector<Axis> axes_;
  std::vector<std::string> names_;
};

/// Scalar function on a chart, evaluated to a jet in the chart variables.
class ScalarField {
 public:
  using Fn = std::function<Jet(std::span<const double>, int)>;

  ScalarField() = default;
  ScalarField(int dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {}

  static ScalarField from_expr(const Chart& chart, const Expr& e);
  static ScalarField constant(int dim, double c);

  int dim() const { return dim_; }
  Jet operator()(std::span<const double> x, int degree) const { return fn_(x, degree); }

 private:
  int dim_ = 0;
  Fn fn_;
};

ScalarField operator*(const ScalarField& a, const ScalarField& b);
/// x ↦ exp(s·φ(x)).
ScalarField exp_scaled(const ScalarField& phi, double s);

/// Riemannian metric on a chart; evaluates to a row-major m×m jet matrix.
class Metric {
 public:
  using Fn = std::function<std::vector<Jet>(std::span<const double>, int)>;

  Metric() = default;
  Metric(Chart chart, Fn fn) : chart_(std::move(chart)), fn_(std::move(fn)) {}

  /// Components must be given as a full symmetric matrix; entries (i,j) and
  /// (j,i) must print identically.
  static Metric from_expressions(const Chart& chart, const std::vector<std::vector<Expr>>& g);
  static Metric euclidean(const Chart& chart);

  const Chart& chart() const { return chart_; }
  int dim() const { return chart_.dim(); }
  std::vector<Jet> jets(std::span<const double> x, int degree) const { return fn_(x, degree); }

 private:
  Chart chart_;
  Fn fn_;
};

/// g ↦ e^{2φ} g.
Metric conformal_rescale(const Metric& g, const ScalarField& phi);

/// Tensor of jets with all indices covariant, row-major components.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int dim, int rank, int nvars, int degree);

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  std::size_t size() const { return c_.size(); }
  /// Minimum degree over all components.
  int degree() const;

  Jet& operator[](std::size_t k) { return c_[k]; }
  const Jet& operator[](std::size_t k) const { return c_[k]; }

  template <typename... I>
  Jet& operator()(I... idx) {
    return c_[flat(idx...)];
  }
  template <typename... I>
  const Jet& operator()(I... idx) const {
    return c_[flat(idx...)];
  }

  Tensor& operator+=(const Tensor& o);
  Tensor& operator-=(const Tensor& o);
  Tensor& operator*=(double s);
  /// Componentwise product with a scalar jet.
  Tensor& operator*=(const Jet& s);
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, double s) { return a *= s; }
  friend Tensor operator*(double s, Tensor a) { return a *= s; }
  friend Tensor operator*(Tensor a, const Jet& s) { return a *= s; }
  friend Tensor operator*(const Jet& s, Tensor a) { return a *= s; }

  /// Largest |constant term| over components.
  double max_abs_value() const;
  /// Constant terms, row-major.
  std::vector<double> values() const;

 private:
  template <typename... I>
  std::size_t flat(I... idx) const {
    std::size_t k = 0;
    ((k = k * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(idx)), ...);
    return k;
  }

  int dim_ = 0;
  int rank_ = 0;
  std::vector<Jet> c_;
};

/// One metric at one point: inverse, volume density, Christoffel symbols and
/// the first-order covariant calculus. Jets are in the chart variables, so the
/// variable count equals the dimension. Lazily caches; not for concurrent use
/// (build one per evaluation).
class LocalGeometry {
 public:
  /// Takes row-major metric jets; throws GeometryError unless every leading
  /// principal minor of the constant-term matrix exceeds 1e-12.
  LocalGeometry(std::vector<Jet> g, int dim, std::span<const double> where = {});

  int dim() const { return dim_; }
  const Tensor& metric() const { return g_; }
  /// g^{ij}, stored in a rank-2 Tensor.
  const Tensor& inverse() const { return ginv_; }
  const Jet& det() const { return det_; }
  Jet volume_density() const { return sqrt(det_); }

  /// Γ^k_{ij} at flat index (k*m + i)*m + j.
  const std::vector<Jet>& christoffel() const;
  const Jet& christoffel(int k, int i, int j) const {
    return christoffel()[(static_cast<std::size_t>(k) * dim_ + i) * dim_ + j];
  }

  Tensor d(const Jet& f) const;
  /// (∇T)_{c a1..ar}; new index first.
  Tensor covariant_derivative(const Tensor& t) const;
  /// Trace of ∇ over the new index and the first index of T.
  Tensor divergence(const Tensor& t) const;
  Jet divergence_scalar(const Tensor& one_form) const;
  Jet laplacian(const Jet& f) const;
  Tensor hessian(const Jet& f) const;

  /// Full contraction with g^{..} on every index pair.
  Jet inner(const Tensor& a, const Tensor& b) const;
  Jet norm2(const Tensor& a) const { return inner(a, a); }
  Jet trace(const Tensor& two) const;
  /// (A∘B)_{ij} = A_{ik} g^{kl} B_{lj}.
  Tensor compose(const Tensor& a, const Tensor& b) const;
  /// (T ω)_i = T_{ij} g^{jk} ω_k.
  Tensor apply(const Tensor& two, const Tensor& one_form) const;
  /// δ(T df) for a symmetric 2-tensor T.
  Jet div_apply(const Tensor& two, const Jet& f) const;

 private:
  int dim_;
  int nvars_;
  Tensor g_;
  Tensor ginv_;
  Jet det_;
  mutable std::vector<Jet> gamma_;  // filled on first use
};

/// Leading principal minors of a row-major symmetric matrix.
std::vector<double> leading_minors(std::span<const double> a, int m);

}  // namespace exq
