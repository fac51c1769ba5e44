#pragma once

// Truncated multivariate Taylor series ("jets").
//
// A Jet stores the Taylor coefficients of a scalar function of `nvars`
// variables about a base point, for all multi-indices |α| <= degree, in
// graded-lexicographic order. Arithmetic truncates at the smaller operand
// degree; differentiation lowers the degree by one. A jet of degree zero has
// no derivative information left and any further differentiation raises a
// DegreeError.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exq/errors.hpp"

namespace exq {

inline constexpr int kMaxJetVars = 6;
inline constexpr int kMaxJetDegree = 8;

using MultiIndex = std::array<std::uint8_t, kMaxJetVars>;

/// Multi-index bookkeeping for one variable count, shared by all jets with
/// that variable count. Built once on first use and never freed.
class JetLayout {
 public:
  struct MulTerm {
    std::uint16_t lhs, rhs, out;
  };
  struct ShiftTerm {
    std::uint16_t src;
    double factor;
  };

  static const JetLayout& get(int nvars);

  int nvars() const { return nvars_; }
  /// Number of multi-indices with |α| <= degree.
  std::size_t size(int degree) const { return count_upto_[degree]; }
  const MultiIndex& alpha(std::size_t k) const { return alpha_[k]; }
  int order(std::size_t k) const { return order_[k]; }
  /// Position of α in the coefficient array; -1 if |α| > kMaxJetDegree.
  long index(const MultiIndex& a) const;

  /// Product terms whose output has total order <= degree.
  std::span<const MulTerm> mul_terms(int degree) const {
    return {mul_.data(), mul_upto_[degree]};
  }
  /// For ∂/∂x_var: output slot k (order <= degree-1) reads slot src * factor.
  std::span<const ShiftTerm> shift_terms(int var, int degree) const {
    return {shift_[var].data(), count_upto_[degree - 1]};
  }
  /// Slot k = parent(k) + e_{var(k)}; used to build monomials incrementally.
  std::size_t parent(std::size_t k) const { return parent_[k]; }
  int parent_var(std::size_t k) const { return parent_var_[k]; }

 private:
  explicit JetLayout(int nvars);

  int nvars_;
  std::vector<MultiIndex> alpha_;
  std::vector<int> order_;
  std::vector<std::size_t> count_upto_;
  std::vector<long> lookup_;
  std::vector<MulTerm> mul_;
  std::vector<std::size_t> mul_upto_;
  std::vector<std::vector<ShiftTerm>> shift_;
  std::vector<std::size_t> parent_;
  std::vector<int> parent_var_;
};

class Jet {
 public:
  /// Zero jet.
  Jet(int nvars, int degree);

  static Jet constant(double c, int nvars, int degree);
  /// Jet of the coordinate function x_i at base value x0.
  static Jet seed_variable(int i, double x0, int nvars, int degree);

  int nvars() const { return layout_->nvars(); }
  int degree() const { return degree_; }
  double value() const { return c_[0]; }
  std::span<const double> coeffs() const { return c_; }
  std::span<double> coeffs() { return c_; }
  const JetLayout& layout() const { return *layout_; }

  /// Raw Taylor coefficient of x^α (zero-padded multi-index).
  double coeff(std::span<const int> alpha) const;
  /// ∂^α at the base point: α! times the Taylor coefficient.
  double derivative(std::span<const int> alpha) const;

  Jet partial(int i) const;
  Jet truncated(int degree) const;
  /// Same jet with the constant term removed.
  Jet without_constant() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator+=(double c) {
    c_[0] += c;
    return *this;
  }
  Jet& operator-=(double c) {
    c_[0] -= c;
    return *this;
  }
  Jet& operator*=(double c);

  /// this += a * b, truncated at min(degree(), a.degree(), b.degree()).
  void fma(const Jet& a, const Jet& b);
  /// this += s * a (scalar axpy), degree min(this, a).
  void axpy(double s, const Jet& a);

  friend Jet operator-(Jet a);
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator+(Jet a, double c) { return a += c; }
  friend Jet operator+(double c, Jet a) { return a += c; }
  friend Jet operator-(Jet a, double c) { return a -= c; }
  friend Jet operator-(double c, Jet a);
  friend Jet operator*(Jet a, double c) { return a *= c; }
  friend Jet operator*(double c, Jet a) { return a *= c; }
  friend Jet operator/(Jet a, double c) { return a *= 1.0 / c; }
  friend Jet operator/(double c, const Jet& a);

 private:
  Jet(const JetLayout* layout, int degree);
  void set_degree(int degree);

  const JetLayout* layout_;
  int degree_;
  std::vector<double> c_;
};

Jet reciprocal(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet sqrt(const Jet& a);
/// Integer power by repeated multiplication; any base, negative powers need a
/// nonzero constant term.
Jet powi(const Jet& a, int n);
/// Real power; requires a positive constant term.
Jet powf(const Jet& a, double p);

/// Taylor coefficients of outer(inner(x)) where `outer` is expanded about the
/// constant terms of `inner`. Monomials of the shifted inner jets are built
/// once and reused for every outer jet.
class Composition {
 public:
  Composition(std::span<const Jet> inner, int max_outer_degree);
  /// Result degree is min(outer.degree(), inner degree).
  Jet operator()(const Jet& outer) const;
  /// Variable count of the outer jets (number of inner jets).
  int outer_nvars() const { return outer_nvars_; }
  /// Variable count of the inner jets and of every result.
  int result_nvars() const { return result_nvars_; }
  std::span<const double> base() const { return base_; }

 private:
  int outer_nvars_;
  int result_nvars_;
  int inner_degree_;
  std::vector<double> base_;
  std::vector<Jet> monomials_;
};

}  // namespace exq
