#pragma once

// Intrinsic curvature at a point.
//
// Riemann convention: R_{abcd} = g(R(∂_c, ∂_d) ∂_b, ∂_a) with
// R(X,Y) = [∇_X, ∇_Y] − ∇_[X,Y], so constant curvature K gives
// R_{abcd} = K (g_ac g_bd − g_ad g_bc) and round spheres have R_{abab} > 0.
//   Ric_{bd} = g^{ac} R_{abcd},  scal = tr Ric,  J = scal / (2(m−1)),
//   ρ = (Ric − J g) / (m−2),     W = R − ρ ⊙ g  (Kulkarni–Nomizu).

#include "exq/geometry.hpp"

namespace exq {

class Curvature {
 public:
  explicit Curvature(const LocalGeometry& geo) : geo_(geo) {}

  const LocalGeometry& geometry() const { return geo_; }

  const Tensor& riemann() const;
  const Tensor& ricci() const;
  const Jet& scalar() const;
  const Jet& J() const;
  const Tensor& schouten() const;
  const Tensor& weyl() const;

 private:
  const LocalGeometry& geo_;
  mutable std::optional<Tensor> riemann_, ricci_, schouten_, weyl_;
  mutable std::optional<Jet> scal_, J_;
};

/// ρ ⊙ g, the Kulkarni–Nomizu product of two symmetric 2-tensors:
/// (A ⊙ B)_{abcd} = A_ac B_bd + A_bd B_ac − A_ad B_bc − A_bc B_ad.
Tensor kulkarni_nomizu(const Tensor& a, const Tensor& b);

/// Metric jets plus lazily evaluated curvature for one metric at one point.
class IntrinsicContext {
 public:
  IntrinsicContext(const Metric& g, std::span<const double> x, int degree)
      : x_(x.begin(), x.end()), geo_(g.jets(x, degree), g.dim(), x), curv_(geo_) {}
  IntrinsicContext(const IntrinsicContext&) = delete;
  IntrinsicContext& operator=(const IntrinsicContext&) = delete;

  const LocalGeometry& geo() const { return geo_; }
  const Curvature& curv() const { return curv_; }
  std::span<const double> point() const { return x_; }
  int dim() const { return geo_.dim(); }

 private:
  std::vector<double> x_;
  LocalGeometry geo_;
  Curvature curv_;
};

}  // namespace exq
