#pragma once

// Hypersurface geometry of ι: M^n → (X^{n+1}, ḡ).
//
// All ambient quantities are computed as jets in ambient coordinates at ι(x),
// composed with ι into surface-coordinate jets, and then contracted with the
// unit normal ν and the tangent frame dι(∂_i). The "0" slot of the usual
// notation is ν.
//
//   L_ij = ḡ(∇̄_i ν, ∂_j ι),  H = tr_h L / n,  L̊ = L − H h
//   𝒲_ij = W̄(ν, ∂_i, ν, ∂_j)  in the R_{abcd} convention of curvature.hpp, so
//          that the corresponding R̄_{0ij0} is positive on round spheres.

#include <array>
#include <memory>
#include <optional>

#include "exq/curvature.hpp"

namespace exq {

struct Embedding {
  Chart surface;
  Metric ambient;
  /// ι^a as expressions in the surface variables, one per ambient coordinate.
  std::vector<Expr> iota;
  /// +1 keeps the cofactor normal det[∂_1ι, …, ∂_nι, ·] raised by ḡ; −1 flips it.
  int orientation = 1;

  int n() const { return surface.dim(); }
  /// Throws ConfigError unless the maps validate and dimensions match.
  void validate() const;
  /// Same embedding with ambient metric e^{2φ} ḡ.
  Embedding rescaled(const ScalarField& ambient_phi) const;
  Embedding flipped() const;
};

/// h = ι*ḡ as a metric on the surface chart.
Metric induced_metric(const Embedding& e);

/// Surface jets of ι*φ for an ambient field φ.
ScalarField pullback(const Embedding& e, const ScalarField& ambient_field);

/// Index bookkeeping for 4-tensors with T_abcd = −T_bacd = −T_abdc = T_cdab:
/// antisymmetric pairs (a < b) are numbered, and a component is stored once
/// per unordered pair of pairs.
class CurvaturePairs {
 public:
  explicit CurvaturePairs(int dim);
  int npairs() const { return static_cast<int>(pairs_.size()); }
  int ncanon() const { return npairs() * (npairs() + 1) / 2; }
  /// Pair number of {a, b}, a != b.
  int pair(int a, int b) const { return pair_[a * dim_ + b]; }
  int sign(int a, int b) const { return a < b ? 1 : -1; }
  int canon(int P, int Q) const {
    if (P > Q) std::swap(P, Q);
    return P * npairs() - P * (P - 1) / 2 + (Q - P);
  }
  /// (a, p, b, q) of a canonical component, a < p, b < q.
  std::array<int, 4> indices(int k) const { return canon_[k]; }

 private:
  int dim_;
  std::vector<int> pair_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<std::array<int, 4>> canon_;
};

/// Everything about the embedding at one surface point. `degree` is the jet
/// degree of ι; the induced metric carries degree − 1, L carries degree − 2.
/// Ambient tensors are expanded to degree − 1 in ambient coordinates.
class ExtrinsicContext {
 public:
  ExtrinsicContext(const Embedding& e, std::span<const double> x, int degree);
  ExtrinsicContext(const ExtrinsicContext&) = delete;
  ExtrinsicContext& operator=(const ExtrinsicContext&) = delete;

  int n() const { return n_; }
  std::span<const double> point() const { return x_; }
  std::span<const double> ambient_point() const { return y0_; }
  int degree() const { return degree_; }

  /// Surface coordinate jets at x (degree of ι).
  const std::vector<Jet>& coords() const { return xj_; }
  const std::vector<Jet>& iota() const { return iota_; }
  /// ∂_i ι^a at [i*(n+1) + a].
  const std::vector<Jet>& tangent() const { return tangent_; }
  /// Unit normal ν^a and its ḡ-dual ν_a.
  const std::vector<Jet>& normal() const { return nu_; }
  const std::vector<Jet>& conormal() const { return nu_low_; }

  const LocalGeometry& surface() const { return *surf_; }
  const Curvature& surface_curvature() const { return *surf_curv_; }
  const LocalGeometry& ambient() const { return *amb_; }
  const Curvature& ambient_curvature() const { return *amb_curv_; }
  /// Composes an ambient jet (ambient variables, base ι(x)) into surface jets.
  Jet compose(const Jet& ambient_jet) const { return (*comp_)(ambient_jet); }
  Tensor compose(const Tensor& ambient_tensor) const;

  const Tensor& h() const { return surface().metric(); }
  const Tensor& L() const;
  const Jet& H() const;
  const Tensor& L0() const;  // L̊
  /// L̊² = L̊ ∘ L̊ through h.
  const Tensor& L0_squared() const;
  /// ι*ρ̄.
  const Tensor& rho_bar_tangent() const;
  const Jet& rho_bar_00() const;
  /// ρ̄(ν, ∂_i).
  const Tensor& rho_bar_0() const;
  const Tensor& fialkow() const;
  /// 𝒲_ij; exact zero when the ambient dimension is 3.
  const Tensor& weyl_slice() const;
  /// Ḡ_ij = R̄_{0ij0}.
  const Tensor& G_bar() const;
  /// (∇̄_ν ρ̄)(∂_i, ∂_j).
  const Tensor& nabla0_rho_bar() const;
  /// (∇̄_ν ρ̄)(ν, ∂_i).
  const Tensor& nabla0_rho_bar_0() const;
  /// (∇̄_ν W̄)_{0ij0}.
  const Tensor& nabla0_weyl_0ij0() const;

 private:
  Tensor pull_back2(const Tensor& ambient2) const;
  /// T(ν, ∂_i, ν, ∂_j) for an ambient 4-tensor, composed.
  Tensor normal_slice4(const Tensor& ambient4) const;
  /// Same slice from the independent components of a curvature-type tensor
  /// already composed into surface jets (see CurvaturePairs).
  Tensor slice_canonical(const std::vector<Jet>& c, int degree) const;

  int n_;
  int degree_;
  std::vector<double> x_;
  std::vector<double> y0_;
  std::vector<Jet> xj_, iota_, tangent_, nu_, nu_low_;
  std::unique_ptr<Composition> comp_;
  std::unique_ptr<LocalGeometry> amb_;
  std::unique_ptr<Curvature> amb_curv_;
  std::unique_ptr<LocalGeometry> surf_;
  std::unique_ptr<Curvature> surf_curv_;
  std::vector<Jet> christoffel_bar_;  // composed Γ̄^a_bc

  mutable std::optional<Tensor> L_, L0_, L0sq_, rho_t_, rho_0_, fialkow_, W_, G_, n_rho_, n_rho_0_,
      n_weyl_;
  mutable std::optional<Jet> H_, rho_00_;
};

}  // namespace exq
