#pragma once

// Snapshots of the curvature and hypersurface quantities at one point, as
// plain values. Tensors are row-major with all indices covariant; quantities
// undefined in the given dimension are left empty.

#include <optional>
#include <vector>

#include "exq/hypersurface.hpp"

namespace exq {

struct CurvaturePack {
  int dim = 0;
  std::vector<double> point;
  std::vector<double> metric;
  std::vector<double> riemann;
  std::vector<double> ricci;
  double scal = 0.0;
  double J = 0.0;
  std::vector<double> schouten;  // m >= 3
  std::vector<double> weyl;      // m >= 3
};

CurvaturePack curvature_pack(const Metric& g, std::span<const double> x);

struct ExtrinsicPack {
  int n = 0;
  std::vector<double> point;
  std::vector<double> ambient_point;
  std::vector<double> normal;  // ν^a
  std::vector<double> h;
  std::vector<double> L;
  double H = 0.0;
  std::vector<double> L0;
  std::vector<double> fialkow;  // n >= 3
  std::vector<double> weyl_slice;
  std::vector<double> rho_bar;    // ι*ρ̄
  std::vector<double> rho_bar_0;  // ρ̄(ν, ∂_i)
  double rho_bar_00 = 0.0;
  std::vector<double> G_bar;
  std::vector<double> nabla0_rho_bar;
  std::vector<double> nabla0_rho_bar_0;
  std::vector<double> nabla0_weyl_0ij0;
};

ExtrinsicPack extrinsic_pack(const Embedding& e, std::span<const double> x);

}  // namespace exq
