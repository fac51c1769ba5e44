#pragma once

// Conformally covariant operators and curvature quantities.
//
// Each quantity exists twice: a pointwise form taking an already built
// geometry context and jets, and a field form returning a ScalarField that
// builds the context it needs on demand. Field forms request the smallest
// jet degree that still yields the requested output degree, and refuse to
// exceed the configured degree cap.

#include <array>
#include <string>
#include <string_view>

#include "exq/hypersurface.hpp"

namespace exq {

struct OperatorSettings {
  /// Coefficient of |ρ|² in Q₄.
  double c_rho = 2.0;
  /// Coefficient of Δ(|L̊|²) in 𝒞. Only +½ makes 𝒞 pointwise invariant;
  /// −½ is kept for auditing.
  double c_lap = 0.5;
  /// Largest |L̊_ij| accepted by the umbilic-only formulas.
  double umbilic_tol = 1e-9;
  /// Highest jet degree any single evaluation may build.
  int degree_cap = 6;
};

// ---- pointwise intrinsic ---------------------------------------------------

Jet p2(const LocalGeometry& g, const Curvature& c, const Jet& f);
Jet q2(const Curvature& c);
Jet p4(const LocalGeometry& g, const Curvature& c, const Jet& f, double c_rho);
Jet q4(const LocalGeometry& g, const Curvature& c, double c_rho);

/// δδT for a symmetric 2-tensor.
Jet div_div(const LocalGeometry& g, const Tensor& t);

// ---- pointwise extrinsic ---------------------------------------------------

Jet ext_p2(const ExtrinsicContext& e, const Jet& f);
Jet ext_q2(const ExtrinsicContext& e);
Jet ext_p3(const ExtrinsicContext& e, const Jet& f);
Jet ext_q3(const ExtrinsicContext& e);
/// Throws NonUmbilicError when max|L̊_ij| exceeds `umbilic_tol`.
Jet ext_p4_umbilic(const ExtrinsicContext& e, const Jet& f, const OperatorSettings& s);
Jet ext_q4_umbilic(const ExtrinsicContext& e, const OperatorSettings& s);
/// n = 4 only; any L̊.
Jet ext_p4_critical(const ExtrinsicContext& e, const Jet& f);
Jet c_invariant(const ExtrinsicContext& e, double c_lap);
std::array<Jet, 3> q4_total_integrand(const ExtrinsicContext& e);
Jet i2_integrand(const ExtrinsicContext& e);
Jet i3_integrand(const ExtrinsicContext& e);
Jet lemma_simple_residual(const ExtrinsicContext& e, const OperatorSettings& s);
/// |L̊|⁴, tr L̊⁴, (L̊², 𝒲), |𝒲|², |W|².
std::array<Jet, 5> quartic_invariants(const ExtrinsicContext& e);

void require_umbilic(const ExtrinsicContext& e, double tol);

// ---- catalog ----------------------------------------------------------------

enum class Op {
  P2,
  Q2,
  P4,
  Q4,
  ExtP2,
  ExtQ2,
  ExtP3,
  ExtQ3,
  ExtP4Umbilic,
  ExtQ4Umbilic,
  ExtP4Critical,
  CInvariant,
  I1,
  I2,
  I3,
  /// I₁ + I₂ + I₃ from one context.
  Q4Total,
  LemmaSimple,
  L0Norm4,
  TrL0Fourth,
  L0SqWeyl,
  WeylSliceNorm2,
  WeylNorm2,
  DivDivWeylSlice,
  DivDivL0Sq,
  LapL0Norm2,
  ScalarOne,
};

struct OpInfo {
  Op op;
  std::string_view name;
  bool extrinsic;
  bool takes_function;
  /// Derivative order N; 0 for plain curvature scalars.
  int order;
  /// Jet degree beyond the output degree needed by one evaluation.
  int margin;
  /// Smallest and largest admissible hypersurface / manifold dimension.
  int min_n, max_n;
  bool umbilic_only;
};

const std::vector<OpInfo>& operator_catalog();
const OpInfo& op_info(Op op);
/// Throws ConfigError for unknown names.
const OpInfo& op_info(std::string_view name);

/// Conformal bidegree (a, b): e^{aφ} P(ĝ)(f) = P(g)(e^{bφ} f).
struct OperatorSpec {
  Op op;
  double a, b;
};
OperatorSpec operator_spec(Op op, int n);

/// e^{wφ} Q(ĝ) = Q(g) + sign · P(g)(φ) in the critical dimension.
struct QSpec {
  Op q;
  Op p;
  int weight;
  int sign;
};
QSpec q_spec(Op q);

/// Field form of an intrinsic quantity on (M, g). `f` is ignored by scalars.
ScalarField intrinsic_field(Op op, const Metric& g, const ScalarField& f, const OperatorSettings& s);
/// Field form of an extrinsic quantity; `f` lives on the surface chart.
ScalarField extrinsic_field(Op op, const Embedding& e, const ScalarField& f, const OperatorSettings& s);

}  // namespace exq
