#pragma once

// Identity-check harness. Every law becomes one or more CheckResults.
//
// Pointwise laws are sampled at random chart points for a few random
// (φ, f) pairs; integral laws use the tensor-product quadrature. Each check
// draws from its own generator seeded by (seed, scenario, check name), so a
// result does not depend on which other checks ran or in which order.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "exq/operators.hpp"
#include "exq/quadrature.hpp"
#include "exq/scenario.hpp"

namespace exq {

enum class Suite { Intrinsic, Extrinsic, Integral, Structural, Audit };

const char* suite_name(Suite s);
/// "all" or a comma-separated list of suite names. Throws ConfigError.
std::vector<Suite> parse_suites(std::string_view text);
std::string suites_text(const std::vector<Suite>& s);

struct Tolerances {
  double pointwise = 1e-7;
  double integral = 1e-5;
  double control = 1e-12;
  /// Umbilic reductions and P(1) = 0.
  double reduction = 1e-10;
  /// Trace, Bianchi and Weyl-trace residuals.
  double structural = 1e-9;
  /// Weight checks and the umbilic lemma residual.
  double weight = 1e-8;
  double gauss_bonnet = 1e-6;
  /// Global invariant on umbilic scenarios.
  double global_umbilic = 1e-6;
  double divergence = 1e-7;
  double self_adjoint = 1e-7;
  /// Smallest relative size accepted as "nonzero".
  double nonzero = 1e-3;
  /// Smallest failure margin accepted from a rejected variant.
  double audit = 1e-3;
};

struct VerifyOptions {
  /// Jet degree cap for every evaluation.
  int degree = 6;
  NodeCounts nodes;
  Tolerances tol;
  std::uint64_t seed = 1;
  /// Sample points per random (φ, f) pair.
  int points = 20;
  int pairs = 3;
  /// Workers for independent checks; 0 means hardware concurrency.
  int threads = 0;
  OperatorSettings ops;

  OperatorSettings settings() const;
};

struct CheckResult {
  std::string check;
  std::string scenario;
  std::size_t samples = 0;
  double max_abs = 0.0;
  double scale = 1.0;
  double rel = 0.0;
  double tol = 0.0;
  bool pass = false;
  /// Audit and nonzero checks pass when rel exceeds tol instead.
  bool expect_above = false;
  std::uint64_t seed = 0;
  std::string detail;
};

/// Running max of |lhs − rhs| and of max(1, |lhs|, |rhs|).
class ErrorAccumulator {
 public:
  void add(double lhs, double rhs);
  /// Adds a residual whose natural size is `size`.
  void add_residual(double residual, double size);
  void merge(const ErrorAccumulator& o);
  std::size_t samples() const { return samples_; }
  double max_abs() const { return max_abs_; }
  double scale() const { return scale_; }

 private:
  std::size_t samples_ = 0;
  double max_abs_ = 0.0;
  double scale_ = 1.0;
};

/// rel = max_abs / scale; NaN never passes.
CheckResult finish_check(std::string check, std::string scenario, const ErrorAccumulator& acc, double tol,
                         bool expect_above = false);

/// Deterministic per-check randomness.
class Sampler {
 public:
  Sampler(std::uint64_t seed, std::string_view scenario, std::string_view check);
  std::uint64_t seed() const { return seed_; }
  /// Uniform point on the chart, keeping 0.3 away from polar ends and the
  /// outer quarters of intervals.
  std::vector<double> point(const Chart& c);
  std::vector<std::vector<double>> points(const Chart& c, int k);
  /// Up to `terms` distinct features with coefficients uniform in
  /// [−amplitude, amplitude], plus a constant when `constant` is set.
  Expr field(const std::vector<Expr>& features, int terms, double amplitude, bool constant);

 private:
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

/// Stable 64-bit hash used to derive per-check seeds.
std::uint64_t stable_hash(std::string_view s);

using Points = std::vector<std::vector<double>>;

// ---- explicit checks --------------------------------------------------------
// φ lives on the manifold chart for intrinsic scenarios and on the ambient
// chart for embedded ones; f always lives on the manifold chart.

/// e^{aφ} P(ĝ)(f) against P(g)(e^{bφ} f).
ErrorAccumulator covariance_errors(Op op, const Scenario& sc, const Expr& phi, const Expr& f, const Points& pts,
                                   const OperatorSettings& s);
/// e^{wφ} Q(ĝ) against Q(g) + sign · P(g)(φ).
ErrorAccumulator q_law_errors(Op q, const Scenario& sc, const Expr& phi, const Points& pts,
                              const OperatorSettings& s);
/// e^{wφ} X(ĝ) against X(g) for a scalar of conformal weight −w.
ErrorAccumulator weight_errors(Op op, double w, const Scenario& sc, const Expr& phi, const Points& pts,
                               const OperatorSettings& s);

struct IntegralPair {
  double lhs = 0.0, rhs = 0.0, scale = 1.0;
  std::size_t nodes = 0;
};
/// ∫(I₁ + I₂ + I₃) for g and for e^{2φ}g.
IntegralPair global_invariant(const Scenario& sc, const Expr& phi, const NodeCounts& nodes, int threads = 1);
/// ∫Q₄ + ¼∫|W|² against 8π²χ; embedded scenarios use the induced metric.
IntegralPair gauss_bonnet(const Scenario& sc, const NodeCounts& nodes, double c_rho, int threads = 1);

// ---- planning and running ---------------------------------------------------

struct PlannedCheck {
  std::string scenario;
  Suite suite;
  /// Names of the results this task produces, in order.
  std::vector<std::string> names;
  std::function<std::vector<CheckResult>()> run;
};

/// Every check that applies to the scenario within the selected suites.
std::vector<PlannedCheck> plan_checks(const Scenario& sc, const std::vector<Suite>& suites,
                                      const VerifyOptions& opt);

struct ScenarioResults {
  std::string name;
  std::string description;
  std::vector<CheckResult> checks;
};

using ResultCallback = std::function<void(const CheckResult&)>;

/// Runs all planned checks on a worker pool; results keep plan order.
/// Errors inside a check propagate.
std::vector<ScenarioResults> run_checks(const std::vector<Scenario>& scenarios, const std::vector<Suite>& suites,
                                        const VerifyOptions& opt, const ResultCallback& progress = {});

bool all_pass(const std::vector<ScenarioResults>& r);

}  // namespace exq
