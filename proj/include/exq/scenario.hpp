#pragma once

// Test geometries: closed intrinsic manifolds and closed hypersurfaces in
// (n+1)-dimensional ambients, each on a single chart.

#include <optional>
#include <string>
#include <vector>

#include "exq/hypersurface.hpp"

namespace exq {

struct Scenario {
  enum class Kind { Intrinsic, Embedded };

  std::string name;
  std::string description;
  Kind kind = Kind::Intrinsic;
  /// Intrinsic scenarios: the metric. Embedded scenarios: unused.
  Metric metric;
  Embedding embedding;
  std::optional<int> euler;
  bool umbilic = false;
  bool conformally_flat = false;
  /// Riemann tensor vanishes identically (intrinsic scenarios).
  bool flat = false;
  /// Smooth basis functions used to draw random fields on the manifold
  /// (surface chart for embedded scenarios) and on the ambient chart.
  std::vector<Expr> features;
  std::vector<Expr> ambient_features;

  int n() const { return kind == Kind::Intrinsic ? metric.dim() : embedding.n(); }
  bool embedded() const { return kind == Kind::Embedded; }
  const Chart& chart() const { return embedded() ? embedding.surface : metric.chart(); }
  bool closed() const { return chart().closed(); }
};

/// Builds a scenario from a catalog name such as "ROUND_S(4,1)" or
/// "CONF_PERTURBED(SLICE_S2xS2)". Throws ConfigError for unknown names.
Scenario make_scenario(const std::string& name);

struct CatalogEntry {
  std::string pattern;
  std::string summary;
};
const std::vector<CatalogEntry>& scenario_catalog();

/// Scenarios used by `verify --suite all` when none are configured.
std::vector<std::string> default_scenarios();

/// Random-field basis for a user-defined chart: sin and cos of periodic
/// angles, cos of polar angles, and centred linear terms on intervals.
std::vector<Expr> default_features(const Chart& c);

/// Expression built as a sum of the given terms, each scaled.
Expr linear_combination(const std::vector<Expr>& terms, const std::vector<double>& coeffs);

}  // namespace exq
