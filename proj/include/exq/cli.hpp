#pragma once

// Run configuration, suite orchestration and report emission behind the
// `extrinsic-q` command.
//
// A configuration is YAML (or JSON, detected by a leading '{'):
//
//   suite: all                 # or a list / comma-separated names
//   scenarios:                 # catalog names or inline definitions
//     - FLAT_T4
//     - CONF_PERTURBED(ROUND_S(4,1), 0.1*cos(a1))
//     - name: bumpy_torus
//       chart: [{name: x, kind: periodic}, {name: y, kind: periodic}]
//       metric: [["1 + 0.2*sin(x)", "0"], ["0", "1"]]
//   degree: 6
//   nodes: {periodic: 0, polar: 0}   # 0 picks per-scenario defaults
//   seed: 1
//   points: 20
//   pairs: 3
//   threads: 0
//   operators: {c_rho: 2, c_lap: 0.5, umbilic_tol: 1.0e-9}
//   tolerances: {pointwise: 1.0e-7, ...}
//
// A report file is also accepted; its "config" member is used, so rerunning
// a report reproduces it.

#include <string>
#include <vector>

#include <json.hpp>

#include "exq/packs.hpp"
#include "exq/verify.hpp"

namespace exq {

inline constexpr int kReportSchemaVersion = 1;
/// Jet degree needed by the fourth-order checks: four derivatives plus one
/// for nesting a conformal factor inside the operator.
inline constexpr int kMinSuiteDegree = 5;

struct RunPlan {
  /// Scenario entries as configured: catalog strings or inline objects.
  std::vector<nlohmann::json> scenario_specs;
  std::vector<Scenario> scenarios;
  std::vector<Suite> suites;
  VerifyOptions options;
};

/// Plan with the default catalog, all suites and default options.
RunPlan default_plan();
/// Reads a YAML or JSON configuration, or a previously written report.
RunPlan load_config(const std::string& path);
RunPlan plan_from_text(const std::string& text, const std::string& source);
RunPlan plan_from_json(const nlohmann::json& config);

/// Rebuilds `scenarios` from `scenario_specs` and checks option ranges and
/// the degree requirement. Throws ConfigError with a field path.
void finalize_plan(RunPlan& plan);

/// Scenario from a catalog string or an inline definition; `path` prefixes
/// error messages.
Scenario scenario_from_spec(const nlohmann::json& spec, const std::string& path);

/// Every option after defaults, in the configuration schema.
nlohmann::json config_echo(const RunPlan& plan);

struct SuiteOutcome {
  std::vector<ScenarioResults> results;
  nlohmann::json report;
  /// 0 when every check passed, 1 otherwise.
  int exit_code = 0;
};

SuiteOutcome run_suite(const RunPlan& plan, const ResultCallback& progress = {});

nlohmann::json report_json(const RunPlan& plan, const std::vector<ScenarioResults>& results);
nlohmann::json check_json(const CheckResult& r);
/// One row per check with a header line.
std::string report_csv(const std::vector<ScenarioResults>& results);
std::string dump_report(const nlohmann::json& report);

nlohmann::json pack_json(const CurvaturePack& p);
nlohmann::json pack_json(const ExtrinsicPack& p);

/// "a,b,c" → numbers. Throws ConfigError.
std::vector<double> parse_point(const std::string& text);

}  // namespace exq
