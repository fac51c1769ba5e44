// extrinsic-q: evaluate and verify intrinsic and extrinsic conformal
// Laplacians and Q-curvatures.
//
// Exit codes: 0 all checks passed, 1 some check failed, 2 configuration or
// infrastructure error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>

#include "exq/cli.hpp"

namespace {

using nlohmann::json;

constexpr int kExitFail = 1;
constexpr int kExitError = 2;

struct Common {
  std::string config;
  std::string output;
  std::string format = "json";
};

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw exq::ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw exq::Error("writing '" + path + "' failed");
}

exq::NodeCounts parse_nodes(const std::string& text) {
  const auto v = exq::parse_point(text);
  auto count = [&](double x) {
    if (!(x >= 0 && x <= 4096) || x != static_cast<int>(x))
      throw exq::ConfigError("--nodes takes N or PERIODIC,POLAR with integer counts in 0..4096");
    return static_cast<int>(x);
  };
  if (v.size() == 1) return {count(v[0]), count(v[0])};
  if (v.size() == 2) return {count(v[0]), count(v[1])};
  throw exq::ConfigError("--nodes takes N or PERIODIC,POLAR");
}

/// Catalog name, or the name of an inline scenario from --config.
exq::Scenario resolve_scenario(const std::string& name, const std::string& config) {
  if (!config.empty()) {
    const exq::RunPlan plan = exq::load_config(config);
    for (const auto& s : plan.scenarios)
      if (s.name == name) return s;
  }
  return exq::make_scenario(name);
}

std::vector<double> default_point(const exq::Chart& c) {
  // an interior point away from symmetric positions
  std::vector<double> x;
  for (const auto& a : c.axes()) x.push_back(a.lo + 0.37 * (a.hi - a.lo));
  return x;
}

std::vector<double> point_or_default(const std::string& text, const exq::Chart& c) {
  auto x = text.empty() ? default_point(c) : exq::parse_point(text);
  if (static_cast<int>(x.size()) != c.dim())
    throw exq::ConfigError("--point needs " + std::to_string(c.dim()) + " coordinates, got " +
                           std::to_string(x.size()));
  if (!c.contains(x)) throw exq::ConfigError("--point lies outside the chart");
  return x;
}

/// Periodic axes: k·h from lo. Other axes: cell midpoints.
std::vector<std::vector<double>> grid(const exq::Chart& c, int n) {
  if (n < 1) throw exq::ConfigError("--grid must be positive");
  std::size_t total = 1;
  for (int i = 0; i < c.dim(); ++i) {
    total *= static_cast<std::size_t>(n);
    if (total > 1000000) throw exq::ConfigError("--grid is too large for this chart");
  }
  std::vector<std::vector<double>> pts;
  for (std::size_t k = 0; k < total; ++k) {
    std::vector<double> x(c.dim());
    std::size_t r = k;
    for (int a = c.dim() - 1; a >= 0; --a) {
      const auto& ax = c.axes()[a];
      const double h = (ax.hi - ax.lo) / n;
      const double i = static_cast<double>(r % n);
      r /= n;
      x[a] = ax.lo + (ax.kind == exq::Axis::Kind::Periodic ? i : i + 0.5) * h;
    }
    pts.push_back(std::move(x));
  }
  return pts;
}

exq::OperatorSettings settings_from(int degree, double c_rho, double c_lap) {
  if (degree < 1 || degree > exq::kMaxJetDegree)
    throw exq::ConfigError("--degree must be in 1.." + std::to_string(exq::kMaxJetDegree));
  exq::OperatorSettings s;
  s.degree_cap = degree;
  s.c_rho = c_rho;
  s.c_lap = c_lap;
  return s;
}

/// Field of `op` applied to `f` on the scenario. Intrinsic operators on an
/// embedded scenario act on the induced metric.
exq::ScalarField operator_field(const std::string& op_name, const exq::Scenario& sc, const std::string& f_text,
                                const exq::OperatorSettings& s) {
  const exq::OpInfo& info = exq::op_info(op_name);
  const exq::Chart& chart = sc.chart();
  exq::Expr fe = exq::parse(f_text);
  exq::validate(fe, chart.names());
  const exq::ScalarField f = exq::ScalarField::from_expr(chart, fe);
  if (info.extrinsic) {
    if (!sc.embedded()) throw exq::ConfigError(std::string(info.name) + " needs an embedded scenario");
    return exq::extrinsic_field(info.op, sc.embedding, f, s);
  }
  const exq::Metric g = sc.embedded() ? exq::induced_metric(sc.embedding) : sc.metric;
  return exq::intrinsic_field(info.op, g, f, s);
}

json scenario_header(const exq::Scenario& sc) {
  return json{{"scenario", sc.name}, {"kind", sc.embedded() ? "embedded" : "intrinsic"}, {"n", sc.n()}};
}

int cmd_verify(const Common& c, const std::vector<std::string>& scenarios, const std::string& suite, int degree,
               const std::string& nodes, double tol, long long seed, int points, int pairs, int threads, bool quiet) {
  exq::RunPlan plan = c.config.empty() ? exq::default_plan() : exq::load_config(c.config);
  if (!scenarios.empty()) {
    plan.scenario_specs.clear();
    for (const auto& s : scenarios) plan.scenario_specs.push_back(s);
  }
  if (!suite.empty()) plan.suites = exq::parse_suites(suite);
  if (degree >= 0) plan.options.degree = degree;
  if (!nodes.empty()) plan.options.nodes = parse_nodes(nodes);
  if (tol >= 0) {
    if (!(tol > 0)) throw exq::ConfigError("--tol must be positive");
    plan.options.tol.pointwise = tol;
  }
  if (seed >= 0) plan.options.seed = static_cast<std::uint64_t>(seed);
  if (points >= 0) plan.options.points = points;
  if (pairs >= 0) plan.options.pairs = pairs;
  if (threads >= 0) plan.options.threads = threads;
  exq::finalize_plan(plan);

  std::mutex io;
  exq::ResultCallback progress;
  if (!quiet)
    progress = [&](const exq::CheckResult& r) {
      json line = exq::check_json(r);
      line["scenario"] = r.scenario;
      std::lock_guard lock(io);
      std::cerr << line.dump() << "\n";
    };
  const exq::SuiteOutcome out = exq::run_suite(plan, progress);
  write_output(c.format == "csv" ? exq::report_csv(out.results) : exq::dump_report(out.report), c.output);
  if (!quiet) {
    const auto& s = out.report["summary"];
    std::cerr << "extrinsic-q: " << s["passed"].get<std::size_t>() << "/" << s["checks"].get<std::size_t>()
              << " checks passed\n";
  }
  return out.exit_code;
}

int cmd_curvature(const Common& c, const std::string& scenario, const std::string& point) {
  const exq::Scenario sc = resolve_scenario(scenario, c.config);
  const exq::Metric g = sc.embedded() ? exq::induced_metric(sc.embedding) : sc.metric;
  const auto x = point_or_default(point, g.chart());
  json out = scenario_header(sc);
  out["metric_source"] = sc.embedded() ? "induced" : "intrinsic";
  out["pack"] = exq::pack_json(exq::curvature_pack(g, x));
  write_output(out.dump(2) + "\n", c.output);
  return 0;
}

int cmd_extrinsic(const Common& c, const std::string& scenario, const std::string& point) {
  const exq::Scenario sc = resolve_scenario(scenario, c.config);
  if (!sc.embedded()) throw exq::ConfigError("scenario '" + sc.name + "' is not embedded");
  const auto x = point_or_default(point, sc.chart());
  json out = scenario_header(sc);
  out["pack"] = exq::pack_json(exq::extrinsic_pack(sc.embedding, x));
  write_output(out.dump(2) + "\n", c.output);
  return 0;
}

int cmd_apply(const Common& c, const std::string& op, const std::string& scenario, const std::string& f,
              const std::string& point, int grid_n, const exq::OperatorSettings& s) {
  const exq::Scenario sc = resolve_scenario(scenario, c.config);
  const exq::ScalarField field = operator_field(op, sc, f, s);
  std::vector<std::vector<double>> pts;
  if (grid_n > 0)
    pts = grid(sc.chart(), grid_n);
  else
    pts.push_back(point_or_default(point, sc.chart()));
  json values = json::array();
  std::string csv = "point,value\n";
  for (const auto& x : pts) {
    const double v = field(x, 0).value();
    values.push_back(json{{"point", x}, {"value", v}});
    std::string px;
    for (std::size_t i = 0; i < x.size(); ++i) px += (i ? " " : "") + json(x[i]).dump();
    csv += px + "," + json(v).dump() + "\n";
  }
  if (c.format == "csv") {
    write_output(csv, c.output);
  } else {
    json out = scenario_header(sc);
    out["op"] = op;
    out["f"] = f;
    out["values"] = values;
    write_output(out.dump(2) + "\n", c.output);
  }
  return 0;
}

int cmd_integrate(const Common& c, const std::string& op, const std::string& scenario, const std::string& f,
                  const std::string& nodes, int threads, const exq::OperatorSettings& s) {
  const exq::Scenario sc = resolve_scenario(scenario, c.config);
  const exq::Metric g = sc.embedded() ? exq::induced_metric(sc.embedding) : sc.metric;
  exq::ScalarField field;
  if (op.empty()) {
    exq::Expr fe = exq::parse(f);
    exq::validate(fe, g.chart().names());
    field = exq::ScalarField::from_expr(g.chart(), fe);
  } else {
    field = operator_field(op, sc, f, s);
  }
  const exq::Quadrature q(g.chart(), nodes.empty() ? exq::NodeCounts{} : parse_nodes(nodes));
  const double value = exq::integrate(field, g, q, threads);
  json out = scenario_header(sc);
  out["integrand"] = op.empty() ? f : exq::op_info(op).takes_function ? op + "(" + f + ")" : op;
  out["nodes"] = q.counts();
  out["integral"] = value;
  if (c.format == "csv")
    write_output("scenario,integrand,integral\n" + sc.name + "," + out["integrand"].get<std::string>() + "," +
                     json(value).dump() + "\n",
                 c.output);
  else
    write_output(out.dump(2) + "\n", c.output);
  return 0;
}

int cmd_list(const Common& c) {
  const auto defaults = exq::default_scenarios();
  if (c.format == "json") {
    json entries = json::array();
    for (const auto& e : exq::scenario_catalog()) entries.push_back(json{{"pattern", e.pattern}, {"summary", e.summary}});
    json ops = json::array();
    for (const auto& o : exq::operator_catalog())
      ops.push_back(json{{"name", std::string(o.name)},
                         {"extrinsic", o.extrinsic},
                         {"takes_function", o.takes_function},
                         {"dims", {o.min_n, o.max_n}}});
    write_output(json{{"catalog", entries}, {"default_scenarios", defaults}, {"operators", ops}}.dump(2) + "\n",
                 c.output);
    return 0;
  }
  std::string text = "scenario catalog:\n";
  for (const auto& e : exq::scenario_catalog()) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "  %-28s %s\n", e.pattern.c_str(), e.summary.c_str());
    text += buf;
  }
  text += "\ndefault scenarios for verify:\n";
  for (const auto& s : defaults) text += "  " + s + "\n";
  text += "\noperators:\n";
  for (const auto& o : exq::operator_catalog()) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "  %-24s %s, n in %d..%d%s\n", std::string(o.name).c_str(),
                  o.extrinsic ? "extrinsic" : "intrinsic", o.min_n, o.max_n, o.takes_function ? ", takes f" : "");
    text += buf;
  }
  write_output(text, c.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal Laplacians and Q-curvatures of metrics and hypersurfaces, with numerical verification"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool with_format) {
    sub->add_option("--config", common.config, "YAML or JSON configuration (or a previous report)");
    sub->add_option("-o,--output", common.output, "Write the result here instead of stdout");
    if (with_format)
      sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  };

  // verify
  auto* verify = app.add_subcommand("verify", "Run identity checks and write a report");
  add_common(verify, true);
  std::vector<std::string> v_scenarios;
  std::string v_suite, v_nodes;
  int v_degree = -1, v_points = -1, v_pairs = -1, v_threads = -1;
  double v_tol = -1;
  long long v_seed = -1;
  bool v_quiet = false;
  verify->add_option("--scenario", v_scenarios, "Catalog scenario (repeatable); replaces the configured list");
  verify->add_option("--suite", v_suite, "all, or a comma list of intrinsic,extrinsic,integral,structural,audit");
  verify->add_option("--degree", v_degree, "Jet degree (5..8)");
  verify->add_option("--nodes", v_nodes, "Quadrature nodes per axis: N or PERIODIC,POLAR (0 = defaults)");
  verify->add_option("--tol", v_tol, "Pointwise relative tolerance");
  verify->add_option("--seed", v_seed, "Random seed")->check(CLI::NonNegativeNumber);
  verify->add_option("--points", v_points, "Sample points per random pair")->check(CLI::PositiveNumber);
  verify->add_option("--pairs", v_pairs, "Random (phi, f) pairs per check")->check(CLI::PositiveNumber);
  verify->add_option("--threads", v_threads, "Worker threads (0 = hardware concurrency)")
      ->check(CLI::NonNegativeNumber);
  verify->add_flag("-q,--quiet", v_quiet, "No per-check progress on stderr");

  // curvature / extrinsic
  std::string p_scenario, p_point;
  auto* curvature = app.add_subcommand("curvature", "Curvature tensors of a scenario at a point, as JSON");
  add_common(curvature, false);
  curvature->add_option("--scenario", p_scenario, "Scenario name")->required();
  curvature->add_option("--point", p_point, "Chart point, comma separated");
  auto* extrinsic = app.add_subcommand("extrinsic", "Hypersurface quantities at a point, as JSON");
  add_common(extrinsic, false);
  extrinsic->add_option("--scenario", p_scenario, "Embedded scenario name")->required();
  extrinsic->add_option("--point", p_point, "Surface chart point, comma separated");

  // apply / integrate
  std::string a_op, a_f = "1", a_nodes;
  int a_grid = 0, a_degree = 6, a_threads = 0;
  double a_c_rho = exq::OperatorSettings{}.c_rho, a_c_lap = exq::OperatorSettings{}.c_lap;
  auto add_op_options = [&](CLI::App* sub) {
    sub->add_option("--scenario", p_scenario, "Scenario name")->required();
    sub->add_option("--f", a_f, "Function on the (surface) chart, as an expression");
    sub->add_option("--degree", a_degree, "Jet degree cap");
    sub->add_option("--c-rho", a_c_rho, "Coefficient of |rho|^2 in Q4");
    sub->add_option("--c-lap", a_c_lap, "Coefficient of Lap|L0|^2 in the local invariant");
  };
  auto* apply = app.add_subcommand("apply", "Evaluate an operator at a point or on a grid");
  add_common(apply, true);
  apply->add_option("--op", a_op, "Operator name (see list-scenarios)")->required();
  add_op_options(apply);
  apply->add_option("--point", p_point, "Chart point, comma separated");
  apply->add_option("--grid", a_grid, "Evaluate on N points per axis instead");
  auto* integ = app.add_subcommand("integrate", "Integrate a function or operator output over a closed scenario");
  add_common(integ, true);
  integ->add_option("--op", a_op, "Operator applied to --f before integrating");
  add_op_options(integ);
  integ->add_option("--nodes", a_nodes, "Quadrature nodes per axis: N or PERIODIC,POLAR");
  integ->add_option("--threads", a_threads, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);

  auto* list = app.add_subcommand("list-scenarios", "Scenario catalog, default scenarios and operators");
  common.format = "text";
  list->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  list->add_option("-o,--output", common.output, "Write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }
  if (!list->parsed() && common.format == "text") common.format = "json";

  try {
    if (verify->parsed())
      return cmd_verify(common, v_scenarios, v_suite, v_degree, v_nodes, v_tol, v_seed, v_points, v_pairs, v_threads,
                        v_quiet) == 0
                 ? 0
                 : kExitFail;
    if (curvature->parsed()) return cmd_curvature(common, p_scenario, p_point);
    if (extrinsic->parsed()) return cmd_extrinsic(common, p_scenario, p_point);
    if (apply->parsed()) return cmd_apply(common, a_op, p_scenario, a_f, p_point, a_grid, settings_from(a_degree, a_c_rho, a_c_lap));
    if (integ->parsed())
      return cmd_integrate(common, a_op, p_scenario, a_f, a_nodes, a_threads, settings_from(a_degree, a_c_rho, a_c_lap));
    if (list->parsed()) return cmd_list(common);
  } catch (const exq::Error& e) {
    std::cerr << "extrinsic-q: error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "extrinsic-q: internal error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
