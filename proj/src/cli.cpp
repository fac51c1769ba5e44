#include "exq/cli.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

namespace exq {

using nlohmann::json;

namespace {

// ---- YAML → JSON ------------------------------------------------------------

json scalar_to_json(const YAML::Node& n) {
  const std::string& s = n.Scalar();
  // quoted scalars stay strings
  if (n.Tag() == "!") return s;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  if (s == "null" || s == "~" || s.empty()) return nullptr;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (s[0] != '-') {
    std::uint64_t u = 0;
    auto [p, ec] = std::from_chars(b, e, u);
    if (ec == std::errc() && p == e) return u;
  } else {
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(b, e, i);
    if (ec == std::errc() && p == e) return i;
  }
  double d = 0;
  auto [p, ec] = std::from_chars(b, e, d);
  if (ec == std::errc() && p == e) return d;
  return s;
}

json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(n);
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& c : n) a.push_back(yaml_to_json(c));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return o;
    }
  }
  return nullptr;
}

// ---- typed field access -----------------------------------------------------

std::string key_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

void reject_unknown_keys(const json& o, const std::string& path, std::initializer_list<const char*> known) {
  if (!o.is_object()) fail(path.empty() ? "config" : path, "expected a mapping");
  for (const auto& [k, v] : o.items()) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) {
      std::string list;
      for (const char* name : known) list += (list.empty() ? "" : ", ") + std::string(name);
      fail(key_path(path, k), "unknown key (expected one of " + list + ")");
    }
  }
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

long long as_integer(const json& v, const std::string& path, long long lo, long long hi) {
  long long x = 0;
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(hi)) fail(path, "must be at most " + std::to_string(hi));
    x = static_cast<long long>(u);
  } else if (v.is_number_integer()) {
    x = v.get<long long>();
  } else {
    fail(path, "expected an integer");
  }
  if (x < lo || x > hi) fail(path, "must be in " + std::to_string(lo) + ".." + std::to_string(hi));
  return x;
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected a list");
  return v;
}

// ---- expressions with positions ---------------------------------------------

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

/// Byte offset of `name` as a whole identifier in `text`.
std::size_t locate_identifier(const std::string& text, const std::string& name) {
  for (std::size_t i = text.find(name); i != std::string::npos; i = text.find(name, i + 1)) {
    const bool left = i == 0 || !ident_char(text[i - 1]);
    const bool right = i + name.size() >= text.size() || !ident_char(text[i + name.size()]);
    if (left && right) return i;
  }
  return 0;
}

std::string caret_line(const std::string& text, std::size_t offset) {
  return "\n  " + text + "\n  " + std::string(std::min(offset, text.size()), ' ') + "^";
}

/// Parses a number or expression string and checks its variables.
Expr expression_at(const json& v, const std::string& path, const std::vector<std::string>& vars) {
  if (v.is_number()) return Expr::number(v.get<double>());
  const std::string text = as_string(v, path);
  Expr e;
  try {
    e = parse(text);
  } catch (const ParseError& err) {
    fail(path, std::string(err.what()) + caret_line(text, err.offset()));
  }
  for (const auto& name : e.free_variables())
    if (std::find(vars.begin(), vars.end(), name) == vars.end()) {
      const std::size_t at = locate_identifier(text, name);
      std::string known;
      for (const auto& k : vars) known += (known.empty() ? "" : ", ") + k;
      fail(path, "undefined variable '" + name + "' at offset " + std::to_string(at) + " (chart variables: " +
                     known + ")" + caret_line(text, at));
    }
  return e;
}

double constant_at(const json& v, const std::string& path) {
  const Expr e = expression_at(v, path, {});
  return eval(e.bind({}), {});
}

// ---- scenario definitions ---------------------------------------------------

Axis::Kind axis_kind(const std::string& s, const std::string& path) {
  if (s == "periodic") return Axis::Kind::Periodic;
  if (s == "polar") return Axis::Kind::Polar;
  if (s == "interval") return Axis::Kind::Interval;
  fail(path, "unknown axis kind '" + s + "' (expected periodic, polar or interval)");
}

Chart chart_at(const json& v, const std::string& path) {
  std::vector<Axis> axes;
  const json& list = as_array(v, path);
  if (list.empty()) fail(path, "a chart needs at least one axis");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string p = index_path(path, i);
    reject_unknown_keys(list[i], p, {"name", "kind", "lo", "hi", "nodes"});
    Axis a;
    if (!list[i].contains("name")) fail(key_path(p, "name"), "required");
    a.name = as_string(list[i]["name"], key_path(p, "name"));
    a.kind = list[i].contains("kind") ? axis_kind(as_string(list[i]["kind"], key_path(p, "kind")), key_path(p, "kind"))
                                      : Axis::Kind::Periodic;
    switch (a.kind) {
      case Axis::Kind::Periodic: a.lo = 0; a.hi = 2 * std::numbers::pi; break;
      case Axis::Kind::Polar: a.lo = 0; a.hi = std::numbers::pi; break;
      case Axis::Kind::Interval:
        if (!list[i].contains("lo") || !list[i].contains("hi")) fail(p, "interval axes need lo and hi");
        break;
    }
    if (list[i].contains("lo")) a.lo = constant_at(list[i]["lo"], key_path(p, "lo"));
    if (list[i].contains("hi")) a.hi = constant_at(list[i]["hi"], key_path(p, "hi"));
    if (list[i].contains("nodes")) a.nodes = static_cast<int>(as_integer(list[i]["nodes"], key_path(p, "nodes"), 0, 4096));
    axes.push_back(a);
  }
  try {
    return Chart(axes);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

Metric metric_at(const json& v, const std::string& path, const Chart& chart) {
  const json& rows = as_array(v, path);
  std::vector<std::vector<Expr>> g;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const json& row = as_array(rows[i], index_path(path, i));
    g.emplace_back();
    for (std::size_t j = 0; j < row.size(); ++j)
      g.back().push_back(expression_at(row[j], index_path(index_path(path, i), j), chart.names()));
  }
  try {
    return Metric::from_expressions(chart, g);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

std::vector<Expr> expressions_at(const json& v, const std::string& path, const std::vector<std::string>& vars) {
  std::vector<Expr> out;
  const json& list = as_array(v, path);
  for (std::size_t i = 0; i < list.size(); ++i) out.push_back(expression_at(list[i], index_path(path, i), vars));
  return out;
}

Scenario inline_scenario(const json& o, const std::string& path) {
  reject_unknown_keys(o, path,
                      {"name", "description", "kind", "chart", "metric", "ambient", "embedding", "orientation", "euler",
                       "umbilic", "conformally_flat", "flat", "features", "ambient_features"});
  Scenario s;
  if (!o.contains("name")) fail(key_path(path, "name"), "required");
  s.name = as_string(o["name"], key_path(path, "name"));
  if (s.name.empty()) fail(key_path(path, "name"), "must not be empty");
  if (o.contains("description")) s.description = as_string(o["description"], key_path(path, "description"));
  std::string kind = o.contains("embedding") ? "embedded" : "intrinsic";
  if (o.contains("kind")) kind = as_string(o["kind"], key_path(path, "kind"));
  if (kind != "intrinsic" && kind != "embedded")
    fail(key_path(path, "kind"), "expected intrinsic or embedded, got '" + kind + "'");
  if (!o.contains("chart")) fail(key_path(path, "chart"), "required");
  const Chart chart = chart_at(o["chart"], key_path(path, "chart"));

  if (kind == "intrinsic") {
    for (const char* k : {"ambient", "embedding", "orientation", "ambient_features"})
      if (o.contains(k)) fail(key_path(path, k), "only embedded scenarios take this key");
    if (!o.contains("metric")) fail(key_path(path, "metric"), "required");
    s.kind = Scenario::Kind::Intrinsic;
    s.metric = metric_at(o["metric"], key_path(path, "metric"), chart);
  } else {
    if (o.contains("metric")) fail(key_path(path, "metric"), "embedded scenarios take ambient.metric instead");
    if (!o.contains("ambient")) fail(key_path(path, "ambient"), "required");
    if (!o.contains("embedding")) fail(key_path(path, "embedding"), "required");
    const std::string ap = key_path(path, "ambient");
    reject_unknown_keys(o["ambient"], ap, {"chart", "metric"});
    if (!o["ambient"].contains("chart")) fail(key_path(ap, "chart"), "required");
    const Chart amb = chart_at(o["ambient"]["chart"], key_path(ap, "chart"));
    s.kind = Scenario::Kind::Embedded;
    s.embedding.surface = chart;
    s.embedding.ambient = o["ambient"].contains("metric") ? metric_at(o["ambient"]["metric"], key_path(ap, "metric"), amb)
                                                          : Metric::euclidean(amb);
    s.embedding.iota = expressions_at(o["embedding"], key_path(path, "embedding"), chart.names());
    if (o.contains("orientation"))
      s.embedding.orientation = static_cast<int>(as_integer(o["orientation"], key_path(path, "orientation"), -1, 1));
    try {
      s.embedding.validate();
    } catch (const Error& e) {
      fail(path, e.what());
    }
    s.ambient_features = o.contains("ambient_features")
                             ? expressions_at(o["ambient_features"], key_path(path, "ambient_features"), amb.names())
                             : default_features(amb);
  }
  if (o.contains("euler"))
    s.euler = static_cast<int>(as_integer(o["euler"], key_path(path, "euler"), -1000000, 1000000));
  if (o.contains("umbilic")) s.umbilic = as_bool(o["umbilic"], key_path(path, "umbilic"));
  if (o.contains("conformally_flat"))
    s.conformally_flat = as_bool(o["conformally_flat"], key_path(path, "conformally_flat"));
  if (o.contains("flat")) s.flat = as_bool(o["flat"], key_path(path, "flat"));
  s.features = o.contains("features") ? expressions_at(o["features"], key_path(path, "features"), chart.names())
                                      : default_features(chart);
  if (s.features.empty()) fail(key_path(path, "features"), "needs at least one feature");
  if (s.embedded() && s.ambient_features.empty())
    fail(key_path(path, "ambient_features"), "needs at least one feature");
  if (s.description.empty()) s.description = "user-defined " + kind + " scenario";
  return s;
}

// ---- options ------------------------------------------------------------------

struct TolField {
  const char* name;
  double Tolerances::*field;
};

constexpr TolField kTolFields[] = {
    {"pointwise", &Tolerances::pointwise},
    {"integral", &Tolerances::integral},
    {"control", &Tolerances::control},
    {"reduction", &Tolerances::reduction},
    {"structural", &Tolerances::structural},
    {"weight", &Tolerances::weight},
    {"gauss_bonnet", &Tolerances::gauss_bonnet},
    {"global_umbilic", &Tolerances::global_umbilic},
    {"divergence", &Tolerances::divergence},
    {"self_adjoint", &Tolerances::self_adjoint},
    {"nonzero", &Tolerances::nonzero},
    {"audit", &Tolerances::audit},
};

void read_tolerances(const json& o, Tolerances& t) {
  if (!o.is_object()) fail("tolerances", "expected a mapping");
  for (const auto& [k, v] : o.items()) {
    const TolField* f = nullptr;
    for (const auto& tf : kTolFields)
      if (k == tf.name) f = &tf;
    if (!f) {
      std::string list;
      for (const auto& tf : kTolFields) list += (list.empty() ? "" : ", ") + std::string(tf.name);
      fail("tolerances." + k, "unknown key (expected one of " + list + ")");
    }
    const double x = as_number(v, "tolerances." + k);
    if (!(x > 0)) fail("tolerances." + k, "must be positive");
    t.*(f->field) = x;
  }
}

std::string suites_from_json(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  std::string text;
  const json& list = as_array(v, "suite");
  for (std::size_t i = 0; i < list.size(); ++i)
    text += (i ? "," : "") + as_string(list[i], index_path("suite", i));
  return text;
}

bool needs_fourth_order(const std::vector<Suite>& suites) {
  // every suite except structural evaluates fourth-order operators with a
  // conformal factor nested inside
  for (Suite s : suites)
    if (s != Suite::Structural) return true;
  return false;
}

}  // namespace

// ---- plans --------------------------------------------------------------------

RunPlan default_plan() {
  RunPlan p;
  for (const auto& name : default_scenarios()) p.scenario_specs.push_back(name);
  p.suites = parse_suites("all");
  finalize_plan(p);
  return p;
}

Scenario scenario_from_spec(const json& spec, const std::string& path) {
  if (spec.is_string()) {
    try {
      return make_scenario(spec.get<std::string>());
    } catch (const Error& e) {
      fail(path, e.what());
    }
  }
  if (spec.is_object()) return inline_scenario(spec, path);
  fail(path, "expected a catalog name or a scenario definition");
}

void finalize_plan(RunPlan& plan) {
  if (plan.scenario_specs.empty()) fail("scenarios", "at least one scenario is required");
  if (plan.suites.empty()) fail("suite", "at least one suite is required");
  const VerifyOptions& o = plan.options;
  if (o.degree > kMaxJetDegree) fail("degree", "at most " + std::to_string(kMaxJetDegree) + " is supported");
  if (o.degree < 1) fail("degree", "must be positive");
  if (o.degree < kMinSuiteDegree && needs_fourth_order(plan.suites))
    fail("degree", "suite '" + suites_text(plan.suites) + "' requires degree ≥ " + std::to_string(kMinSuiteDegree) +
                       " (4 derivatives + 1 for covariance nesting), got " + std::to_string(o.degree));
  if (o.nodes.periodic < 0 || o.nodes.polar < 0) fail("nodes", "must be non-negative");
  if (o.points < 1) fail("points", "must be positive");
  if (o.pairs < 1) fail("pairs", "must be positive");
  if (o.threads < 0) fail("threads", "must be non-negative");
  if (!(o.ops.umbilic_tol > 0)) fail("operators.umbilic_tol", "must be positive");
  plan.scenarios.clear();
  std::set<std::string> names;
  for (std::size_t i = 0; i < plan.scenario_specs.size(); ++i) {
    Scenario s = scenario_from_spec(plan.scenario_specs[i], index_path("scenarios", i));
    if (!names.insert(s.name).second) fail(index_path("scenarios", i), "duplicate scenario '" + s.name + "'");
    plan.scenarios.push_back(std::move(s));
  }
}

RunPlan plan_from_json(const json& config) {
  reject_unknown_keys(config, "",
                      {"suite", "scenarios", "degree", "nodes", "seed", "points", "pairs", "threads", "operators",
                       "tolerances"});
  RunPlan p;
  VerifyOptions& o = p.options;
  try {
    p.suites = parse_suites(config.contains("suite") ? suites_from_json(config["suite"]) : "all");
  } catch (const ConfigError& e) {
    fail("suite", e.what());
  }
  if (config.contains("scenarios")) {
    const json& list = as_array(config["scenarios"], "scenarios");
    for (const auto& s : list) p.scenario_specs.push_back(s);
  } else {
    for (const auto& name : default_scenarios()) p.scenario_specs.push_back(name);
  }
  if (config.contains("degree")) o.degree = static_cast<int>(as_integer(config["degree"], "degree", 0, 64));
  if (config.contains("nodes")) {
    const json& n = config["nodes"];
    if (n.is_number()) {
      o.nodes.periodic = o.nodes.polar = static_cast<int>(as_integer(n, "nodes", 0, 4096));
    } else {
      reject_unknown_keys(n, "nodes", {"periodic", "polar"});
      if (n.contains("periodic"))
        o.nodes.periodic = static_cast<int>(as_integer(n["periodic"], "nodes.periodic", 0, 4096));
      if (n.contains("polar")) o.nodes.polar = static_cast<int>(as_integer(n["polar"], "nodes.polar", 0, 4096));
    }
  }
  if (config.contains("seed")) {
    const json& s = config["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      fail("seed", "expected a non-negative integer");
    o.seed = s.get<std::uint64_t>();
  }
  if (config.contains("points")) o.points = static_cast<int>(as_integer(config["points"], "points", 1, 100000));
  if (config.contains("pairs")) o.pairs = static_cast<int>(as_integer(config["pairs"], "pairs", 1, 1000));
  if (config.contains("threads")) o.threads = static_cast<int>(as_integer(config["threads"], "threads", 0, 4096));
  if (config.contains("operators")) {
    const json& ops = config["operators"];
    reject_unknown_keys(ops, "operators", {"c_rho", "c_lap", "umbilic_tol"});
    if (ops.contains("c_rho")) o.ops.c_rho = as_number(ops["c_rho"], "operators.c_rho");
    if (ops.contains("c_lap")) o.ops.c_lap = as_number(ops["c_lap"], "operators.c_lap");
    if (ops.contains("umbilic_tol")) o.ops.umbilic_tol = as_number(ops["umbilic_tol"], "operators.umbilic_tol");
  }
  if (config.contains("tolerances")) read_tolerances(config["tolerances"], o.tol);
  finalize_plan(p);
  return p;
}

RunPlan plan_from_text(const std::string& text, const std::string& source) {
  json j;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(source + ": invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
  } else {
    try {
      j = yaml_to_json(YAML::Load(text));
    } catch (const YAML::Exception& e) {
      throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                        ": " + e.msg);
    }
  }
  if (j.is_null()) j = json::object();
  // a report: rerun its echo
  if (j.is_object() && j.contains("schema_version") && j.contains("config")) {
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kReportSchemaVersion)
      throw ConfigError(source + ": unsupported report schema_version");
    j = j["config"];
  }
  try {
    return plan_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

RunPlan load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return plan_from_text(ss.str(), path);
}

json config_echo(const RunPlan& plan) {
  const VerifyOptions& o = plan.options;
  json tol = json::object();
  for (const auto& tf : kTolFields) tol[tf.name] = o.tol.*(tf.field);
  json scenarios = json::array();
  for (const auto& s : plan.scenario_specs) scenarios.push_back(s);
  return json{{"suite", suites_text(plan.suites)},
              {"scenarios", scenarios},
              {"degree", o.degree},
              {"nodes", {{"periodic", o.nodes.periodic}, {"polar", o.nodes.polar}}},
              {"seed", o.seed},
              {"points", o.points},
              {"pairs", o.pairs},
              {"threads", o.threads},
              {"operators", {{"c_rho", o.ops.c_rho}, {"c_lap", o.ops.c_lap}, {"umbilic_tol", o.ops.umbilic_tol}}},
              {"tolerances", tol}};
}

// ---- running and reporting ----------------------------------------------------

SuiteOutcome run_suite(const RunPlan& plan, const ResultCallback& progress) {
  SuiteOutcome out;
  out.results = run_checks(plan.scenarios, plan.suites, plan.options, progress);
  out.report = report_json(plan, out.results);
  out.exit_code = all_pass(out.results) ? 0 : 1;
  return out;
}

json check_json(const CheckResult& r) {
  return json{{"check", r.check},
              {"pass", r.pass},
              {"rel", r.rel},
              {"tol", r.tol},
              {"expect_above", r.expect_above},
              {"max_abs", r.max_abs},
              {"scale", r.scale},
              {"samples", r.samples},
              {"seed", r.seed},
              {"detail", r.detail}};
}

json report_json(const RunPlan& plan, const std::vector<ScenarioResults>& results) {
  json scenarios = json::array();
  std::size_t total = 0, passed = 0;
  for (const auto& s : results) {
    json checks = json::array();
    for (const auto& c : s.checks) {
      checks.push_back(check_json(c));
      ++total;
      passed += c.pass ? 1 : 0;
    }
    scenarios.push_back(json{{"name", s.name}, {"description", s.description}, {"checks", checks}});
  }
  return json{{"schema_version", kReportSchemaVersion},
              {"tool", "extrinsic-q"},
              {"suite", suites_text(plan.suites)},
              {"config", config_echo(plan)},
              {"scenarios", scenarios},
              {"summary", {{"checks", total}, {"passed", passed}, {"failed", total - passed}, {"all_pass", passed == total}}}};
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string report_csv(const std::vector<ScenarioResults>& results) {
  std::string out = "scenario,check,pass,rel,tol,expect_above,max_abs,scale,samples,seed,detail\n";
  for (const auto& s : results)
    for (const auto& c : s.checks) {
      out += csv_field(s.name) + "," + csv_field(c.check) + "," + (c.pass ? "true" : "false") + "," + g17(c.rel) + "," +
             g17(c.tol) + "," + (c.expect_above ? "true" : "false") + "," + g17(c.max_abs) + "," + g17(c.scale) + "," +
             std::to_string(c.samples) + "," + std::to_string(c.seed) + "," + csv_field(c.detail) + "\n";
    }
  return out;
}

// ---- packs --------------------------------------------------------------------

namespace {

/// Row-major components of a tensor with all indices of size `dim`, nested.
json nest(const std::vector<double>& v, int dim) {
  if (v.empty()) return nullptr;
  int rank = 0;
  std::size_t size = 1;
  while (size < v.size()) {
    size *= static_cast<std::size_t>(dim);
    ++rank;
  }
  if (size != v.size()) throw Error("tensor size is not a power of its dimension");
  std::function<json(std::size_t, int)> rec = [&](std::size_t offset, int r) -> json {
    if (r == 0) return v[offset];
    std::size_t stride = 1;
    for (int k = 1; k < r; ++k) stride *= static_cast<std::size_t>(dim);
    json a = json::array();
    for (int i = 0; i < dim; ++i) a.push_back(rec(offset + i * stride, r - 1));
    return a;
  };
  return rec(0, rank);
}

}  // namespace

json pack_json(const CurvaturePack& p) {
  return json{{"dim", p.dim},
              {"point", p.point},
              {"metric", nest(p.metric, p.dim)},
              {"riemann", nest(p.riemann, p.dim)},
              {"ricci", nest(p.ricci, p.dim)},
              {"scal", p.scal},
              {"J", p.J},
              {"schouten", nest(p.schouten, p.dim)},
              {"weyl", nest(p.weyl, p.dim)}};
}

json pack_json(const ExtrinsicPack& p) {
  return json{{"n", p.n},
              {"point", p.point},
              {"ambient_point", p.ambient_point},
              {"normal", p.normal},
              {"h", nest(p.h, p.n)},
              {"L", nest(p.L, p.n)},
              {"H", p.H},
              {"L0", nest(p.L0, p.n)},
              {"fialkow", nest(p.fialkow, p.n)},
              {"weyl_slice", nest(p.weyl_slice, p.n)},
              {"rho_bar", nest(p.rho_bar, p.n)},
              {"rho_bar_0", nest(p.rho_bar_0, p.n)},
              {"rho_bar_00", p.rho_bar_00},
              {"G_bar", nest(p.G_bar, p.n)},
              {"nabla0_rho_bar", nest(p.nabla0_rho_bar, p.n)},
              {"nabla0_rho_bar_0", nest(p.nabla0_rho_bar_0, p.n)},
              {"nabla0_weyl_0ij0", nest(p.nabla0_weyl_0ij0, p.n)}};
}

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> x;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    std::string item = text.substr(start, end - start);
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    item = b == std::string::npos ? "" : item.substr(b, e - b + 1);
    if (item.empty()) throw ConfigError("point '" + text + "' has an empty coordinate");
    try {
      x.push_back(constant_at(json(item), "point"));
    } catch (const ConfigError&) {
      throw ConfigError("point '" + text + "': cannot read coordinate '" + item + "'");
    }
    start = end + 1;
  }
  return x;
}

}  // namespace exq
