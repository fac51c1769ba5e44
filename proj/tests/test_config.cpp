#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "exq/cli.hpp"

using namespace exq;
using nlohmann::json;

namespace {

std::string error_of(const std::string& text) {
  try {
    plan_from_text(text, "cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

const char* kBumpy = R"cfg(
scenarios:
  - name: bumpy
    chart: [{name: x}, {name: y}]
    metric: [["1 + 0.2*sin(x)", "0"], ["0", "1"]]
)cfg";

}  // namespace

TEST(Config, MinimalPlan) {
  const RunPlan p = plan_from_text("suite: intrinsic\nscenarios: [FLAT_T4]\n", "cfg");
  ASSERT_EQ(p.scenarios.size(), 1u);
  EXPECT_EQ(p.scenarios[0].n(), 4);
  ASSERT_EQ(p.suites.size(), 1u);
  EXPECT_EQ(p.suites[0], Suite::Intrinsic);
  EXPECT_EQ(p.options.degree, 6);
  EXPECT_EQ(p.options.tol.pointwise, 1e-7);
  EXPECT_EQ(p.options.tol.integral, 1e-5);
  EXPECT_EQ(p.options.tol.control, 1e-12);
}

TEST(Config, EmptyConfigUsesDefaults) {
  const RunPlan p = plan_from_text("", "cfg");
  EXPECT_EQ(p.scenarios.size(), default_scenarios().size());
  EXPECT_EQ(p.suites.size(), 5u);
  EXPECT_EQ(suites_text(p.suites), "all");
}

TEST(Config, JsonIsAccepted) {
  const RunPlan p = plan_from_text(R"cfg({"suite": ["structural", "extrinsic"], "scenarios": ["GRAPH(3)"], "seed": 7})cfg",
                                   "cfg");
  EXPECT_EQ(suites_text(p.suites), "extrinsic,structural");
  EXPECT_EQ(p.options.seed, 7u);
  EXPECT_TRUE(p.scenarios[0].embedded());
}

TEST(Config, UndefinedVariableIsPositioned) {
  const std::string msg = error_of(R"cfg(
scenarios:
  - name: bumpy
    chart: [{name: x}, {name: y}]
    metric: [["1 + 0.2*sin(z)", "0"], ["0", "1"]]
)cfg");
  EXPECT_TRUE(contains(msg, "scenarios[0].metric[0][0]")) << msg;
  EXPECT_TRUE(contains(msg, "'z' at offset 12")) << msg;
}

TEST(Config, SyntaxErrorIsPositioned) {
  const std::string msg = error_of(R"cfg(
scenarios:
  - name: bumpy
    chart: [{name: x}, {name: y}]
    metric: [["1 + *x", "0"], ["0", "1"]]
)cfg");
  EXPECT_TRUE(contains(msg, "scenarios[0].metric[0][0]")) << msg;
  EXPECT_TRUE(contains(msg, "offset 4")) << msg;
}

TEST(Config, DegreeBelowFiveRejected) {
  const std::string msg = error_of("suite: intrinsic\nscenarios: [FLAT_T4]\ndegree: 4\n");
  EXPECT_TRUE(contains(msg, "requires degree ≥ 5")) << msg;
  // structural checks alone need no nesting margin
  EXPECT_NO_THROW(plan_from_text("suite: structural\nscenarios: [FLAT_T4]\ndegree: 4\n", "cfg"));
  EXPECT_TRUE(contains(error_of("degree: 9\n"), "degree"));
}

TEST(Config, FieldPathErrors) {
  EXPECT_TRUE(contains(error_of("tolerances: {pointwise: -1}\n"), "tolerances.pointwise"));
  EXPECT_TRUE(contains(error_of("tolerances: {bogus: 1}\n"), "tolerances.bogus: unknown key"));
  EXPECT_TRUE(contains(error_of("colour: red\n"), "colour: unknown key"));
  EXPECT_TRUE(contains(error_of("points: many\n"), "points: expected an integer"));
  EXPECT_TRUE(contains(error_of("suite: everything\n"), "suite"));
  EXPECT_TRUE(contains(error_of("scenarios: [NOPE(3)]\n"), "scenarios[0]"));
  EXPECT_TRUE(contains(error_of("scenarios: []\n"), "scenarios"));
  EXPECT_TRUE(contains(error_of("scenarios: [FLAT_T4, FLAT_T4]\n"), "duplicate"));
  EXPECT_TRUE(contains(error_of("operators: {c_rho: two}\n"), "operators.c_rho"));
  EXPECT_TRUE(contains(error_of("scenarios:\n  - name: s\n    chart: [{name: x, kind: round}]\n    metric: [[1]]\n"),
                       "scenarios[0].chart[0].kind"));
  EXPECT_TRUE(contains(error_of("scenarios: [1]\n"), "scenarios[0]"));
}

TEST(Config, YamlSyntaxErrorHasLine) {
  const std::string msg = error_of("suite: [intrinsic\nseed: 1\n");
  EXPECT_TRUE(contains(msg, "cfg:")) << msg;
}

TEST(Config, InlineIntrinsicScenario) {
  const RunPlan p = plan_from_text(kBumpy, "cfg");
  const Scenario& s = p.scenarios[0];
  EXPECT_EQ(s.name, "bumpy");
  EXPECT_FALSE(s.embedded());
  EXPECT_TRUE(s.closed());
  EXPECT_EQ(s.features.size(), 4u);
  const std::vector<double> x{0.5, 0.1};
  EXPECT_NEAR(s.metric.jets(x, 0)[0].value(), 1 + 0.2 * std::sin(0.5), 1e-15);
}

TEST(Config, InlineEmbeddedScenario) {
  const RunPlan p = plan_from_text(R"cfg(
scenarios:
  - name: round_s2
    chart: [{name: th, kind: polar}, {name: ph}]
    ambient:
      chart:
        - {name: X, kind: interval, lo: -2, hi: 2}
        - {name: Y, kind: interval, lo: -2, hi: 2}
        - {name: Z, kind: interval, lo: -2, hi: 2}
    embedding: ["sin(th)*cos(ph)", "sin(th)*sin(ph)", "cos(th)"]
    umbilic: true
    euler: 2
)cfg",
                                   "cfg");
  const Scenario& s = p.scenarios[0];
  ASSERT_TRUE(s.embedded());
  EXPECT_EQ(s.n(), 2);
  EXPECT_EQ(s.euler, 2);
  EXPECT_EQ(s.ambient_features.size(), 3u);
  const auto pack = extrinsic_pack(s.embedding, std::vector<double>{1.0, 0.4});
  EXPECT_NEAR(std::abs(pack.H), 1.0, 1e-12);
}

TEST(Config, EmbeddingDimensionMismatch) {
  const std::string msg = error_of(R"cfg(
scenarios:
  - name: bad
    chart: [{name: t}]
    ambient: {chart: [{name: X, kind: interval, lo: -1, hi: 1}]}
    embedding: ["t"]
)cfg");
  EXPECT_TRUE(contains(msg, "scenarios[0]")) << msg;
}

TEST(Config, EchoRoundTrips) {
  RunPlan p = plan_from_text(std::string(kBumpy) + "nodes: {periodic: 12}\nseed: 99\ntolerances: {weight: 2e-8}\n",
                             "cfg");
  const json echo = config_echo(p);
  EXPECT_EQ(echo["nodes"]["periodic"], 12);
  EXPECT_EQ(echo["tolerances"]["weight"], 2e-8);
  const RunPlan q = plan_from_json(echo);
  EXPECT_EQ(config_echo(q).dump(), echo.dump());
  // a report is accepted in place of a config
  const json report{{"schema_version", 1}, {"config", echo}};
  EXPECT_EQ(config_echo(plan_from_text(report.dump(), "r")).dump(), echo.dump());
}

TEST(Config, LoadConfigFromFile) {
  const std::string path = testing::TempDir() + "exq_cfg.yaml";
  {
    std::ofstream out(path);
    out << "suite: intrinsic\nscenarios: [\"ROUND_S(3,1)\"]\n";
  }
  const RunPlan p = load_config(path);
  EXPECT_EQ(p.scenarios[0].n(), 3);
  std::remove(path.c_str());
  EXPECT_THROW(load_config(path), ConfigError);
}

TEST(Report, JsonAndCsv) {
  RunPlan p = plan_from_text("suite: intrinsic\nscenarios: [\"ROUND_S(2,1)\"]\npoints: 4\npairs: 1\n", "cfg");
  const SuiteOutcome out = run_suite(p);
  EXPECT_EQ(out.exit_code, 0);
  const json& r = out.report;
  EXPECT_EQ(r["schema_version"], 1);
  EXPECT_EQ(r["suite"], "intrinsic");
  EXPECT_EQ(r["scenarios"][0]["name"], "ROUND_S(2,1)");
  EXPECT_TRUE(r["summary"]["all_pass"].get<bool>());
  EXPECT_GT(r["scenarios"][0]["checks"].size(), 0u);
  const std::string csv = report_csv(out.results);
  EXPECT_EQ(csv.rfind("scenario,check,pass,", 0), 0u);
  EXPECT_TRUE(contains(csv, "\"ROUND_S(2,1)\",cov_p2,true"));
  // rerunning the echo reproduces the report exactly
  EXPECT_EQ(dump_report(run_suite(plan_from_json(r["config"])).report), dump_report(r));
}

TEST(Report, FailingCheckGivesExitOne) {
  RunPlan p = plan_from_text(
      "suite: intrinsic\nscenarios: [\"ROUND_S(2,1)\"]\npoints: 2\npairs: 1\ntolerances: {pointwise: 1e-30}\n", "cfg");
  EXPECT_EQ(run_suite(p).exit_code, 1);
}

TEST(Packs, RoundSphereJIsTwo) {
  const Scenario s = make_scenario("ROUND_S(4,1)");
  const json j = pack_json(curvature_pack(s.metric, std::vector<double>{0.7, 1.1, 0.3, 2.0}));
  EXPECT_NEAR(j["J"].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(j["scal"].get<double>(), 12.0, 1e-11);
  EXPECT_EQ(j["riemann"].size(), 4u);
  EXPECT_EQ(j["riemann"][0][0][0].size(), 4u);
  EXPECT_NEAR(j["weyl"][0][1][0][1].get<double>(), 0.0, 1e-12);
}

TEST(Packs, PointParsing) {
  EXPECT_EQ(parse_point("0.5, 1,pi/2").size(), 3u);
  EXPECT_NEAR(parse_point("pi/2")[0], std::numbers::pi / 2, 1e-16);
  EXPECT_THROW(parse_point("1,,2"), ConfigError);
  EXPECT_THROW(parse_point("x"), ConfigError);
}
