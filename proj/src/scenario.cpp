#include "exq/scenario.hpp"

#include <cmath>
#include <numbers>

namespace exq {

namespace {

constexpr double kPi = std::numbers::pi;

std::string num(double v) {
  Expr e = Expr::number(v);
  return print(e);
}

Chart torus_chart(int n, const std::string& prefix, int nodes = 0) {
  std::vector<Axis> axes;
  for (int i = 0; i < n; ++i)
    axes.push_back({prefix + std::to_string(i + 1), 0.0, 2 * kPi, Axis::Kind::Periodic, nodes});
  return Chart(axes);
}

// Iterated polar angles a1..a_{n-1} in (0, π) and a longitude b.
std::vector<Axis> sphere_axes(int n, const std::string& tag) {
  std::vector<Axis> axes;
  for (int i = 0; i + 1 < n; ++i) axes.push_back({"a" + tag + std::to_string(i + 1), 0.0, kPi, Axis::Kind::Polar, 0});
  axes.push_back({"b" + tag, 0.0, 2 * kPi, Axis::Kind::Periodic, 0});
  return axes;
}

// Unit-sphere Cartesian coordinates in the angles of sphere_axes.
std::vector<std::string> sphere_cartesian(const std::vector<Axis>& axes) {
  const int n = static_cast<int>(axes.size());
  std::vector<std::string> out;
  std::string prod;
  for (int i = 0; i + 1 < n; ++i) {
    out.push_back((prod.empty() ? "" : prod + "*") + "cos(" + axes[i].name + ")");
    prod += (prod.empty() ? "" : "*") + std::string("sin(") + axes[i].name + ")";
  }
  const std::string& b = axes.back().name;
  out.push_back((prod.empty() ? "" : prod + "*") + "cos(" + b + ")");
  out.push_back((prod.empty() ? "" : prod + "*") + "sin(" + b + ")");
  return out;
}

// Diagonal entries of the round metric of radius² r2 in sphere_axes.
std::vector<std::string> round_diagonal(const std::vector<Axis>& axes, double r2) {
  std::vector<std::string> d;
  std::string prefix = num(r2);
  for (std::size_t i = 0; i < axes.size(); ++i) {
    d.push_back(prefix);
    if (i + 1 < axes.size()) prefix += "*sin(" + axes[i].name + ")^2";
  }
  return d;
}

using Matrix = std::vector<std::vector<std::string>>;

Matrix zero_matrix(int m) { return Matrix(m, std::vector<std::string>(m, "0")); }

Metric metric_from(const Chart& c, const Matrix& m) {
  std::vector<std::vector<Expr>> g(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (const auto& s : m[i]) g[i].push_back(parse(s));
  return Metric::from_expressions(c, g);
}

// Diagonally dominant, generic perturbation of the flat metric on a torus.
Matrix perturbed_torus_matrix(int m, const std::string& p) {
  Matrix g = zero_matrix(m);
  auto v = [&](int i) { return p + std::to_string((i % m) + 1); };
  for (int i = 0; i < m; ++i) {
    const double a = 0.15 - 0.02 * i;
    g[i][i] = "exp(" + num(a) + "*sin(" + v(i + 1) + " + " + v(i) + "))";
    if (i % 2 == 1) g[i][i] = "1 + " + num(a) + "*cos(" + v(i + 2) + ")";
  }
  for (int i = 0; i + 1 < m; ++i) {
    const std::string c = num(0.08 - 0.01 * i) + "*cos(" + v(i + 2) + ")";
    g[i][i + 1] = g[i + 1][i] = c;
  }
  return g;
}

std::vector<Expr> exprs(const std::vector<std::string>& s) {
  std::vector<Expr> out;
  for (const auto& t : s) out.push_back(parse(t));
  return out;
}

std::vector<Expr> torus_features(int n, const std::string& p) {
  std::vector<std::string> f;
  for (int i = 1; i <= n; ++i) {
    f.push_back("sin(" + p + std::to_string(i) + ")");
    f.push_back("cos(" + p + std::to_string(i) + ")");
  }
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) f.push_back("sin(" + p + std::to_string(i) + " + " + p + std::to_string(j) + ")");
  return exprs(f);
}

// Pairwise products of unit-sphere coordinates are smooth at the poles too.
std::vector<Expr> sphere_features(const std::vector<std::string>& cart) {
  std::vector<std::string> f = cart;
  for (std::size_t i = 0; i < cart.size(); ++i)
    for (std::size_t j = i + 1; j < cart.size() && j < i + 3; ++j) f.push_back(cart[i] + "*" + cart[j]);
  return exprs(f);
}

std::vector<double> default_coefficients(std::size_t k) {
  std::vector<double> c;
  for (std::size_t i = 0; i < k; ++i) c.push_back(i == 0 ? 0.12 : (i % 2 ? -0.07 : 0.05) / (1.0 + 0.5 * i));
  return c;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

// "NAME(arg, arg)" → NAME and top-level args.
void split_call(const std::string& text, std::string& head, std::vector<std::string>& args) {
  const std::string s = trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos) {
    head = s;
    return;
  }
  if (s.back() != ')') throw ConfigError("malformed scenario name '" + s + "'");
  head = trim(s.substr(0, open));
  int depth = 0;
  std::string cur;
  for (std::size_t i = open + 1; i + 1 < s.size(); ++i) {
    const char c = s[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth < 0) throw ConfigError("unbalanced parentheses in scenario name '" + s + "'");
    if (c == ',' && depth == 0) {
      args.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (depth != 0) throw ConfigError("unbalanced parentheses in scenario name '" + s + "'");
  if (!trim(cur).empty() || !args.empty()) args.push_back(trim(cur));
}

int int_arg(const std::vector<std::string>& a, std::size_t i, int fallback, const std::string& name) {
  if (i >= a.size()) return fallback;
  try {
    std::size_t used = 0;
    const int v = std::stoi(a[i], &used);
    if (used != a[i].size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(name + ": expected an integer argument, got '" + a[i] + "'");
  }
}

double real_arg(const std::vector<std::string>& a, std::size_t i, double fallback, const std::string& name) {
  if (i >= a.size()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(a[i], &used);
    if (used != a[i].size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(name + ": expected a number, got '" + a[i] + "'");
  }
}

void need_range(int v, int lo, int hi, const std::string& what) {
  if (v < lo || v > hi)
    throw ConfigError(what + " must be in " + std::to_string(lo) + ".." + std::to_string(hi));
}

Scenario flat_torus(int n) {
  need_range(n, 2, 6, "FLAT_T dimension");
  Scenario s;
  s.name = "FLAT_T(" + std::to_string(n) + ")";
  s.description = "flat torus T^" + std::to_string(n) + " with sides 2π";
  Chart c = torus_chart(n, "x");
  s.metric = Metric::euclidean(c);
  if (n == 4) s.euler = 0;
  s.conformally_flat = true;
  s.flat = true;
  s.features = torus_features(n, "x");
  return s;
}

Scenario perturbed_torus(int n) {
  need_range(n, 2, 6, "PERTURBED_T dimension");
  Scenario s;
  s.name = "PERTURBED_T(" + std::to_string(n) + ")";
  s.description = "torus T^" + std::to_string(n) + " with a generic non-conformally-flat metric";
  Chart c = torus_chart(n, "x");
  s.metric = metric_from(c, perturbed_torus_matrix(n, "x"));
  if (n == 4) s.euler = 0;
  s.features = torus_features(n, "x");
  return s;
}

Scenario round_sphere(int n, double r) {
  need_range(n, 2, 6, "ROUND_S dimension");
  if (!(r > 0)) throw ConfigError("ROUND_S radius must be positive");
  Scenario s;
  s.name = "ROUND_S(" + std::to_string(n) + "," + num(r) + ")";
  s.description = "round sphere of radius " + num(r) + " in iterated polar angles";
  auto axes = sphere_axes(n, "");
  Chart c(axes);
  Matrix m = zero_matrix(n);
  auto d = round_diagonal(axes, r * r);
  for (int i = 0; i < n; ++i) m[i][i] = d[i];
  s.metric = metric_from(c, m);
  s.euler = 1 + (n % 2 == 0 ? 1 : -1);
  s.conformally_flat = true;
  s.features = sphere_features(sphere_cartesian(axes));
  return s;
}

Scenario s2xs2() {
  Scenario s;
  s.name = "S2xS2";
  s.description = "product of unit 2-spheres";
  auto a1 = sphere_axes(2, "");
  auto a2 = sphere_axes(2, "p");
  std::vector<Axis> axes = a1;
  axes.insert(axes.end(), a2.begin(), a2.end());
  Chart c(axes);
  Matrix m = zero_matrix(4);
  auto d1 = round_diagonal(a1, 1.0), d2 = round_diagonal(a2, 1.0);
  m[0][0] = d1[0];
  m[1][1] = d1[1];
  m[2][2] = d2[0];
  m[3][3] = d2[1];
  s.metric = metric_from(c, m);
  s.euler = 4;
  auto f1 = sphere_cartesian(a1), f2 = sphere_cartesian(a2);
  std::vector<std::string> f = f1;
  f.insert(f.end(), f2.begin(), f2.end());
  f.push_back(f1[0] + "*" + f2[0]);
  f.push_back(f1[1] + "*" + f2[2]);
  s.features = exprs(f);
  return s;
}

std::vector<std::string> interval_features_flat(int m, double scale) {
  std::vector<std::string> f;
  for (int i = 1; i <= m; ++i) f.push_back("y" + std::to_string(i) + "/" + num(scale));
  for (int i = 1; i <= m; ++i)
    for (int j = i; j <= m && j < i + 2; ++j) f.push_back("y" + std::to_string(i) + "*y" + std::to_string(j) + "/" + num(scale * scale));
  f.push_back("sin(y1/" + num(scale) + ")*cos(y2/" + num(scale) + ")");
  return f;
}

// Chooses the orientation that makes H positive at a sample point.
void orient_outward(Embedding& e, std::span<const double> x) {
  ExtrinsicContext ctx(e, x, 2);
  if (ctx.H().value() < 0) e.orientation = -e.orientation;
}

Scenario sphere_in_flat(int n, double r) {
  need_range(n, 2, 5, "SPHERE_IN_FLAT dimension");
  if (!(r > 0)) throw ConfigError("SPHERE_IN_FLAT radius must be positive");
  Scenario s;
  s.kind = Scenario::Kind::Embedded;
  s.name = "SPHERE_IN_FLAT(" + std::to_string(n) + "," + num(r) + ")";
  s.description = "round sphere of radius " + num(r) + " in flat R^" + std::to_string(n + 1) + ", outward normal";
  auto axes = sphere_axes(n, "");
  std::vector<Axis> amb;
  for (int i = 0; i <= n; ++i) amb.push_back({"y" + std::to_string(i + 1), -4 * r, 4 * r, Axis::Kind::Interval, 0});
  std::vector<Expr> iota;
  for (const auto& c : sphere_cartesian(axes)) iota.push_back(parse(num(r) + "*" + c));
  s.embedding = Embedding{Chart(axes), Metric::euclidean(Chart(amb)), iota, 1};
  std::vector<double> x;
  for (const auto& a : axes) x.push_back(a.kind == Axis::Kind::Polar ? 1.0 : 0.5);
  orient_outward(s.embedding, x);
  s.euler = 1 + (n % 2 == 0 ? 1 : -1);
  s.umbilic = true;
  s.conformally_flat = true;
  s.features = sphere_features(sphere_cartesian(axes));
  s.ambient_features = exprs(interval_features_flat(n + 1, r));
  return s;
}

std::vector<Axis> with_nodes(std::vector<Axis> axes, int nodes) {
  for (auto& a : axes) a.nodes = nodes;
  return axes;
}

std::vector<Axis> renamed(std::vector<Axis> axes) {
  for (auto& a : axes) a.name = "Y" + a.name;
  return axes;
}

// {t = 0} in R × N for a closed product N built from sphere factors.
Scenario slice_s2xs2() {
  Scenario s;
  s.kind = Scenario::Kind::Embedded;
  s.name = "SLICE_S2xS2";
  s.description = "{t=0} in R x S^2(1) x S^2(sqrt 2); totally geodesic, normal Weyl slice nonzero";
  auto a1 = sphere_axes(2, ""), a2 = sphere_axes(2, "p");
  std::vector<Axis> axes = a1;
  axes.insert(axes.end(), a2.begin(), a2.end());
  std::vector<Axis> amb{{"t", -1.0, 1.0, Axis::Kind::Interval, 0}};
  for (const auto& a : renamed(axes)) amb.push_back(a);
  Chart ac(amb);
  auto d1 = round_diagonal(a1, 1.0), d2 = round_diagonal(a2, 2.0);
  Matrix m = zero_matrix(5);
  m[0][0] = "1";
  m[1][1] = d1[0];
  m[2][2] = "sin(Ya1)^2";
  m[3][3] = d2[0];
  m[4][4] = "2*sin(Yap1)^2";
  std::vector<Expr> iota{parse("0")};
  for (const auto& a : axes) iota.push_back(parse(a.name));
  // integrals here converge to ~1e-9 on 8 nodes per axis
  s.embedding = Embedding{Chart(with_nodes(axes, 8)), metric_from(ac, m), iota, 1};
  s.euler = 4;
  s.umbilic = true;
  auto f1 = sphere_cartesian(a1), f2 = sphere_cartesian(a2);
  std::vector<std::string> f = f1;
  f.insert(f.end(), f2.begin(), f2.end());
  f.push_back(f1[0] + "*" + f2[0]);
  f.push_back(f1[1] + "*" + f2[2]);
  s.features = exprs(f);
  std::vector<std::string> af{"t", "t*t"};
  auto g1 = sphere_cartesian(renamed(a1)), g2 = sphere_cartesian(renamed(a2));
  af.insert(af.end(), g1.begin(), g1.end());
  af.insert(af.end(), g2.begin(), g2.end());
  af.push_back(g1[0] + "*" + g2[0]);
  af.push_back("t*" + g1[1]);
  s.ambient_features = exprs(af);
  return s;
}

Scenario slice_s3() {
  Scenario s;
  s.kind = Scenario::Kind::Embedded;
  s.name = "SLICE_S3";
  s.description = "{t=0} in R x (S^3, round + 0.3 d(x1)^2); totally geodesic, n = 3";
  auto axes = sphere_axes(3, "");
  std::vector<Axis> amb{{"t", -1.0, 1.0, Axis::Kind::Interval, 0}};
  for (const auto& a : renamed(axes)) amb.push_back(a);
  Chart ac(amb);
  // round metric plus 0.3 d(cos a1)⊗d(cos a1), smooth on all of S³
  Matrix m = zero_matrix(4);
  m[0][0] = "1";
  m[1][1] = "1 + 0.3*sin(Ya1)^2";
  m[2][2] = "sin(Ya1)^2";
  m[3][3] = "sin(Ya1)^2*sin(Ya2)^2";
  std::vector<Expr> iota{parse("0")};
  for (const auto& a : axes) iota.push_back(parse(a.name));
  s.embedding = Embedding{Chart(axes), metric_from(ac, m), iota, 1};
  s.euler = 0;
  s.umbilic = true;
  auto cart = sphere_cartesian(axes);
  s.features = sphere_features(cart);
  std::vector<std::string> af{"t", "t*t"};
  auto g = sphere_cartesian(renamed(axes));
  af.insert(af.end(), g.begin(), g.end());
  af.push_back(g[0] + "*" + g[1]);
  af.push_back("t*" + g[2]);
  s.ambient_features = exprs(af);
  return s;
}

std::string default_graph_u(int n) {
  std::string u = "0.15*sin(x1) + 0.1*cos(x2" + std::string(n > 2 ? " + x3)" : ")");
  if (n >= 3) u += " + 0.06*sin(x" + std::to_string(n) + " - x1)";
  if (n >= 4) u += " + 0.04*cos(x1 + x4)*sin(x2)";
  return u;
}

Scenario graph(int n, bool perturbed) {
  need_range(n, 2, 5, "GRAPH dimension");
  Scenario s;
  s.kind = Scenario::Kind::Embedded;
  s.name = std::string(perturbed ? "GRAPH(" : "GRAPH_FLAT(") + std::to_string(n) + ")";
  const std::string u = default_graph_u(n);
  s.description = "graph y" + std::to_string(n + 1) + " = " + u + " over T^" + std::to_string(n) + " in " +
                  (perturbed ? "a generic perturbed" : "the flat") + " T^" + std::to_string(n + 1);
  // the n = 4 graph needs a finer grid for its divergence integrals
  Chart sc = torus_chart(n, "x", n == 4 ? 12 : 0), ac = torus_chart(n + 1, "y");
  Metric amb = perturbed ? metric_from(ac, perturbed_torus_matrix(n + 1, "y")) : Metric::euclidean(ac);
  std::vector<Expr> iota;
  for (int i = 1; i <= n; ++i) iota.push_back(parse("x" + std::to_string(i)));
  iota.push_back(parse(u));
  s.embedding = Embedding{sc, amb, iota, 1};
  if (n == 4) s.euler = 0;
  s.conformally_flat = !perturbed;
  s.features = torus_features(n, "x");
  s.ambient_features = torus_features(n + 1, "y");
  return s;
}

Scenario conf_perturbed(Scenario base, const std::string& phi_text) {
  Scenario s = std::move(base);
  const std::vector<Expr>& feats = s.embedded() ? s.ambient_features : s.features;
  Expr phi = phi_text.empty() ? linear_combination(feats, default_coefficients(std::min<std::size_t>(feats.size(), 4)))
                              : parse(phi_text);
  const Chart& c = s.embedded() ? s.embedding.ambient.chart() : s.metric.chart();
  validate(phi, c.names());
  ScalarField f = ScalarField::from_expr(c, phi);
  s.flat = false;
  s.name = "CONF_PERTURBED(" + s.name + (phi_text.empty() ? "" : ", " + phi_text) + ")";
  s.description = "e^{2 phi} times [" + s.description + "], phi = " + print(phi);
  if (s.embedded())
    s.embedding = s.embedding.rescaled(f);
  else
    s.metric = conformal_rescale(s.metric, f);
  return s;
}

}  // namespace

std::vector<Expr> default_features(const Chart& c) {
  std::vector<std::string> f;
  for (const Axis& a : c.axes()) {
    switch (a.kind) {
      case Axis::Kind::Periodic: {
        // one full period over [lo, hi)
        const std::string arg = "2*pi*(" + a.name + " - " + num(a.lo) + ")/" + num(a.hi - a.lo);
        f.push_back("sin(" + arg + ")");
        f.push_back("cos(" + arg + ")");
        break;
      }
      case Axis::Kind::Polar:
        f.push_back("cos(" + a.name + ")");
        break;
      case Axis::Kind::Interval:
        f.push_back("(" + a.name + " - " + num(0.5 * (a.lo + a.hi)) + ")/" + num(0.5 * (a.hi - a.lo)));
        break;
    }
  }
  return exprs(f);
}

Expr linear_combination(const std::vector<Expr>& terms, const std::vector<double>& coeffs) {
  Expr out;
  for (std::size_t i = 0; i < terms.size() && i < coeffs.size(); ++i) {
    if (coeffs[i] == 0.0) continue;
    Expr t = Expr::binary(ExprNode::Kind::Mul, Expr::number(std::abs(coeffs[i])), terms[i]);
    if (out.empty())
      out = coeffs[i] < 0 ? Expr::unary_minus(t) : t;
    else
      out = Expr::binary(coeffs[i] < 0 ? ExprNode::Kind::Sub : ExprNode::Kind::Add, out, t);
  }
  return out.empty() ? Expr::number(0.0) : out;
}

Scenario make_scenario(const std::string& text) {
  std::string head;
  std::vector<std::string> a;
  split_call(text, head, a);
  auto arity = [&](std::size_t lo, std::size_t hi) {
    if (a.size() < lo || a.size() > hi)
      throw ConfigError("scenario " + head + " takes " + std::to_string(lo) +
                        (lo == hi ? "" : ".." + std::to_string(hi)) + " arguments");
  };
  if (head == "FLAT_T4") return arity(0, 0), flat_torus(4);
  if (head == "FLAT_T") return arity(1, 1), flat_torus(int_arg(a, 0, 4, head));
  if (head == "PERTURBED_T") return arity(1, 1), perturbed_torus(int_arg(a, 0, 4, head));
  if (head == "ROUND_S") return arity(1, 2), round_sphere(int_arg(a, 0, 4, head), real_arg(a, 1, 1.0, head));
  if (head == "S2xS2") return arity(0, 0), s2xs2();
  if (head == "SPHERE_IN_FLAT")
    return arity(1, 2), sphere_in_flat(int_arg(a, 0, 4, head), real_arg(a, 1, 1.0, head));
  if (head == "SLICE_S2xS2") return arity(0, 0), slice_s2xs2();
  if (head == "SLICE_S3") return arity(0, 0), slice_s3();
  if (head == "GRAPH") return arity(1, 1), graph(int_arg(a, 0, 4, head), true);
  if (head == "GRAPH_FLAT") return arity(1, 1), graph(int_arg(a, 0, 4, head), false);
  if (head == "CONF_PERTURBED") {
    arity(1, 2);
    return conf_perturbed(make_scenario(a[0]), a.size() > 1 ? a[1] : "");
  }
  std::string known;
  for (const auto& e : scenario_catalog()) known += (known.empty() ? "" : ", ") + e.pattern;
  throw ConfigError("unknown scenario '" + text + "' (known: " + known + ")");
}

const std::vector<CatalogEntry>& scenario_catalog() {
  static const std::vector<CatalogEntry> cat = {
      {"FLAT_T(n)", "flat torus T^n, 2 <= n <= 6 (FLAT_T4 is an alias)"},
      {"PERTURBED_T(n)", "torus with a generic metric that is not conformally flat"},
      {"ROUND_S(n,r)", "round sphere S^n(r) in iterated polar angles"},
      {"S2xS2", "product of unit 2-spheres, Euler characteristic 4"},
      {"SPHERE_IN_FLAT(n,r)", "umbilic sphere S^n(r) in flat R^(n+1)"},
      {"SLICE_S2xS2", "totally geodesic slice of R x S^2(1) x S^2(sqrt 2), n = 4"},
      {"SLICE_S3", "totally geodesic slice of R x (perturbed S^3), n = 3"},
      {"GRAPH(n)", "graph over T^n in a perturbed T^(n+1); not umbilic"},
      {"GRAPH_FLAT(n)", "graph over T^n in flat T^(n+1)"},
      {"CONF_PERTURBED(base[,phi])", "base with metric (ambient metric if embedded) times e^(2 phi)"},
  };
  return cat;
}

std::vector<std::string> default_scenarios() {
  return {"FLAT_T(4)",
          "ROUND_S(2,1)",
          "ROUND_S(3,1)",
          "ROUND_S(4,1)",
          "CONF_PERTURBED(ROUND_S(4,1))",
          "PERTURBED_T(4)",
          "PERTURBED_T(5)",
          "S2xS2",
          "SPHERE_IN_FLAT(4,2)",
          "SLICE_S2xS2",
          "CONF_PERTURBED(SLICE_S2xS2)",
          "SLICE_S3",
          "CONF_PERTURBED(SLICE_S3)",
          "GRAPH(2)",
          "GRAPH(3)",
          "GRAPH(4)"};
}

}  // namespace exq
