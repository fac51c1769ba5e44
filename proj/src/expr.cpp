#include "exq/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace exq {

namespace {

using Kind = ExprNode::Kind;
using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Expr run() {
    skip_ws();
    if (pos_ == s_.size()) throw ParseError("empty expression", pos_);
    Expr e = parse_expr();
    skip_ws();
    if (pos_ < s_.size()) {
      if (s_[pos_] == ')') throw ParseError("unbalanced ')'", pos_);
      throw ParseError(std::string("unexpected character '") + s_[pos_] + "'", pos_);
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+'))
        lhs = Expr::binary(Kind::Add, lhs, parse_term());
      else if (accept('-'))
        lhs = Expr::binary(Kind::Sub, lhs, parse_term());
      else
        return lhs;
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*'))
        lhs = Expr::binary(Kind::Mul, lhs, parse_unary());
      else if (accept('/'))
        lhs = Expr::binary(Kind::Div, lhs, parse_unary());
      else
        return lhs;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::unary_minus(parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (!accept('^')) return base;
    skip_ws();
    const std::size_t at = pos_;
    Expr ex = parse_unary();
    double value;
    if (!literal_value(ex.root(), value)) throw ParseError("exponent must be a numeric literal", at);
    return Expr::power(base, value);
  }

  // Numbers, negated numbers and towers like 3^2 fold to a literal.
  static bool literal_value(const ExprNode& n, double& out) {
    switch (n.kind) {
      case Kind::Number:
        out = n.number;
        return true;
      case Kind::Neg:
        if (!literal_value(*n.lhs, out)) return false;
        out = -out;
        return true;
      case Kind::Pow:
        if (!literal_value(*n.lhs, out)) return false;
        out = std::pow(out, n.number);
        return std::isfinite(out);
      default:
        return false;
    }
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t nd = digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      nd += digits();
    }
    if (nd == 0) throw ParseError("malformed number", start);
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      const std::size_t epos = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError("malformed exponent in number", epos);
    }
    double v = 0.0;
    const char* first = s_.data() + start;
    const char* last = s_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw ParseError("number out of range", start);
    return Expr::number(v);
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      const std::size_t open = pos_;
      ++pos_;
      Expr e = parse_expr();
      if (!accept(')')) {
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError("unbalanced '(' opened", open);
        throw ParseError("expected ')'", pos_);
      }
      return e;
    }
    if (is_ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
      const std::string name(s_.substr(start, pos_ - start));
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == '(') {
        static const std::pair<const char*, Func> table[] = {
            {"sin", Func::Sin}, {"cos", Func::Cos}, {"exp", Func::Exp},
            {"log", Func::Log}, {"sqrt", Func::Sqrt}};
        for (const auto& [fname, f] : table) {
          if (name == fname) {
            const std::size_t open = pos_;
            ++pos_;
            Expr arg = parse_expr();
            if (!accept(')')) {
              skip_ws();
              if (pos_ >= s_.size()) throw ParseError("unbalanced '(' opened", open);
              throw ParseError("expected ')'", pos_);
            }
            return Expr::call(f, arg);
          }
        }
        throw ParseError("unknown function '" + name + "'", start);
      }
      if (name == "pi") return Expr(make({.kind = Kind::Pi}));
      return Expr::variable(name);
    }
    if (c == ')') throw ParseError("unbalanced ')'", pos_);
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

int precedence(const ExprNode& n) {
  switch (n.kind) {
    case Kind::Add:
    case Kind::Sub:
      return 1;
    case Kind::Mul:
    case Kind::Div:
      return 2;
    case Kind::Neg:
      return 3;
    case Kind::Pow:
      return 4;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void print_node(const ExprNode& n, std::string& out);

void print_child(const ExprNode& child, bool parens, std::string& out) {
  if (parens) out += '(';
  print_node(child, out);
  if (parens) out += ')';
}

void print_node(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case Kind::Number:
      out += format_number(n.number);
      return;
    case Kind::Pi:
      out += "pi";
      return;
    case Kind::Var:
      out += n.name;
      return;
    case Kind::Neg:
      out += '-';
      print_child(*n.lhs, precedence(*n.lhs) < 3, out);
      return;
    case Kind::Pow:
      print_child(*n.lhs, precedence(*n.lhs) <= 4, out);
      out += '^';
      out += format_number(n.number);
      return;
    case Kind::Call:
      out += func_name(n.func);
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
    default: {
      const int p = precedence(n);
      const char* op = n.kind == Kind::Add   ? " + "
                       : n.kind == Kind::Sub ? " - "
                       : n.kind == Kind::Mul ? "*"
                                             : "/";
      print_child(*n.lhs, precedence(*n.lhs) < p, out);
      out += op;
      print_child(*n.rhs, precedence(*n.rhs) <= p, out);
    }
  }
}

void collect_vars(const ExprNode& n, std::vector<std::string>& out) {
  if (n.kind == Kind::Var) {
    if (std::find(out.begin(), out.end(), n.name) == out.end()) out.push_back(n.name);
    return;
  }
  if (n.lhs) collect_vars(*n.lhs, out);
  if (n.rhs) collect_vars(*n.rhs, out);
}

NodePtr bind_node(const NodePtr& n, std::span<const std::string> names) {
  if (n->kind == Kind::Var) {
    auto it = std::find(names.begin(), names.end(), n->name);
    ExprNode copy = *n;
    copy.slot = static_cast<int>(it - names.begin());
    return make(std::move(copy));
  }
  if (!n->lhs) return n;
  ExprNode copy = *n;
  copy.lhs = bind_node(n->lhs, names);
  if (n->rhs) copy.rhs = bind_node(n->rhs, names);
  return make(std::move(copy));
}

bool bound_node(const ExprNode& n) {
  if (n.kind == Kind::Var) return n.slot >= 0;
  if (n.lhs && !bound_node(*n.lhs)) return false;
  if (n.rhs && !bound_node(*n.rhs)) return false;
  return true;
}

bool integral_exponent(double p, int& n) {
  if (std::floor(p) != p || std::abs(p) > 64) return false;
  n = static_cast<int>(p);
  return true;
}

Jet eval_node(const ExprNode& n, std::span<const Jet> values, int nvars, int degree) {
  switch (n.kind) {
    case Kind::Number:
      return Jet::constant(n.number, nvars, degree);
    case Kind::Pi:
      return Jet::constant(std::numbers::pi, nvars, degree);
    case Kind::Var:
      if (n.slot < 0 || n.slot >= static_cast<int>(values.size()))
        throw ConfigError("unbound variable '" + n.name + "'");
      return values[n.slot];
    case Kind::Neg:
      return -eval_node(*n.lhs, values, nvars, degree);
    case Kind::Add:
      return eval_node(*n.lhs, values, nvars, degree) + eval_node(*n.rhs, values, nvars, degree);
    case Kind::Sub:
      return eval_node(*n.lhs, values, nvars, degree) - eval_node(*n.rhs, values, nvars, degree);
    case Kind::Mul:
      return eval_node(*n.lhs, values, nvars, degree) * eval_node(*n.rhs, values, nvars, degree);
    case Kind::Div:
      return eval_node(*n.lhs, values, nvars, degree) / eval_node(*n.rhs, values, nvars, degree);
    case Kind::Pow: {
      Jet base = eval_node(*n.lhs, values, nvars, degree);
      int k;
      if (integral_exponent(n.number, k)) return powi(base, k);
      return powf(base, n.number);
    }
    case Kind::Call: {
      Jet a = eval_node(*n.lhs, values, nvars, degree);
      switch (n.func) {
        case Func::Sin:
          return sin(a);
        case Func::Cos:
          return cos(a);
        case Func::Exp:
          return exp(a);
        case Func::Log:
          return log(a);
        case Func::Sqrt:
          return sqrt(a);
      }
    }
  }
  throw Error("corrupt expression node");
}

double eval_double(const ExprNode& n, std::span<const double> values) {
  switch (n.kind) {
    case Kind::Number:
      return n.number;
    case Kind::Pi:
      return std::numbers::pi;
    case Kind::Var:
      if (n.slot < 0 || n.slot >= static_cast<int>(values.size()))
        throw ConfigError("unbound variable '" + n.name + "'");
      return values[n.slot];
    case Kind::Neg:
      return -eval_double(*n.lhs, values);
    case Kind::Add:
      return eval_double(*n.lhs, values) + eval_double(*n.rhs, values);
    case Kind::Sub:
      return eval_double(*n.lhs, values) - eval_double(*n.rhs, values);
    case Kind::Mul:
      return eval_double(*n.lhs, values) * eval_double(*n.rhs, values);
    case Kind::Div: {
      const double d = eval_double(*n.rhs, values);
      if (!(std::abs(d) > 1e-300)) throw SingularFieldError("division by zero");
      return eval_double(*n.lhs, values) / d;
    }
    case Kind::Pow: {
      const double b = eval_double(*n.lhs, values);
      int k;
      if (integral_exponent(n.number, k)) {
        if (k < 0 && !(std::abs(b) > 1e-300)) throw SingularFieldError("division by zero");
        return std::pow(b, k);
      }
      if (!(b > 0.0)) throw SingularFieldError("real power of a non-positive value");
      return std::pow(b, n.number);
    }
    case Kind::Call: {
      const double a = eval_double(*n.lhs, values);
      switch (n.func) {
        case Func::Sin:
          return std::sin(a);
        case Func::Cos:
          return std::cos(a);
        case Func::Exp:
          return std::exp(a);
        case Func::Log:
          if (!(a > 0.0)) throw SingularFieldError("log of a non-positive value");
          return std::log(a);
        case Func::Sqrt:
          if (!(a > 0.0)) throw SingularFieldError("sqrt of a non-positive value");
          return std::sqrt(a);
      }
    }
  }
  throw Error("corrupt expression node");
}

}  // namespace

const char* func_name(Func f) {
  switch (f) {
    case Func::Sin:
      return "sin";
    case Func::Cos:
      return "cos";
    case Func::Exp:
      return "exp";
    case Func::Log:
      return "log";
    case Func::Sqrt:
      return "sqrt";
  }
  return "?";
}

Expr Expr::number(double v) { return Expr(make({.kind = Kind::Number, .number = v})); }

Expr Expr::variable(std::string name) {
  return Expr(make({.kind = Kind::Var, .name = std::move(name)}));
}

Expr Expr::unary_minus(Expr a) { return Expr(make({.kind = Kind::Neg, .lhs = a.root_})); }

Expr Expr::binary(ExprNode::Kind op, Expr a, Expr b) {
  return Expr(make({.kind = op, .lhs = a.root_, .rhs = b.root_}));
}

Expr Expr::power(Expr base, double exponent) {
  return Expr(make({.kind = Kind::Pow, .number = exponent, .lhs = base.root_}));
}

Expr Expr::call(Func f, Expr arg) {
  return Expr(make({.kind = Kind::Call, .func = f, .lhs = arg.root_}));
}

std::vector<std::string> Expr::free_variables() const {
  std::vector<std::string> out;
  if (root_) collect_vars(*root_, out);
  return out;
}

Expr Expr::bind(std::span<const std::string> names) const {
  validate(*this, names);
  return Expr(bind_node(root_, names));
}

bool Expr::is_bound() const { return root_ && bound_node(*root_); }

Expr parse(std::string_view text) { return Parser(text).run(); }

std::string print(const Expr& e) {
  std::string out;
  if (!e.empty()) print_node(e.root(), out);
  return out;
}

void validate(const Expr& e, std::span<const std::string> allowed) {
  std::vector<std::string> bad;
  for (const auto& v : e.free_variables())
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) bad.push_back(v);
  if (bad.empty()) return;
  std::string msg = "undefined variable";
  msg += bad.size() > 1 ? "s: " : ": ";
  for (std::size_t i = 0; i < bad.size(); ++i) msg += (i ? ", " : "") + bad[i];
  throw ConfigError(msg);
}

Jet eval_jet(const Expr& bound, std::span<const Jet> values) {
  if (values.empty()) throw Error("eval_jet needs at least one jet to fix variable count");
  int degree = values[0].degree();
  for (const Jet& v : values) {
    if (v.nvars() != values[0].nvars()) throw Error("environment jets disagree on variable count");
    degree = std::min(degree, v.degree());
  }
  return eval_node(bound.root(), values, values[0].nvars(), degree);
}

Jet eval_jet(const Expr& e, std::span<const std::string> names, std::span<const Jet> values) {
  return eval_jet(e.bind(names), values);
}

double eval(const Expr& bound, std::span<const double> values) {
  return eval_double(bound.root(), values);
}

}  // namespace exq
