#pragma once

// A small arithmetic expression language for metric components, embedding
// maps and scalar fields.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?        exponent must reduce to a literal
//   primary := number | 'pi' | name | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | log | sqrt

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exq/jet.hpp"

namespace exq {

enum class Func { Sin, Cos, Exp, Log, Sqrt };

struct ExprNode {
  enum class Kind { Number, Pi, Var, Neg, Add, Sub, Mul, Div, Pow, Call };

  Kind kind;
  double number = 0.0;  // Number literal, or the exponent of Pow
  std::string name;     // Var
  int slot = -1;        // Var, once bound
  Func func = Func::Sin;
  std::shared_ptr<const ExprNode> lhs, rhs;
};

/// Immutable expression tree. Copies share nodes.
class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) {}

  static Expr number(double v);
  static Expr variable(std::string name);
  static Expr unary_minus(Expr a);
  static Expr binary(ExprNode::Kind op, Expr a, Expr b);
  static Expr power(Expr base, double exponent);
  static Expr call(Func f, Expr arg);

  const ExprNode& root() const { return *root_; }
  bool empty() const { return !root_; }

  /// Free variable names in first-appearance order.
  std::vector<std::string> free_variables() const;

  /// Resolves variable names to positions in `names`; throws ConfigError
  /// listing every unknown name.
  Expr bind(std::span<const std::string> names) const;
  bool is_bound() const;

 private:
  std::shared_ptr<const ExprNode> root_;
};

Expr parse(std::string_view text);

/// Canonical text with minimal parentheses; parse(print(e)) has the same tree.
std::string print(const Expr& e);

/// Succeeds iff every free variable is in `allowed`; otherwise throws
/// ConfigError naming the offenders.
void validate(const Expr& e, std::span<const std::string> allowed);

/// Evaluates a bound expression over jets; values[slot] feeds each variable.
Jet eval_jet(const Expr& bound, std::span<const Jet> values);

/// Binds against `names` then evaluates.
Jet eval_jet(const Expr& e, std::span<const std::string> names, std::span<const Jet> values);

/// Plain floating-point evaluation of a bound expression.
double eval(const Expr& bound, std::span<const double> values);

const char* func_name(Func f);

}  // namespace exq
