#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ifsm {

// Closed-form scalar expression over state coordinates x0, x1, ... and
// parameter coordinates l0, l1, ...
//
// Grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | primary
//   primary := number | x<k> | l<k> | func '(' expr (',' expr)* ')' | '(' expr ')'
//   func    := exp | abs | min | max      (min/max take two or more arguments)
//
// The source text is the serialized form.
class Expression {
 public:
  Expression() = default;
  static Expression parse(const std::string& source);
  static Expression constant(double v);

  const std::string& source() const { return source_; }
  double eval(std::span<const double> x, std::span<const double> lambda = {}) const;

  // Highest variable index referenced, +1 (0 when unused).
  std::size_t state_arity() const { return state_arity_; }
  std::size_t param_arity() const { return param_arity_; }

 private:
  enum class Op { constant, state_var, param_var, add, sub, mul, div, neg, exp, abs, min, max };
  struct Node {
    Op op;
    double value = 0.0;
    std::size_t index = 0;             // variable index
    std::vector<std::size_t> children;
  };

  friend class ExpressionParser;
  double eval_node(std::size_t n, std::span<const double> x, std::span<const double> lambda) const;

  std::string source_;
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
  std::size_t state_arity_ = 0;
  std::size_t param_arity_ = 0;
};

}  // namespace ifsm
