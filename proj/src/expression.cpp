#include "ifsm/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include "ifsm/error.hpp"

namespace ifsm {

class ExpressionParser {
 public:
  ExpressionParser(const std::string& text, Expression& out) : text_(text), out_(out) {}

  void run() {
    out_.root_ = parse_expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& what) const {
    throw ModelError("expression '" + text_ + "': " + what + " at offset " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::size_t add(Op op, std::vector<std::size_t> children = {}, double value = 0.0, std::size_t index = 0) {
    out_.nodes_.push_back({op, value, index, std::move(children)});
    return out_.nodes_.size() - 1;
  }

  std::size_t parse_expr() {
    std::size_t lhs = parse_term();
    while (true) {
      if (accept('+')) {
        lhs = add(Op::add, {lhs, parse_term()});
      } else if (accept('-')) {
        lhs = add(Op::sub, {lhs, parse_term()});
      } else {
        return lhs;
      }
    }
  }

  std::size_t parse_term() {
    std::size_t lhs = parse_unary();
    while (true) {
      if (accept('*')) {
        lhs = add(Op::mul, {lhs, parse_unary()});
      } else if (accept('/')) {
        lhs = add(Op::div, {lhs, parse_unary()});
      } else {
        return lhs;
      }
    }
  }

  std::size_t parse_unary() {
    if (accept('-')) return add(Op::neg, {parse_unary()});
    if (accept('+')) return parse_unary();
    return parse_primary();
  }

  std::size_t parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (accept('(')) {
      const std::size_t inner = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string word = text_.substr(start, pos_ - start);
      if ((word[0] == 'x' || word[0] == 'l') && word.size() > 1 &&
          std::all_of(word.begin() + 1, word.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
        const std::size_t index = std::stoul(word.substr(1));
        if (word[0] == 'x') {
          out_.state_arity_ = std::max(out_.state_arity_, index + 1);
          return add(Op::state_var, {}, 0.0, index);
        }
        out_.param_arity_ = std::max(out_.param_arity_, index + 1);
        return add(Op::param_var, {}, 0.0, index);
      }
      Op op;
      if (word == "exp") {
        op = Op::exp;
      } else if (word == "abs") {
        op = Op::abs;
      } else if (word == "min") {
        op = Op::min;
      } else if (word == "max") {
        op = Op::max;
      } else {
        pos_ = start;
        fail("unknown identifier '" + word + "'");
      }
      if (!accept('(')) fail("expected '(' after " + word);
      std::vector<std::size_t> args{parse_expr()};
      while (accept(',')) args.push_back(parse_expr());
      if (!accept(')')) fail("expected ')'");
      const bool unary = op == Op::exp || op == Op::abs;
      if (unary && args.size() != 1) fail(word + " takes one argument");
      if (!unary && args.size() < 2) fail(word + " takes at least two arguments");
      return add(op, std::move(args));
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::size_t parse_number() {
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return add(Op::constant, {}, v);
  }

  const std::string& text_;
  Expression& out_;
  std::size_t pos_ = 0;
};

Expression Expression::parse(const std::string& source) {
  Expression e;
  e.source_ = source;
  ExpressionParser(e.source_, e).run();
  return e;
}

Expression Expression::constant(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return parse(std::string(buf, ptr));
}

double Expression::eval(std::span<const double> x, std::span<const double> lambda) const {
  if (nodes_.empty()) throw ModelError("expression: evaluating an empty expression");
  if (x.size() < state_arity_ || lambda.size() < param_arity_)
    throw DimensionMismatch("expression '" + source_ + "': not enough variables supplied");
  return eval_node(root_, x, lambda);
}

double Expression::eval_node(std::size_t n, std::span<const double> x, std::span<const double> lambda) const {
  const Node& node = nodes_[n];
  auto arg = [&](std::size_t k) { return eval_node(node.children[k], x, lambda); };
  switch (node.op) {
    case Op::constant:
      return node.value;
    case Op::state_var:
      return x[node.index];
    case Op::param_var:
      return lambda[node.index];
    case Op::add:
      return arg(0) + arg(1);
    case Op::sub:
      return arg(0) - arg(1);
    case Op::mul:
      return arg(0) * arg(1);
    case Op::div:
      return arg(0) / arg(1);
    case Op::neg:
      return -arg(0);
    case Op::exp:
      return std::exp(arg(0));
    case Op::abs:
      return std::abs(arg(0));
    case Op::min: {
      double v = arg(0);
      for (std::size_t k = 1; k < node.children.size(); ++k) v = std::min(v, arg(k));
      return v;
    }
    case Op::max: {
      double v = arg(0);
      for (std::size_t k = 1; k < node.children.size(); ++k) v = std::max(v, arg(k));
      return v;
    }
  }
  return 0.0;
}

}  // namespace ifsm
