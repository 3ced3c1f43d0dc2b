/**
 * @file expr.hpp
 * @brief Scalar expressions in (x, y): parsing, evaluation, printing and
 * symbolic differentiation.
 *
 * Grammar (whitespace between tokens is ignored):
 *
 *     expr   := term (('+'|'-') term)*
 *     term   := factor (('*'|'/') factor)*
 *     factor := unary ('^' factor)?
 *     unary  := '-' unary | atom
 *     atom   := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
 *     func   := 'sin' | 'cos' | 'exp' | 'ln'
 *
 * Note that unary minus binds tighter than '^', so "-x^2" is (-x)^2.
 */
#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fvem::expr {

enum class Op { number, var_x, var_y, pi, add, sub, mul, div, pow, neg, sin, cos, exp, ln };

enum class Var { x, y };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  double value = 0.0;  // literal value for Op::number
  NodePtr lhs;         // sole operand of unary ops and functions
  NodePtr rhs;
};

class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, std::size_t pos)
      : std::invalid_argument(what + " at position " + std::to_string(pos)), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

class EvalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline bool is_binary(Op op) {
  return op == Op::add || op == Op::sub || op == Op::mul || op == Op::div || op == Op::pow;
}
inline bool is_function(Op op) { return op == Op::sin || op == Op::cos || op == Op::exp || op == Op::ln; }
inline bool is_leaf(Op op) { return op == Op::number || op == Op::var_x || op == Op::var_y || op == Op::pi; }

inline const char* function_name(Op op) {
  switch (op) {
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::exp: return "exp";
    case Op::ln: return "ln";
    default: return "";
  }
}

inline void print_node(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::number: {
      std::array<char, 32> buf{};
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), std::abs(n.value));
      const std::string digits(buf.data(), res.ptr);
      if (std::signbit(n.value)) out += "(-" + digits + ")";
      else out += digits;
      return;
    }
    case Op::var_x: out += 'x'; return;
    case Op::var_y: out += 'y'; return;
    case Op::pi: out += "pi"; return;
    case Op::neg:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      return;
    case Op::sin:
    case Op::cos:
    case Op::exp:
    case Op::ln:
      out += function_name(n.op);
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
    default: break;
  }
  static constexpr std::string_view symbols = "+-*/^";
  const char sym = symbols[static_cast<int>(n.op) - static_cast<int>(Op::add)];
  out += '(';
  print_node(*n.lhs, out);
  out += ' ';
  out += sym;
  out += ' ';
  print_node(*n.rhs, out);
  out += ')';
}

inline std::string print(const NodePtr& n) {
  std::string s;
  print_node(*n, s);
  return s;
}

namespace detail {

struct Instr {
  Op op;
  double value;
  const Node* node;
};

inline void compile(const Node* n, std::vector<Instr>& code, std::size_t& depth, std::size_t& max_depth) {
  if (n->lhs) compile(n->lhs.get(), code, depth, max_depth);
  if (n->rhs) compile(n->rhs.get(), code, depth, max_depth);
  if (is_leaf(n->op)) {
    ++depth;
    max_depth = std::max(max_depth, depth);
  } else if (is_binary(n->op)) {
    --depth;
  }
  code.push_back({n->op, n->op == Op::pi ? std::numbers::pi : n->value, n});
}

[[noreturn]] inline void eval_fail(const char* what, const Node* n) {
  throw EvalError(std::string(what) + " in subterm " + print(std::shared_ptr<const Node>(std::shared_ptr<const Node>{}, n)));
}

}  // namespace detail

/// Immutable expression tree with a precompiled postfix program for evaluation.
class Expr {
 public:
  Expr() : Expr(std::make_shared<const Node>(Node{Op::number, 0.0, nullptr, nullptr})) {}
  explicit Expr(NodePtr root) : root_(std::move(root)) {
    std::size_t depth = 0;
    compile(root_.get(), code_, depth, max_depth_);
  }

  const NodePtr& root() const { return root_; }

  double operator()(double x, double y) const {
    if (max_depth_ <= inline_stack) {
      std::array<double, inline_stack> stack;
      return run(stack.data(), x, y);
    }
    std::vector<double> stack(max_depth_);
    return run(stack.data(), x, y);
  }

  std::string str() const { return print(root_); }

  bool is_constant() const {
    for (const auto& i : code_)
      if (i.op == Op::var_x || i.op == Op::var_y) return false;
    return true;
  }

  std::size_t size() const { return code_.size(); }

 private:
  static constexpr std::size_t inline_stack = 64;

  static void compile(const Node* n, std::vector<detail::Instr>& code, std::size_t& depth, std::size_t& max_depth) {
    detail::compile(n, code, depth, max_depth);
  }

  double run(double* stack, double x, double y) const {
    std::size_t top = 0;
    for (const auto& in : code_) {
      switch (in.op) {
        case Op::number:
        case Op::pi: stack[top++] = in.value; break;
        case Op::var_x: stack[top++] = x; break;
        case Op::var_y: stack[top++] = y; break;
        case Op::add: --top; stack[top - 1] += stack[top]; break;
        case Op::sub: --top; stack[top - 1] -= stack[top]; break;
        case Op::mul: --top; stack[top - 1] *= stack[top]; break;
        case Op::div:
          --top;
          if (stack[top] == 0.0) detail::eval_fail("division by zero", in.node);
          stack[top - 1] /= stack[top];
          break;
        case Op::pow: {
          --top;
          const double r = std::pow(stack[top - 1], stack[top]);
          if (std::isnan(r) && !std::isnan(stack[top - 1]) && !std::isnan(stack[top]))
            detail::eval_fail("power of negative base with non-integer exponent", in.node);
          stack[top - 1] = r;
          break;
        }
        case Op::neg: stack[top - 1] = -stack[top - 1]; break;
        case Op::sin: stack[top - 1] = std::sin(stack[top - 1]); break;
        case Op::cos: stack[top - 1] = std::cos(stack[top - 1]); break;
        case Op::exp: stack[top - 1] = std::exp(stack[top - 1]); break;
        case Op::ln:
          if (!(stack[top - 1] > 0.0)) detail::eval_fail("logarithm of non-positive value", in.node);
          stack[top - 1] = std::log(stack[top - 1]);
          break;
      }
    }
    return stack[0];
  }

  NodePtr root_;
  std::vector<detail::Instr> code_;
  std::size_t max_depth_ = 0;
};

inline double eval(const Expr& e, double x, double y) { return e(x, y); }

// ---------------------------------------------------------------------------
// Construction helpers. The make_* builders fold constants and drop neutral
// elements; the parser uses raw nodes so printing reflects the input.

inline NodePtr number(double v) { return std::make_shared<const Node>(Node{Op::number, v, nullptr, nullptr}); }
inline NodePtr variable(Var v) {
  return std::make_shared<const Node>(Node{v == Var::x ? Op::var_x : Op::var_y, 0.0, nullptr, nullptr});
}
inline NodePtr raw_unary(Op op, NodePtr a) { return std::make_shared<const Node>(Node{op, 0.0, std::move(a), nullptr}); }
inline NodePtr raw_binary(Op op, NodePtr a, NodePtr b) {
  return std::make_shared<const Node>(Node{op, 0.0, std::move(a), std::move(b)});
}

namespace detail {
inline bool is_num(const NodePtr& n, double v) { return n->op == Op::number && n->value == v; }
inline bool is_num(const NodePtr& n) { return n->op == Op::number; }
}  // namespace detail

inline NodePtr make_neg(NodePtr a) {
  if (detail::is_num(a)) return number(-a->value);
  if (a->op == Op::neg) return a->lhs;
  return raw_unary(Op::neg, std::move(a));
}

inline NodePtr make_add(NodePtr a, NodePtr b) {
  if (detail::is_num(a) && detail::is_num(b)) return number(a->value + b->value);
  if (detail::is_num(a, 0.0)) return b;
  if (detail::is_num(b, 0.0)) return a;
  return raw_binary(Op::add, std::move(a), std::move(b));
}

inline NodePtr make_sub(NodePtr a, NodePtr b) {
  if (detail::is_num(a) && detail::is_num(b)) return number(a->value - b->value);
  if (detail::is_num(b, 0.0)) return a;
  if (detail::is_num(a, 0.0)) return make_neg(std::move(b));
  return raw_binary(Op::sub, std::move(a), std::move(b));
}

inline NodePtr make_mul(NodePtr a, NodePtr b) {
  if (detail::is_num(a) && detail::is_num(b)) return number(a->value * b->value);
  if (detail::is_num(a, 0.0) || detail::is_num(b, 0.0)) return number(0.0);
  if (detail::is_num(a, 1.0)) return b;
  if (detail::is_num(b, 1.0)) return a;
  if (detail::is_num(a, -1.0)) return make_neg(std::move(b));
  if (detail::is_num(b, -1.0)) return make_neg(std::move(a));
  return raw_binary(Op::mul, std::move(a), std::move(b));
}

inline NodePtr make_div(NodePtr a, NodePtr b) {
  if (detail::is_num(a) && detail::is_num(b) && b->value != 0.0) return number(a->value / b->value);
  if (detail::is_num(a, 0.0)) return number(0.0);
  if (detail::is_num(b, 1.0)) return a;
  return raw_binary(Op::div, std::move(a), std::move(b));
}

inline NodePtr make_pow(NodePtr a, NodePtr b) {
  if (detail::is_num(b, 1.0)) return a;
  if (detail::is_num(b, 0.0)) return number(1.0);
  return raw_binary(Op::pow, std::move(a), std::move(b));
}

inline NodePtr make_fn(Op op, NodePtr a) {
  if (detail::is_num(a)) {
    switch (op) {
      case Op::sin: return number(std::sin(a->value));
      case Op::cos: return number(std::cos(a->value));
      case Op::exp: return number(std::exp(a->value));
      case Op::ln:
        if (a->value > 0.0) return number(std::log(a->value));
        break;
      default: break;
    }
  }
  return raw_unary(op, std::move(a));
}

// ---------------------------------------------------------------------------
// Parser

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError(std::string("unexpected '") + s_[pos_] + "'", pos_);
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

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= s_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = raw_binary(Op::add, lhs, term());
      else if (accept('-')) lhs = raw_binary(Op::sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (accept('*')) lhs = raw_binary(Op::mul, lhs, factor());
      else if (accept('/')) lhs = raw_binary(Op::div, lhs, factor());
      else return lhs;
    }
  }

  NodePtr factor() {
    NodePtr base = unary();
    if (accept('^')) return raw_binary(Op::pow, base, factor());
    return base;
  }

  NodePtr unary() {
    if (accept('-')) return raw_unary(Op::neg, unary());
    return atom();
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number_literal();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept('(')) {
      NodePtr e = expr();
      expect(')');
      return e;
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr number_literal() {
    const std::size_t start = pos_;
    const auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t n = digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) throw ParseError("malformed number", start);
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t k = pos_ + 1;
      if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
      if (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) {
        pos_ = k;
        digits();
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (res.ec != std::errc{} || res.ptr != s_.data() + pos_) throw ParseError("malformed number", start);
    return number(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string_view id = s_.substr(start, pos_ - start);
    if (id == "x") return variable(Var::x);
    if (id == "y") return variable(Var::y);
    if (id == "pi") return std::make_shared<const Node>(Node{Op::pi, 0.0, nullptr, nullptr});
    Op fn;
    if (id == "sin") fn = Op::sin;
    else if (id == "cos") fn = Op::cos;
    else if (id == "exp") fn = Op::exp;
    else if (id == "ln") fn = Op::ln;
    else throw ParseError("unknown identifier '" + std::string(id) + "'", start);
    expect('(');
    NodePtr arg = expr();
    expect(')');
    return raw_unary(fn, std::move(arg));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse(std::string_view text) { return Expr(detail::Parser(text).parse()); }

inline std::string print(const Expr& e) { return e.str(); }

// ---------------------------------------------------------------------------
// Differentiation

namespace detail {

inline bool depends_on_xy(const Node& n) {
  if (n.op == Op::var_x || n.op == Op::var_y) return true;
  return (n.lhs && depends_on_xy(*n.lhs)) || (n.rhs && depends_on_xy(*n.rhs));
}

inline NodePtr diff(const NodePtr& n, Var v) {
  switch (n->op) {
    case Op::number:
    case Op::pi: return number(0.0);
    case Op::var_x: return number(v == Var::x ? 1.0 : 0.0);
    case Op::var_y: return number(v == Var::y ? 1.0 : 0.0);
    case Op::add: return make_add(diff(n->lhs, v), diff(n->rhs, v));
    case Op::sub: return make_sub(diff(n->lhs, v), diff(n->rhs, v));
    case Op::neg: return make_neg(diff(n->lhs, v));
    case Op::mul:
      return make_add(make_mul(diff(n->lhs, v), n->rhs), make_mul(n->lhs, diff(n->rhs, v)));
    case Op::div: {
      const NodePtr num = make_sub(make_mul(diff(n->lhs, v), n->rhs), make_mul(n->lhs, diff(n->rhs, v)));
      return make_div(num, make_mul(n->rhs, n->rhs));
    }
    case Op::pow: {
      const NodePtr& a = n->lhs;
      const NodePtr& b = n->rhs;
      if (!depends_on_xy(*b)) {
        // b * a^(b-1) * a'
        return make_mul(make_mul(b, make_pow(a, make_sub(b, number(1.0)))), diff(a, v));
      }
      // a^b = exp(b ln a)  =>  a^b (b' ln a + b a' / a)
      const NodePtr inner = make_add(make_mul(diff(b, v), make_fn(Op::ln, a)), make_div(make_mul(b, diff(a, v)), a));
      return make_mul(n, inner);
    }
    case Op::sin: return make_mul(make_fn(Op::cos, n->lhs), diff(n->lhs, v));
    case Op::cos: return make_mul(make_neg(make_fn(Op::sin, n->lhs)), diff(n->lhs, v));
    case Op::exp: return make_mul(n, diff(n->lhs, v));
    case Op::ln: return make_div(diff(n->lhs, v), n->lhs);
  }
  throw std::logic_error("unhandled expression node");
}

}  // namespace detail

inline Expr differentiate(const Expr& e, Var v) { return Expr(detail::diff(e.root(), v)); }

// Arithmetic on whole expressions, used to build derived problem data.
inline Expr operator+(const Expr& a, const Expr& b) { return Expr(make_add(a.root(), b.root())); }
inline Expr operator-(const Expr& a, const Expr& b) { return Expr(make_sub(a.root(), b.root())); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr(make_mul(a.root(), b.root())); }
inline Expr operator-(const Expr& a) { return Expr(make_neg(a.root())); }
inline Expr constant(double v) { return Expr(number(v)); }

}  // namespace fvem::expr
