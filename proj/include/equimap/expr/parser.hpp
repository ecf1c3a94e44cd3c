#pragma once

// Recursive-descent parser for the expression grammar
//
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' unary)?
//   atom  := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'
//
// so that ^ binds tighter than unary minus, which binds tighter than * and /.
// ^ is right-associative and its exponent must reduce to a constant.

#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>

#include "equimap/error.hpp"
#include "equimap/expr/expression.hpp"

namespace equimap::expr {

inline std::optional<UnaryFn> function_from_name(std::string_view name) {
  if (name == "sin") return UnaryFn::Sin;
  if (name == "cos") return UnaryFn::Cos;
  if (name == "tan") return UnaryFn::Tan;
  if (name == "exp") return UnaryFn::Exp;
  if (name == "ln") return UnaryFn::Ln;
  if (name == "sqrt") return UnaryFn::Sqrt;
  return std::nullopt;
}

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, const Alphabet* alphabet) : text_(text), alphabet_(alphabet) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const { throw ParseError(msg, at); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' before end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + parse_term();
      } else if (accept('-')) {
        lhs = lhs - parse_term();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * parse_unary();
      } else if (accept('/')) {
        lhs = lhs / parse_unary();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    skip_ws();
    std::size_t at = pos_;
    if (!accept('^')) return base;
    Expr exponent = parse_unary();
    auto n = fold_constant(exponent);
    if (!n) fail_at("exponent must be a constant", at);
    return pow(base, *n);
  }

  // Exponents written as constant expressions, e.g. (1/2), reduce to a literal.
  static std::optional<double> fold_constant(const Expr& e) {
    switch (e.kind()) {
      case NodeKind::Constant: return e.value();
      case NodeKind::Variable: return std::nullopt;
      case NodeKind::Power: {
        auto b = fold_constant(e.arg());
        if (!b) return std::nullopt;
        return std::pow(*b, e.exponent());
      }
      case NodeKind::Unary: {
        auto a = fold_constant(e.arg());
        if (!a) return std::nullopt;
        switch (e.fn()) {
          case UnaryFn::Neg: return -*a;
          case UnaryFn::Sin: return std::sin(*a);
          case UnaryFn::Cos: return std::cos(*a);
          case UnaryFn::Tan: return std::tan(*a);
          case UnaryFn::Exp: return std::exp(*a);
          case UnaryFn::Ln: return std::log(*a);
          case UnaryFn::Sqrt: return std::sqrt(*a);
        }
        return std::nullopt;
      }
      case NodeKind::Binary: {
        auto a = fold_constant(e.lhs());
        auto b = fold_constant(e.rhs());
        if (!a || !b) return std::nullopt;
        switch (e.op()) {
          case BinaryOp::Add: return *a + *b;
          case BinaryOp::Sub: return *a - *b;
          case BinaryOp::Mul: return *a * *b;
          case BinaryOp::Div: return *a / *b;
        }
      }
    }
    return std::nullopt;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr parse_number() {
    std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t int_digits = digits();
    std::size_t frac_digits = 0;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      frac_digits = digits();
    }
    if (int_digits + frac_digits == 0) fail_at("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail_at("malformed number", start);
    }
    if (pos_ < text_.size() &&
        (text_[pos_] == '.' || std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      fail_at("malformed number", start);
    }
    double value = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc{} || res.ptr != text_.data() + pos_ || !std::isfinite(value)) {
      fail_at("malformed number", start);
    }
    return Expr::constant(value);
  }

  Expr parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    std::string_view ident = text_.substr(start, pos_ - start);
    skip_ws();
    bool call = pos_ < text_.size() && text_[pos_] == '(';
    if (auto fn = function_from_name(ident)) {
      if (!call) fail_at("function '" + std::string(ident) + "' requires an argument", start);
      ++pos_;
      Expr arg = parse_expr();
      expect(')');
      return Expr::unary(*fn, arg);
    }
    if (call) fail_at("unknown function '" + std::string(ident) + "'", start);
    if (alphabet_ && !alphabet_->contains(ident)) {
      fail_at("unknown identifier '" + std::string(ident) + "'", start);
    }
    return Expr::variable(ident);
  }

  std::string_view text_;
  const Alphabet* alphabet_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `text`, accepting only identifiers from `alphabet`.
inline Expr parse(std::string_view text, const Alphabet& alphabet) {
  return detail::Parser(text, &alphabet).parse_all();
}

/// Parses `text` with any identifier accepted as a variable.
inline Expr parse(std::string_view text) { return detail::Parser(text, nullptr).parse_all(); }

}  // namespace equimap::expr
