#pragma once

#include <cmath>
#include <optional>
#include <unordered_map>

#include "equimap/expr/evaluate.hpp"
#include "equimap/expr/expression.hpp"

namespace equimap::expr {

// Constructors applying only local identities: constant folding, 0/1 laws,
// double negation. No reordering or collection of like terms.
namespace smart {

namespace detail {

inline std::optional<double> fold(auto&& f) {
  try {
    double v = f();
    if (std::isfinite(v)) return v;
  } catch (const DomainError&) {
  }
  return std::nullopt;
}

}  // namespace detail

inline Expr neg(const Expr& a) {
  if (a.kind() == NodeKind::Unary && a.fn() == UnaryFn::Neg) return a.arg();
  return -a;
}

inline Expr add(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    if (auto v = detail::fold([&] { return a.value() + b.value(); })) return Expr::constant(*v);
  }
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return a + b;
}

inline Expr sub(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    if (auto v = detail::fold([&] { return a.value() - b.value(); })) return Expr::constant(*v);
  }
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return neg(b);
  return a - b;
}

inline Expr mul(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    if (auto v = detail::fold([&] { return a.value() * b.value(); })) return Expr::constant(*v);
  }
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return neg(b);
  if (b.is_constant(-1.0)) return neg(a);
  return a * b;
}

inline Expr div(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.value() != 0.0) {
    if (auto v = detail::fold([&] { return a.value() / b.value(); })) return Expr::constant(*v);
  }
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr::constant(0.0);
  return a / b;
}

inline Expr power(const Expr& base, double n) {
  if (n == 0.0) return Expr::constant(1.0);
  if (n == 1.0) return base;
  if (base.is_constant()) {
    if (auto v = detail::fold([&] { return expr::detail::apply_power(base.value(), n); })) {
      return Expr::constant(*v);
    }
  }
  return pow(base, n);
}

inline Expr apply(UnaryFn fn, const Expr& a) {
  if (fn == UnaryFn::Neg) return neg(a);
  if (a.is_constant()) {
    if (auto v = detail::fold([&] { return expr::detail::apply_unary(fn, a.value()); })) {
      return Expr::constant(*v);
    }
  }
  return Expr::unary(fn, a);
}

inline Expr binary(BinaryOp op, const Expr& a, const Expr& b) {
  switch (op) {
    case BinaryOp::Add: return add(a, b);
    case BinaryOp::Sub: return sub(a, b);
    case BinaryOp::Mul: return mul(a, b);
    case BinaryOp::Div: return div(a, b);
  }
  return a;
}

}  // namespace smart

/// Bottom-up shallow simplification. Equal formulas are not brought to a
/// common form; compare them numerically instead.
inline Expr simplify_basic(const Expr& e) {
  std::unordered_map<const void*, Expr> memo;
  auto rec = [&](auto&& self, const Expr& cur) -> Expr {
    if (auto it = memo.find(cur.id()); it != memo.end()) return it->second;
    Expr out = cur;
    switch (cur.kind()) {
      case NodeKind::Constant:
      case NodeKind::Variable: break;
      case NodeKind::Unary: out = smart::apply(cur.fn(), self(self, cur.arg())); break;
      case NodeKind::Power: out = smart::power(self(self, cur.arg()), cur.exponent()); break;
      case NodeKind::Binary: out = smart::binary(cur.op(), self(self, cur.lhs()), self(self, cur.rhs())); break;
    }
    memo.emplace(cur.id(), out);
    return out;
  };
  return rec(rec, e);
}

}  // namespace equimap::expr
