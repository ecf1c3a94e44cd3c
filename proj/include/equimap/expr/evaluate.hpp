#pragma once

#include <cmath>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "equimap/error.hpp"
#include "equimap/expr/expression.hpp"

namespace equimap::expr {

/// Values for named variables.
class VariableBinding {
 public:
  VariableBinding() = default;
  VariableBinding(std::initializer_list<std::pair<const std::string, double>> init) : values_(init) {}

  VariableBinding& set(std::string_view name, double value) {
    values_[std::string(name)] = value;
    return *this;
  }
  bool has(std::string_view name) const { return values_.count(std::string(name)) != 0; }
  double get(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw UnboundVariable(name);
    return it->second;
  }
  const std::unordered_map<std::string, double>& values() const noexcept { return values_; }

 private:
  std::unordered_map<std::string, double> values_;
};

namespace detail {

inline double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string("non-finite result in ") + what);
  return v;
}

inline double apply_unary(UnaryFn fn, double a) {
  switch (fn) {
    case UnaryFn::Neg: return -a;
    case UnaryFn::Sin: return std::sin(a);
    case UnaryFn::Cos: return std::cos(a);
    case UnaryFn::Tan: return checked(std::tan(a), "tan");
    case UnaryFn::Exp: return checked(std::exp(a), "exp");
    case UnaryFn::Ln:
      if (!(a > 0.0)) throw DomainError("ln of non-positive value " + format_number(a));
      return std::log(a);
    case UnaryFn::Sqrt:
      if (a < 0.0) throw DomainError("sqrt of negative value " + format_number(a));
      return std::sqrt(a);
  }
  return a;
}

inline double apply_binary(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::Add: return checked(a + b, "addition");
    case BinaryOp::Sub: return checked(a - b, "subtraction");
    case BinaryOp::Mul: return checked(a * b, "multiplication");
    case BinaryOp::Div:
      if (b == 0.0) throw DomainError("division by zero");
      return checked(a / b, "division");
  }
  return a;
}

inline double apply_power(double base, double n) {
  if (n == std::floor(n)) {
    if (base == 0.0 && n < 0.0) throw DomainError("zero raised to a negative power");
    return checked(std::pow(base, n), "power");
  }
  // fractional exponent: real only for positive base (and zero for n > 0)
  if (base < 0.0 || (base == 0.0 && n < 0.0)) {
    throw DomainError("fractional power of non-positive value " + format_number(base));
  }
  return checked(std::pow(base, n), "power");
}

}  // namespace detail

/// Evaluates `e` at `binding`. Throws UnboundVariable or DomainError; never returns NaN.
inline double eval(const Expr& e, const VariableBinding& binding) {
  std::unordered_map<const void*, double> memo;
  auto rec = [&](auto&& self, const Expr& cur) -> double {
    if (cur.kind() == NodeKind::Constant) return cur.value();
    if (cur.kind() == NodeKind::Variable) return binding.get(cur.name());
    if (auto it = memo.find(cur.id()); it != memo.end()) return it->second;
    double v = 0.0;
    switch (cur.kind()) {
      case NodeKind::Unary: v = detail::apply_unary(cur.fn(), self(self, cur.arg())); break;
      case NodeKind::Power: v = detail::apply_power(self(self, cur.arg()), cur.exponent()); break;
      case NodeKind::Binary: {
        double a = self(self, cur.lhs());
        double b = self(self, cur.rhs());
        v = detail::apply_binary(cur.op(), a, b);
        break;
      }
      default: break;
    }
    memo.emplace(cur.id(), v);
    return v;
  };
  return rec(rec, e);
}

/// An expression flattened into a straight-line tape over a fixed variable
/// order. Shared subtrees are evaluated once. Intended for hot loops.
class Program {
 public:
  Program() = default;

  /// Every free variable of `e` must appear in `variables`.
  Program(const Expr& e, std::vector<std::string> variables) : variables_(std::move(variables)) {
    std::unordered_map<std::string, std::size_t> slot_of;
    for (std::size_t i = 0; i < variables_.size(); ++i) slot_of.emplace(variables_[i], i);
    std::unordered_map<const void*, std::size_t> index;
    auto emit = [&](auto&& self, const Expr& cur) -> std::size_t {
      if (auto it = index.find(cur.id()); it != index.end()) return it->second;
      Op op;
      op.kind = cur.kind();
      switch (cur.kind()) {
        case NodeKind::Constant: op.value = cur.value(); break;
        case NodeKind::Variable: {
          auto it = slot_of.find(cur.name());
          if (it == slot_of.end()) throw UnboundVariable(cur.name());
          op.a = it->second;
          break;
        }
        case NodeKind::Unary:
          op.fn = cur.fn();
          op.a = self(self, cur.arg());
          break;
        case NodeKind::Power:
          op.value = cur.exponent();
          op.a = self(self, cur.arg());
          break;
        case NodeKind::Binary:
          op.op = cur.op();
          op.a = self(self, cur.lhs());
          op.b = self(self, cur.rhs());
          break;
      }
      tape_.push_back(op);
      std::size_t id = tape_.size() - 1;
      index.emplace(cur.id(), id);
      return id;
    };
    emit(emit, e);
  }

  const std::vector<std::string>& variables() const noexcept { return variables_; }
  std::size_t size() const noexcept { return tape_.size(); }

  /// `values[i]` is the value of `variables()[i]`.
  double operator()(std::span<const double> values) const {
    if (values.size() < variables_.size()) throw UnboundVariable(variables_[values.size()]);
    thread_local std::vector<double> scratch;
    scratch.resize(tape_.size());
    for (std::size_t i = 0; i < tape_.size(); ++i) {
      const Op& op = tape_[i];
      switch (op.kind) {
        case NodeKind::Constant: scratch[i] = op.value; break;
        case NodeKind::Variable: scratch[i] = values[op.a]; break;
        case NodeKind::Unary: scratch[i] = detail::apply_unary(op.fn, scratch[op.a]); break;
        case NodeKind::Power: scratch[i] = detail::apply_power(scratch[op.a], op.value); break;
        case NodeKind::Binary: scratch[i] = detail::apply_binary(op.op, scratch[op.a], scratch[op.b]); break;
      }
    }
    return scratch.empty() ? 0.0 : scratch.back();
  }

 private:
  struct Op {
    NodeKind kind = NodeKind::Constant;
    UnaryFn fn = UnaryFn::Neg;
    BinaryOp op = BinaryOp::Add;
    double value = 0.0;
    std::size_t a = 0;
    std::size_t b = 0;
  };

  std::vector<std::string> variables_;
  std::vector<Op> tape_;
};

}  // namespace equimap::expr
