#pragma once

#include <charconv>
#include <cmath>
#include <initializer_list>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <utility>
#include <vector>

#include "equimap/error.hpp"

namespace equimap::expr {

enum class NodeKind { Constant, Variable, Unary, Binary, Power };

enum class UnaryFn { Neg, Sin, Cos, Tan, Exp, Ln, Sqrt };

enum class BinaryOp { Add, Sub, Mul, Div };

inline std::string_view function_name(UnaryFn fn) {
  switch (fn) {
    case UnaryFn::Neg: return "neg";
    case UnaryFn::Sin: return "sin";
    case UnaryFn::Cos: return "cos";
    case UnaryFn::Tan: return "tan";
    case UnaryFn::Exp: return "exp";
    case UnaryFn::Ln: return "ln";
    case UnaryFn::Sqrt: return "sqrt";
  }
  return "?";
}

namespace detail {

struct Node {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;  // constant value, or exponent of a Power node
  std::string name;
  UnaryFn fn = UnaryFn::Neg;
  BinaryOp op = BinaryOp::Add;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

using NodePtr = std::shared_ptr<const Node>;

inline NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

}  // namespace detail

/// Immutable expression tree. Copies share structure; nodes are never mutated.
///
/// Negating a literal yields the negative literal, so `Neg(Const c)` never
/// appears in a tree. Every other construction is taken literally; use
/// `simplify_basic` for identities such as `e*1` or `e+0`.
class Expr {
 public:
  /// The constant zero.
  Expr() : node_(zero()) {}
  Expr(double value) : Expr(constant(value)) {}  // NOLINT: implicit numeric literals

  static Expr constant(double value) {
    if (!std::isfinite(value)) throw DomainError("non-finite constant in expression");
    detail::Node n;
    n.kind = NodeKind::Constant;
    n.value = value;
    return Expr(detail::make_node(std::move(n)));
  }

  static Expr variable(std::string_view name) {
    if (name.empty()) throw AlphabetError("empty variable name");
    detail::Node n;
    n.kind = NodeKind::Variable;
    n.name = std::string(name);
    return Expr(detail::make_node(std::move(n)));
  }

  static Expr unary(UnaryFn fn, const Expr& arg) {
    if (fn == UnaryFn::Neg && arg.is_constant()) return constant(-arg.value());
    detail::Node n;
    n.kind = NodeKind::Unary;
    n.fn = fn;
    n.a = arg.node_;
    return Expr(detail::make_node(std::move(n)));
  }

  static Expr binary(BinaryOp op, const Expr& lhs, const Expr& rhs) {
    detail::Node n;
    n.kind = NodeKind::Binary;
    n.op = op;
    n.a = lhs.node_;
    n.b = rhs.node_;
    return Expr(detail::make_node(std::move(n)));
  }

  static Expr power(const Expr& base, double exponent) {
    if (!std::isfinite(exponent)) throw DomainError("non-finite exponent in expression");
    detail::Node n;
    n.kind = NodeKind::Power;
    n.value = exponent;
    n.a = base.node_;
    return Expr(detail::make_node(std::move(n)));
  }

  NodeKind kind() const noexcept { return node_->kind; }
  bool is_constant() const noexcept { return kind() == NodeKind::Constant; }
  bool is_constant(double v) const noexcept { return is_constant() && node_->value == v; }
  bool is_variable() const noexcept { return kind() == NodeKind::Variable; }
  bool is_variable(std::string_view v) const noexcept { return is_variable() && node_->name == v; }

  /// Constant value (Constant) or exponent (Power).
  double value() const noexcept { return node_->value; }
  double exponent() const noexcept { return node_->value; }
  const std::string& name() const noexcept { return node_->name; }
  UnaryFn fn() const noexcept { return node_->fn; }
  BinaryOp op() const noexcept { return node_->op; }
  /// Operand of a unary node, base of a power, or left operand of a binary node.
  Expr arg() const { return Expr(node_->a); }
  Expr lhs() const { return Expr(node_->a); }
  Expr rhs() const { return Expr(node_->b); }

  /// Node identity, shared by copies.
  const void* id() const noexcept { return node_.get(); }

  friend bool operator==(const Expr& a, const Expr& b) { return equal(a.node_.get(), b.node_.get()); }
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  explicit Expr(detail::NodePtr node) : node_(std::move(node)) {}

  static const detail::NodePtr& zero() {
    static const detail::NodePtr node = detail::make_node(detail::Node{});
    return node;
  }

  static bool equal(const detail::Node* a, const detail::Node* b) {
    if (a == b) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case NodeKind::Constant: return a->value == b->value;
      case NodeKind::Variable: return a->name == b->name;
      case NodeKind::Unary: return a->fn == b->fn && equal(a->a.get(), b->a.get());
      case NodeKind::Binary:
        return a->op == b->op && equal(a->a.get(), b->a.get()) && equal(a->b.get(), b->b.get());
      case NodeKind::Power: return a->value == b->value && equal(a->a.get(), b->a.get());
    }
    return false;
  }

  detail::NodePtr node_;
};

inline Expr var(std::string_view name) { return Expr::variable(name); }

inline Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Add, a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Sub, a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Mul, a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Div, a, b); }
inline Expr operator-(const Expr& a) { return Expr::unary(UnaryFn::Neg, a); }

inline Expr sin(const Expr& e) { return Expr::unary(UnaryFn::Sin, e); }
inline Expr cos(const Expr& e) { return Expr::unary(UnaryFn::Cos, e); }
inline Expr tan(const Expr& e) { return Expr::unary(UnaryFn::Tan, e); }
inline Expr exp(const Expr& e) { return Expr::unary(UnaryFn::Exp, e); }
inline Expr ln(const Expr& e) { return Expr::unary(UnaryFn::Ln, e); }
inline Expr sqrt(const Expr& e) { return Expr::unary(UnaryFn::Sqrt, e); }
inline Expr pow(const Expr& base, double exponent) { return Expr::power(base, exponent); }

// ---------------------------------------------------------------------------
// Alphabets

/// The set of variable names admissible in a context.
class Alphabet {
 public:
  Alphabet() = default;
  Alphabet(std::initializer_list<std::string> names) : names_(names) {}
  explicit Alphabet(std::set<std::string> names) : names_(std::move(names)) {}

  bool contains(std::string_view name) const { return names_.count(std::string(name)) != 0; }
  void insert(std::string name) { names_.insert(std::move(name)); }
  const std::set<std::string>& names() const noexcept { return names_; }

  Alphabet merged(const Alphabet& other) const {
    Alphabet out = *this;
    out.names_.insert(other.names_.begin(), other.names_.end());
    return out;
  }

 private:
  std::set<std::string> names_;
};

// ---------------------------------------------------------------------------
// Structural queries

namespace detail {

inline void collect_free(const Expr& e, std::set<std::string>& out,
                         std::set<const void*>& seen) {
  if (!seen.insert(e.id()).second) return;
  switch (e.kind()) {
    case NodeKind::Constant: return;
    case NodeKind::Variable: out.insert(e.name()); return;
    case NodeKind::Unary:
    case NodeKind::Power: collect_free(e.arg(), out, seen); return;
    case NodeKind::Binary:
      collect_free(e.lhs(), out, seen);
      collect_free(e.rhs(), out, seen);
      return;
  }
}

}  // namespace detail

inline std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  std::set<const void*> seen;
  detail::collect_free(e, out, seen);
  return out;
}

inline bool depends_on(const Expr& e, std::string_view name) {
  return free_variables(e).count(std::string(name)) != 0;
}

/// Throws AlphabetError naming the first variable of `e` outside `alphabet`.
inline void require_alphabet(const Expr& e, const Alphabet& alphabet, std::string_view what = "expression") {
  for (const auto& v : free_variables(e)) {
    if (!alphabet.contains(v)) {
      throw AlphabetError(std::string(what) + " uses undeclared variable '" + v + "'");
    }
  }
}

/// Number of nodes in the tree with shared subtrees counted once.
inline std::size_t dag_size(const Expr& e) {
  std::set<const void*> seen;
  std::vector<Expr> stack{e};
  while (!stack.empty()) {
    Expr cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur.id()).second) continue;
    switch (cur.kind()) {
      case NodeKind::Unary:
      case NodeKind::Power: stack.push_back(cur.arg()); break;
      case NodeKind::Binary:
        stack.push_back(cur.lhs());
        stack.push_back(cur.rhs());
        break;
      default: break;
    }
  }
  return seen.size();
}

using Substitution = std::map<std::string, Expr, std::less<>>;

/// Simultaneous replacement of variables. Unmapped variables are kept.
inline Expr substitute(const Expr& e, const Substitution& map) {
  std::unordered_map<const void*, Expr> memo;
  auto rec = [&](auto&& self, const Expr& cur) -> Expr {
    if (auto it = memo.find(cur.id()); it != memo.end()) return it->second;
    Expr out;
    switch (cur.kind()) {
      case NodeKind::Constant: out = cur; break;
      case NodeKind::Variable: {
        auto it = map.find(cur.name());
        out = it == map.end() ? cur : it->second;
        break;
      }
      case NodeKind::Unary: out = Expr::unary(cur.fn(), self(self, cur.arg())); break;
      case NodeKind::Power: out = Expr::power(self(self, cur.arg()), cur.exponent()); break;
      case NodeKind::Binary:
        out = Expr::binary(cur.op(), self(self, cur.lhs()), self(self, cur.rhs()));
        break;
    }
    memo.emplace(cur.id(), out);
    return out;
  };
  return rec(rec, e);
}

/// Renames variables; a convenience over `substitute`.
inline Expr rename(const Expr& e, const std::map<std::string, std::string>& names) {
  Substitution map;
  for (const auto& [from, to] : names) map.emplace(from, Expr::variable(to));
  return substitute(e, map);
}

// ---------------------------------------------------------------------------
// Printing

/// Shortest decimal form that reads back to the identical double.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

// Binding strength of the printed form of a node.
enum Prec { kAdd = 1, kMul = 2, kNeg = 3, kPow = 4, kAtom = 5 };

inline int precedence(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Constant: return e.value() < 0 || std::signbit(e.value()) ? kNeg : kAtom;
    case NodeKind::Variable: return kAtom;
    case NodeKind::Unary: return e.fn() == UnaryFn::Neg ? kNeg : kAtom;
    case NodeKind::Power: return kPow;
    case NodeKind::Binary:
      return (e.op() == BinaryOp::Add || e.op() == BinaryOp::Sub) ? kAdd : kMul;
  }
  return kAtom;
}

inline void print_to(const Expr& e, std::string& out);

inline void print_wrapped(const Expr& e, bool parens, std::string& out) {
  if (parens) out += '(';
  print_to(e, out);
  if (parens) out += ')';
}

inline void print_to(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case NodeKind::Constant: out += format_number(e.value()); return;
    case NodeKind::Variable: out += e.name(); return;
    case NodeKind::Unary: {
      if (e.fn() == UnaryFn::Neg) {
        out += '-';
        // operand of unary minus binds at least as tightly as a power
        print_wrapped(e.arg(), precedence(e.arg()) < kPow, out);
        return;
      }
      out += function_name(e.fn());
      print_wrapped(e.arg(), true, out);
      return;
    }
    case NodeKind::Power: {
      print_wrapped(e.arg(), precedence(e.arg()) <= kPow, out);
      out += '^';
      double n = e.exponent();
      if (n < 0 || std::signbit(n)) {
        out += '(';
        out += format_number(n);
        out += ')';
      } else {
        out += format_number(n);
      }
      return;
    }
    case NodeKind::Binary: {
      int p = precedence(e);
      const char* sym = "+";
      switch (e.op()) {
        case BinaryOp::Add: sym = "+"; break;
        case BinaryOp::Sub: sym = "-"; break;
        case BinaryOp::Mul: sym = "*"; break;
        case BinaryOp::Div: sym = "/"; break;
      }
      // left-associative: left operand may share the level, right may not;
      // a negated right operand is wrapped for legibility
      print_wrapped(e.lhs(), precedence(e.lhs()) < p, out);
      out += sym;
      int rp = precedence(e.rhs());
      print_wrapped(e.rhs(), rp <= p || rp == kNeg, out);
      return;
    }
  }
}

}  // namespace detail

/// Canonical text form; `parse(to_string(e))` reproduces `e` structurally.
inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print_to(e, out);
  return out;
}

}  // namespace equimap::expr
