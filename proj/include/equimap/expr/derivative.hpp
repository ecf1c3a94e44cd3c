#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "equimap/error.hpp"
#include "equimap/expr/expression.hpp"
#include "equimap/expr/simplify.hpp"

namespace equimap::expr {

/// Exact partial derivative; every other variable is held fixed.
inline Expr partial_diff(const Expr& e, std::string_view v) {
  using namespace smart;
  std::unordered_map<const void*, Expr> memo;
  auto d = [&](auto&& self, const Expr& cur) -> Expr {
    if (auto it = memo.find(cur.id()); it != memo.end()) return it->second;
    Expr out;
    switch (cur.kind()) {
      case NodeKind::Constant: out = Expr::constant(0.0); break;
      case NodeKind::Variable: out = Expr::constant(cur.name() == v ? 1.0 : 0.0); break;
      case NodeKind::Unary: {
        Expr a = cur.arg();
        Expr da = self(self, a);
        if (da.is_constant(0.0)) {
          out = da;
          break;
        }
        switch (cur.fn()) {
          case UnaryFn::Neg: out = neg(da); break;
          case UnaryFn::Sin: out = mul(apply(UnaryFn::Cos, a), da); break;
          case UnaryFn::Cos: out = neg(mul(apply(UnaryFn::Sin, a), da)); break;
          case UnaryFn::Tan: out = div(da, power(apply(UnaryFn::Cos, a), 2.0)); break;
          case UnaryFn::Exp: out = mul(cur, da); break;
          case UnaryFn::Ln: out = div(da, a); break;
          case UnaryFn::Sqrt: out = div(da, mul(Expr::constant(2.0), cur)); break;
        }
        break;
      }
      case NodeKind::Power: {
        Expr a = cur.arg();
        Expr da = self(self, a);
        double n = cur.exponent();
        if (da.is_constant(0.0)) {
          out = da;
          break;
        }
        out = mul(mul(Expr::constant(n), power(a, n - 1.0)), da);
        break;
      }
      case NodeKind::Binary: {
        Expr a = cur.lhs();
        Expr b = cur.rhs();
        Expr da = self(self, a);
        Expr db = self(self, b);
        switch (cur.op()) {
          case BinaryOp::Add: out = add(da, db); break;
          case BinaryOp::Sub: out = sub(da, db); break;
          case BinaryOp::Mul: out = add(mul(da, b), mul(a, db)); break;
          case BinaryOp::Div:
            if (db.is_constant(0.0)) {
              out = div(da, b);
            } else {
              out = div(sub(mul(da, b), mul(a, db)), power(b, 2.0));
            }
            break;
        }
        break;
      }
    }
    memo.emplace(cur.id(), out);
    return out;
  };
  return d(d, e);
}

/// As `partial_diff`, rejecting a variable outside `alphabet`.
inline Expr partial_diff(const Expr& e, std::string_view v, const Alphabet& alphabet) {
  if (!alphabet.contains(v)) throw AlphabetError("derivative with respect to undeclared variable '" + std::string(v) + "'");
  return partial_diff(e, v);
}

/// Declares a dependent symbol as a function of base variables, with jet
/// symbols `dep_<letters>` standing for its formal partial derivatives up to
/// second order. Letters follow the base order, e.g. `u_xt`, never `u_tx`.
class JetContext {
 public:
  struct Base {
    std::string name;
    char letter;
  };

  static constexpr int kMaxOrder = 2;

  JetContext(std::string dependent, std::vector<Base> bases)
      : dependent_(std::move(dependent)), bases_(std::move(bases)) {}

  /// u(x, y, t) with jets u_x ... u_tt.
  static const JetContext& standard() {
    static const JetContext ctx("u", {{"x", 'x'}, {"y", 'y'}, {"t", 't'}});
    return ctx;
  }

  /// ub(xb, yb, tb) with jets ub_x ... ub_tt, for transformed variables.
  static const JetContext& barred() {
    static const JetContext ctx("ub", {{"xb", 'x'}, {"yb", 'y'}, {"tb", 't'}});
    return ctx;
  }

  const std::string& dependent() const noexcept { return dependent_; }
  const std::vector<Base>& bases() const noexcept { return bases_; }
  const std::string& base_name(std::size_t i) const { return bases_.at(i).name; }

  /// Jet symbol for derivative counts per base, e.g. {1,0,1} -> u_xt.
  std::string symbol(const std::vector<int>& counts) const {
    std::string out = dependent_;
    std::string letters;
    for (std::size_t i = 0; i < bases_.size(); ++i) letters.append(static_cast<std::size_t>(counts.at(i)), bases_[i].letter);
    if (!letters.empty()) out += "_" + letters;
    return out;
  }

  /// Symbol for a single derivative with respect to `base`.
  std::string first(std::string_view base) const { return symbol(unit(index_of(base))); }

  /// Derivative counts of a jet symbol, or nullopt for a name outside the family.
  std::optional<std::vector<int>> counts(std::string_view name) const {
    std::vector<int> c(bases_.size(), 0);
    if (name == dependent_) return c;
    if (name.size() < dependent_.size() + 2 || name.substr(0, dependent_.size()) != dependent_ ||
        name[dependent_.size()] != '_') {
      return std::nullopt;
    }
    for (char ch : name.substr(dependent_.size() + 1)) {
      auto it = std::find_if(bases_.begin(), bases_.end(), [&](const Base& b) { return b.letter == ch; });
      if (it == bases_.end()) return std::nullopt;
      ++c[static_cast<std::size_t>(it - bases_.begin())];
    }
    if (symbol(c) != name) return std::nullopt;  // non-canonical letter order
    return c;
  }

  static int order(const std::vector<int>& c) {
    int n = 0;
    for (int k : c) n += k;
    return n;
  }

  bool is_base(std::string_view name) const {
    return std::any_of(bases_.begin(), bases_.end(), [&](const Base& b) { return b.name == name; });
  }

  std::size_t index_of(std::string_view base) const {
    for (std::size_t i = 0; i < bases_.size(); ++i) {
      if (bases_[i].name == base) return i;
    }
    throw AlphabetError("'" + std::string(base) + "' is not a base variable of " + dependent_);
  }

  /// Base variables, dependent symbol and all jets through second order.
  Alphabet alphabet() const {
    Alphabet a;
    for (const auto& b : bases_) a.insert(b.name);
    for (const auto& s : jet_symbols(kMaxOrder)) a.insert(s);
    return a;
  }

  /// The dependent symbol and its jets with order <= max_order.
  std::vector<std::string> jet_symbols(int max_order) const {
    std::vector<std::string> out;
    for (int ord = 0; ord <= max_order; ++ord) {
      std::vector<int> c(bases_.size(), 0);
      auto rec = [&](auto&& self, std::size_t i, int remaining) -> void {
        if (i + 1 == bases_.size()) {
          c[i] = remaining;
          out.push_back(symbol(c));
          return;
        }
        for (int k = remaining; k >= 0; --k) {
          c[i] = k;
          self(self, i + 1, remaining - k);
        }
      };
      rec(rec, 0, ord);
    }
    return out;
  }

 private:
  std::vector<int> unit(std::size_t i) const {
    std::vector<int> c(bases_.size(), 0);
    c[i] = 1;
    return c;
  }

  std::string dependent_;
  std::vector<Base> bases_;
};

/// Total derivative D_base = d/dbase + sum over jets s of (D_base s) d/ds.
/// Throws OrderOverflow when a second-order jet would need differentiating.
inline Expr total_diff(const Expr& e, std::string_view base, const JetContext& ctx) {
  std::size_t bi = ctx.index_of(base);
  Expr out = partial_diff(e, base);
  for (const auto& name : free_variables(e)) {
    auto c = ctx.counts(name);
    if (!c) continue;
    Expr ds = partial_diff(e, name);
    if (ds.is_constant(0.0)) continue;
    if (JetContext::order(*c) >= JetContext::kMaxOrder) {
      throw OrderOverflow("total derivative of '" + name + "' with respect to " + std::string(base) +
                          " exceeds second order");
    }
    std::vector<int> next = *c;
    ++next[bi];
    out = smart::add(out, smart::mul(ds, Expr::variable(ctx.symbol(next))));
  }
  return out;
}

}  // namespace equimap::expr
