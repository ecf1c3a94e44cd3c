#pragma once

// Finite transformations of the four equivalence subgroups
//
//   A: xi1 = m(u), xi2 = h(u)       B: xi1 = m(u, y)
//   C: xi2 = m(u, x)                D: eta = m(x, y, t), with M_x = m_t
//
// acting on points, first-order jets and the flux pair (f, g), together with
// an RK4 integration of the generator flow used as an independent oracle.
//
// Sign convention: push_point(eps) maps x to x - eps*m(u). The flow of the
// generator m d/dx reaches the same point at flow parameter -eps, which is
// where flow_oracle stops. The shift subgroup D is written the other way
// round (u + eps*m), so its flow runs to +eps.

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "equimap/error.hpp"
#include "equimap/expr.hpp"
#include "equimap/rk4.hpp"
#include "equimap/sampling.hpp"

namespace equimap::transform {

enum class SubgroupKind { A, B, C, D };

inline char kind_letter(SubgroupKind k) { return static_cast<char>('A' + static_cast<int>(k)); }

inline SubgroupKind parse_kind(std::string_view s) {
  if (s == "A" || s == "a") return SubgroupKind::A;
  if (s == "B" || s == "b") return SubgroupKind::B;
  if (s == "C" || s == "c") return SubgroupKind::C;
  if (s == "D" || s == "d") return SubgroupKind::D;
  throw ConstructionError("unknown subgroup kind '" + std::string(s) + "' (expected A, B, C or D)");
}

struct Point {
  double x = 0, y = 0, t = 0, u = 0;
};

struct JetPoint1 {
  double x = 0, y = 0, t = 0, u = 0;
  double u_x = 0, u_y = 0, u_t = 0;

  Point point() const { return {x, y, t, u}; }
};

struct FluxPair {
  double f = 0, g = 0;
};

/// Values (or expressions) of the free function's derivatives entering the
/// jet and flux laws. Entries a kind does not use stay zero.
template <class T>
struct FreeDerivatives {
  T m_u{0.0}, h_u{0.0}, m_x{0.0}, m_y{0.0}, m_t{0.0}, antiderivative{0.0};
};

// ---------------------------------------------------------------------------
// Jet and flux laws, generic over double (numeric push) and Expr (symbolic
// assembly of transformed fluxes).

/// Push-forward denominator; zero on the fold set.
template <class T>
T jet_denominator(SubgroupKind kind, double eps, const FreeDerivatives<T>& d, const T& u_x, const T& u_y) {
  switch (kind) {
    case SubgroupKind::A: return T(1.0) - T(eps) * (u_x * d.m_u + u_y * d.h_u);
    case SubgroupKind::B: return T(1.0) - T(eps) * d.m_u * u_x;
    case SubgroupKind::C: return T(1.0) - T(eps) * d.m_u * u_y;
    case SubgroupKind::D: return T(1.0);
  }
  return T(1.0);
}

template <class T>
std::array<T, 3> jet_law(SubgroupKind kind, double eps, const FreeDerivatives<T>& d, const T& u_x, const T& u_y,
                         const T& u_t, const T& denom) {
  switch (kind) {
    case SubgroupKind::A: return {u_x / denom, u_y / denom, u_t / denom};
    case SubgroupKind::B: return {u_x / denom, (u_y + T(eps) * d.m_y * u_x) / denom, u_t / denom};
    case SubgroupKind::C: return {(u_x + T(eps) * d.m_x * u_y) / denom, u_y / denom, u_t / denom};
    case SubgroupKind::D: return {u_x + T(eps) * d.m_x, u_y + T(eps) * d.m_y, u_t + T(eps) * d.m_t};
  }
  return {u_x, u_y, u_t};
}

template <class T>
std::array<T, 2> flux_law(SubgroupKind kind, double eps, const FreeDerivatives<T>& d, const T& u_x, const T& u_y,
                          const T& f, const T& g, const T& denom) {
  const T e(eps);
  switch (kind) {
    case SubgroupKind::A:
      return {((T(1.0) - e * u_x * d.m_u) * f - e * u_y * d.m_u * g) / denom,
              ((T(1.0) - e * u_y * d.h_u) * g - e * u_x * d.h_u * f) / denom};
    case SubgroupKind::B: return {f - e * (d.m_y + d.m_u * u_y) * g / denom, g / denom};
    // x <-> y mirror of B
    case SubgroupKind::C: return {f / denom, g - e * (d.m_x + d.m_u * u_x) * f / denom};
    case SubgroupKind::D: return {f + e * d.antiderivative, g};
  }
  return {f, g};
}

/// Infinitesimal generator components (xi1, xi2, xi3, eta) over (x, y, t, u).
struct GeneratorComponents {
  expr::Expr xi1, xi2, xi3, eta;
};

/// One of the four subgroups with its free function(s) and group parameter.
class GeneratorSpec {
 public:
  static constexpr double kAntiderivativeTolerance = 1e-8;

  static GeneratorSpec kind_a(expr::Expr m, expr::Expr h, double epsilon) {
    return GeneratorSpec(SubgroupKind::A, std::move(m), std::move(h), std::nullopt, epsilon);
  }
  static GeneratorSpec kind_b(expr::Expr m, double epsilon) {
    return GeneratorSpec(SubgroupKind::B, std::move(m), expr::Expr(), std::nullopt, epsilon);
  }
  static GeneratorSpec kind_c(expr::Expr m, double epsilon) {
    return GeneratorSpec(SubgroupKind::C, std::move(m), expr::Expr(), std::nullopt, epsilon);
  }
  /// `antiderivative` is M(x, y, t) with dM/dx = dm/dt, checked at construction.
  static GeneratorSpec kind_d(expr::Expr m, expr::Expr antiderivative, double epsilon) {
    return GeneratorSpec(SubgroupKind::D, std::move(m), expr::Expr(), std::move(antiderivative), epsilon);
  }

  /// Generic factory; `h` is required only for kind A, `antiderivative` only for kind D.
  static GeneratorSpec make(SubgroupKind kind, expr::Expr m, std::optional<expr::Expr> h,
                            std::optional<expr::Expr> antiderivative, double epsilon) {
    if (kind != SubgroupKind::A && h && !h->is_constant(0.0)) {
      throw ConstructionError(std::string("kind ") + kind_letter(kind) + " takes no h function");
    }
    if (kind != SubgroupKind::D && antiderivative) {
      throw ConstructionError(std::string("kind ") + kind_letter(kind) + " takes no antiderivative");
    }
    if (kind == SubgroupKind::D && !antiderivative) {
      throw ConstructionError("kind D requires the antiderivative M with dM/dx = dm/dt");
    }
    return GeneratorSpec(kind, std::move(m), h.value_or(expr::Expr()), std::move(antiderivative), epsilon);
  }

  /// Parses free functions from grammar strings over the kind's arguments.
  static GeneratorSpec parse(SubgroupKind kind, std::string_view m, std::optional<std::string_view> h,
                             std::optional<std::string_view> antiderivative, double epsilon) {
    auto alphabet = argument_alphabet(kind);
    std::optional<expr::Expr> he;
    std::optional<expr::Expr> me;
    if (h) he = expr::parse(*h, alphabet);
    if (antiderivative) me = expr::parse(*antiderivative, alphabet);
    return make(kind, expr::parse(m, alphabet), he, me, epsilon);
  }

  /// Variables the free functions of `kind` may depend on.
  static expr::Alphabet argument_alphabet(SubgroupKind kind) {
    switch (kind) {
      case SubgroupKind::A: return {"u"};
      case SubgroupKind::B: return {"u", "y"};
      case SubgroupKind::C: return {"u", "x"};
      case SubgroupKind::D: return {"x", "y", "t"};
    }
    return {};
  }

  SubgroupKind kind() const noexcept { return kind_; }
  double epsilon() const noexcept { return epsilon_; }
  const expr::Expr& m() const noexcept { return data_->m; }
  /// Zero unless kind A.
  const expr::Expr& h() const noexcept { return data_->h; }
  const std::optional<expr::Expr>& antiderivative() const noexcept { return data_->antiderivative; }

  /// Same free functions, different group parameter.
  GeneratorSpec with_epsilon(double epsilon) const {
    GeneratorSpec out = *this;
    out.epsilon_ = epsilon;
    return out;
  }

  /// Symbolic derivatives over (x, y, t, u).
  const FreeDerivatives<expr::Expr>& derivative_exprs() const noexcept { return data_->derivs; }

  FreeDerivatives<double> derivatives_at(const Point& p) const {
    const auto v = vars(p);
    const Compiled& c = *data_;
    FreeDerivatives<double> d;
    d.m_u = c.m_u(v);
    d.h_u = c.h_u(v);
    d.m_x = c.m_x(v);
    d.m_y = c.m_y(v);
    d.m_t = c.m_t(v);
    d.antiderivative = c.antiderivative_prog(v);
    return d;
  }

  double m_at(const Point& p) const { return data_->m_prog(vars(p)); }
  double h_at(const Point& p) const { return data_->h_prog(vars(p)); }

  GeneratorComponents generator() const {
    using expr::Expr;
    switch (kind_) {
      case SubgroupKind::A: return {m(), h(), Expr(), Expr()};
      case SubgroupKind::B: return {m(), Expr(), Expr(), Expr()};
      case SubgroupKind::C: return {Expr(), m(), Expr(), Expr()};
      case SubgroupKind::D: return {Expr(), Expr(), Expr(), m()};
    }
    return {};
  }

  /// Flow right-hand side (xi1, xi2, xi3, eta) at a point.
  std::array<double, 4> generator_at(const Point& p) const {
    switch (kind_) {
      case SubgroupKind::A: return {m_at(p), h_at(p), 0.0, 0.0};
      case SubgroupKind::B: return {m_at(p), 0.0, 0.0, 0.0};
      case SubgroupKind::C: return {0.0, m_at(p), 0.0, 0.0};
      case SubgroupKind::D: return {0.0, 0.0, 0.0, m_at(p)};
    }
    return {};
  }

 private:
  struct Compiled {
    expr::Expr m, h;
    std::optional<expr::Expr> antiderivative;
    FreeDerivatives<expr::Expr> derivs;
    expr::Program m_prog, h_prog, m_u, h_u, m_x, m_y, m_t, antiderivative_prog;
  };

  static std::array<double, 4> vars(const Point& p) { return {p.x, p.y, p.t, p.u}; }
  static std::vector<std::string> var_order() { return {"x", "y", "t", "u"}; }

  GeneratorSpec(SubgroupKind kind, expr::Expr m, expr::Expr h, std::optional<expr::Expr> antiderivative,
                double epsilon)
      : kind_(kind), epsilon_(epsilon) {
    using expr::partial_diff;
    if (!std::isfinite(epsilon)) throw ConstructionError("group parameter must be finite");
    const expr::Alphabet args = argument_alphabet(kind);
    const std::string label = std::string("kind ") + kind_letter(kind);
    try {
      expr::require_alphabet(m, args, label + " function m");
      expr::require_alphabet(h, args, label + " function h");
      if (antiderivative) expr::require_alphabet(*antiderivative, args, label + " antiderivative M");
    } catch (const AlphabetError& err) {
      throw ConstructionError(err.what());
    }

    auto data = std::make_shared<Compiled>();
    data->m = m;
    data->h = h;
    data->antiderivative = antiderivative;
    FreeDerivatives<expr::Expr>& d = data->derivs;
    switch (kind) {
      case SubgroupKind::A:
        d.m_u = partial_diff(m, "u");
        d.h_u = partial_diff(h, "u");
        break;
      case SubgroupKind::B:
        d.m_u = partial_diff(m, "u");
        d.m_y = partial_diff(m, "y");
        break;
      case SubgroupKind::C:
        d.m_u = partial_diff(m, "u");
        d.m_x = partial_diff(m, "x");
        break;
      case SubgroupKind::D:
        d.m_x = partial_diff(m, "x");
        d.m_y = partial_diff(m, "y");
        d.m_t = partial_diff(m, "t");
        d.antiderivative = *antiderivative;
        break;
    }
    const auto order = var_order();
    data->m_prog = expr::Program(m, order);
    data->h_prog = expr::Program(h, order);
    data->m_u = expr::Program(d.m_u, order);
    data->h_u = expr::Program(d.h_u, order);
    data->m_x = expr::Program(d.m_x, order);
    data->m_y = expr::Program(d.m_y, order);
    data->m_t = expr::Program(d.m_t, order);
    data->antiderivative_prog = expr::Program(d.antiderivative, order);
    data_ = std::move(data);
    if (kind == SubgroupKind::D) check_antiderivative();
  }

  // dM/dx must equal dm/dt; 50 sample points in [-1, 1]^3.
  void check_antiderivative() const {
    const expr::Program dM(expr::partial_diff(*data_->antiderivative, "x"), var_order());
    Rng rng(0x5eedULL);
    int accepted = 0;
    for (int attempt = 0; attempt < 1000 && accepted < 50; ++attempt) {
      std::array<double, 4> v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0};
      double lhs = 0.0;
      double rhs = 0.0;
      try {
        lhs = dM(v);
        rhs = data_->m_t(v);
      } catch (const DomainError&) {
        continue;
      }
      ++accepted;
      if (std::abs(lhs - rhs) > kAntiderivativeTolerance * (1.0 + std::abs(rhs))) {
        throw ConstructionError("antiderivative mismatch: dM/dx = " + expr::format_number(lhs) +
                                " but dm/dt = " + expr::format_number(rhs) + " at (x,y,t) = (" +
                                expr::format_number(v[0]) + ", " + expr::format_number(v[1]) + ", " +
                                expr::format_number(v[2]) + ")");
      }
    }
    if (accepted < 50) throw ConstructionError("antiderivative check: free functions undefined on [-1,1]^3");
  }

  SubgroupKind kind_;
  double epsilon_;
  std::shared_ptr<const Compiled> data_;
};

// ---------------------------------------------------------------------------
// Finite transformations

inline Point push_point(const GeneratorSpec& s, const Point& p) {
  const double eps = s.epsilon();
  switch (s.kind()) {
    case SubgroupKind::A: return {p.x - eps * s.m_at(p), p.y - eps * s.h_at(p), p.t, p.u};
    case SubgroupKind::B: return {p.x - eps * s.m_at(p), p.y, p.t, p.u};
    case SubgroupKind::C: return {p.x, p.y - eps * s.m_at(p), p.t, p.u};
    case SubgroupKind::D: return {p.x, p.y, p.t, p.u + eps * s.m_at(p)};
  }
  return p;
}

inline Point push_point(const GeneratorSpec& s, const JetPoint1& p) { return push_point(s, p.point()); }

/// Inverse of push_point; explicit because the transformed u is carried along.
inline Point pull_point(const GeneratorSpec& s, const Point& q) {
  const double eps = s.epsilon();
  switch (s.kind()) {
    case SubgroupKind::A: return {q.x + eps * s.m_at(q), q.y + eps * s.h_at(q), q.t, q.u};
    case SubgroupKind::B: return {q.x + eps * s.m_at(q), q.y, q.t, q.u};
    case SubgroupKind::C: return {q.x, q.y + eps * s.m_at(q), q.t, q.u};
    case SubgroupKind::D: return {q.x, q.y, q.t, q.u - eps * s.m_at(q)};
  }
  return q;
}

inline constexpr double kDegenerateThreshold = 1e-12;

inline double jacobian_denominator(const GeneratorSpec& s, const JetPoint1& p) {
  return jet_denominator(s.kind(), s.epsilon(), s.derivatives_at(p.point()), p.u_x, p.u_y);
}

inline JetPoint1 push_jet1(const GeneratorSpec& s, const JetPoint1& p) {
  const auto d = s.derivatives_at(p.point());
  const double denom = jet_denominator(s.kind(), s.epsilon(), d, p.u_x, p.u_y);
  if (std::abs(denom) < kDegenerateThreshold) throw DegenerateJacobian(denom);
  const auto jets = jet_law(s.kind(), s.epsilon(), d, p.u_x, p.u_y, p.u_t, denom);
  const Point q = push_point(s, p.point());
  return {q.x, q.y, q.t, q.u, jets[0], jets[1], jets[2]};
}

inline FluxPair push_flux(const GeneratorSpec& s, const JetPoint1& p, const FluxPair& fp) {
  const auto d = s.derivatives_at(p.point());
  const double denom = jet_denominator(s.kind(), s.epsilon(), d, p.u_x, p.u_y);
  if (std::abs(denom) < kDegenerateThreshold) throw DegenerateJacobian(denom);
  const auto out = flux_law(s.kind(), s.epsilon(), d, p.u_x, p.u_y, fp.f, fp.g, denom);
  return {out[0], out[1]};
}

/// Flow parameter reached by push_point at group parameter +1.
inline double flow_orientation(SubgroupKind kind) { return kind == SubgroupKind::D ? 1.0 : -1.0; }

/// Integrates d(x,y,t,u)/ds = (xi1, xi2, xi3, eta) from s = 0 to
/// s = flow_orientation(kind) * eps_target with RK4, `steps` steps (at least 1000).
inline Point flow_oracle(const GeneratorSpec& s, const Point& p, double eps_target, std::size_t steps = 1000) {
  if (eps_target == 0.0) return p;
  steps = std::max<std::size_t>(steps, 1000);
  auto rhs = [&](const std::array<double, 4>& y) { return s.generator_at({y[0], y[1], y[2], y[3]}); };
  const double span = flow_orientation(s.kind()) * eps_target;
  const auto y = rk4_integrate<4>(rhs, std::array<double, 4>{p.x, p.y, p.t, p.u}, span, steps);
  return {y[0], y[1], y[2], y[3]};
}

/// Largest violation of the admissibility conditions on the generator at
/// `n` random points of [-1, 1]^4:
///   xi3 depends on t only;  eta_u - xi1_x - xi2_y + xi3_t is a function s(t);
///   xi1_t = kappa1_u,  xi2_t = kappa2_u,  eta_t = kappa1_x + kappa2_y
/// with gamma = 0, kappa2 = 0 and kappa1 = M for kind D (zero otherwise).
inline double generator_structure_defect(const GeneratorSpec& s, std::uint64_t seed = 11, int n = 50) {
  using expr::Expr;
  using expr::partial_diff;
  const GeneratorComponents c = s.generator();
  const Expr kappa1 = s.antiderivative().value_or(Expr());
  const Expr source = partial_diff(c.eta, "u") - partial_diff(c.xi1, "x") - partial_diff(c.xi2, "y") +
                      partial_diff(c.xi3, "t");
  const std::vector<Expr> conditions{
      partial_diff(c.xi3, "x"), partial_diff(c.xi3, "y"), partial_diff(c.xi3, "u"),
      partial_diff(source, "x"), partial_diff(source, "y"), partial_diff(source, "u"),
      partial_diff(c.xi1, "t") - partial_diff(kappa1, "u"),
      partial_diff(c.xi2, "t"),
      partial_diff(c.eta, "t") - partial_diff(kappa1, "x"),
  };
  std::vector<expr::Program> progs;
  for (const auto& e : conditions) progs.emplace_back(e, std::vector<std::string>{"x", "y", "t", "u"});
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    std::array<double, 4> v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    for (const auto& prog : progs) {
      try {
        worst = std::max(worst, std::abs(prog(v)));
      } catch (const DomainError&) {
      }
    }
  }
  return worst;
}

}  // namespace equimap::transform
