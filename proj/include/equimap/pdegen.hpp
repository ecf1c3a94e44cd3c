#pragma once

// Quasilinear second-order equations
//
//   A ub_xx + B ub_xy + C ub_yy + D = E ub_t
//
// produced by pushing a conservation law ub_t = D_x f + D_y g through an
// equivalence transformation, plus closed-form families for the heat fluxes.

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "equimap/error.hpp"
#include "equimap/expr.hpp"
#include "equimap/sampling.hpp"
#include "equimap/transform.hpp"

namespace equimap::pdegen {

using expr::Expr;

/// Coefficients over (xb, yb, tb, ub, ub_x, ub_y).
struct NonlinearPDE {
  Expr A, B, C, D, E;
};

struct Jet2Point {
  double x = 0, y = 0, t = 0, u = 0;
  double u_x = 0, u_y = 0, u_t = 0;
  double u_xx = 0, u_xy = 0, u_yy = 0;
};

/// A transformed equation with a known source term: along transported
/// solutions A ub_xx + B ub_xy + C ub_yy + D + source = E ub_t.
struct ShiftedPDE {
  NonlinearPDE pde;
  Expr source;
};

/// Variables the coefficients may reference, in Program slot order.
inline const std::vector<std::string>& coefficient_variables() {
  static const std::vector<std::string> v{"xb", "yb", "tb", "ub", "ub_x", "ub_y"};
  return v;
}

inline const expr::Alphabet& coefficient_alphabet() {
  static const expr::Alphabet a{"xb", "yb", "tb", "ub", "ub_x", "ub_y"};
  return a;
}

/// Symbols the fluxes f, g may reference.
inline const expr::Alphabet& flux_alphabet() {
  static const expr::Alphabet a{"x", "y", "t", "u", "u_x", "u_y"};
  return a;
}

inline NonlinearPDE heat_equation() { return {Expr(1.0), Expr(0.0), Expr(1.0), Expr(0.0), Expr(1.0)}; }

namespace detail {

inline Expr to_barred(const Expr& e) {
  return expr::rename(e, {{"x", "xb"}, {"y", "yb"}, {"t", "tb"}, {"u", "ub"}});
}

inline transform::FreeDerivatives<Expr> barred_derivatives(const transform::GeneratorSpec& s) {
  auto d = s.derivative_exprs();
  for (Expr* e : {&d.m_u, &d.h_u, &d.m_x, &d.m_y, &d.m_t, &d.antiderivative}) *e = to_barred(*e);
  return d;
}

inline bool uses_first_jets(const Expr& e) { return expr::depends_on(e, "u_x") || expr::depends_on(e, "u_y"); }

// Extracts the coefficients of a residual R that is linear in the second
// jets and ub_t; throws if any coefficient still contains them.
inline NonlinearPDE extract(const Expr& residual) {
  using expr::partial_diff;
  using expr::simplify_basic;
  NonlinearPDE out;
  out.A = simplify_basic(partial_diff(residual, "ub_xx"));
  out.B = simplify_basic(partial_diff(residual, "ub_xy"));
  out.C = simplify_basic(partial_diff(residual, "ub_yy"));
  out.E = simplify_basic(expr::smart::neg(partial_diff(residual, "ub_t")));
  const Expr zero(0.0);
  out.D = simplify_basic(expr::substitute(residual, {{"ub_xx", zero}, {"ub_xy", zero}, {"ub_yy", zero}, {"ub_t", zero}}));
  const char* names[] = {"A", "B", "C", "D", "E"};
  const Expr* parts[] = {&out.A, &out.B, &out.C, &out.D, &out.E};
  for (int i = 0; i < 5; ++i) {
    for (const auto& v : expr::free_variables(*parts[i])) {
      if (!coefficient_alphabet().contains(v)) {
        throw NonlinearityError(std::string("coefficient ") + names[i] + " depends on '" + v +
                                "'; the equation is not quasilinear");
      }
    }
  }
  return out;
}

inline Expr conservation_residual(const Expr& fb, const Expr& gb) {
  const auto& ctx = expr::JetContext::barred();
  return expr::smart::sub(expr::smart::add(expr::total_diff(fb, "xb", ctx), expr::total_diff(gb, "yb", ctx)),
                          expr::var("ub_t"));
}

}  // namespace detail

/// Transformed fluxes (fb, gb) over the barred alphabet, together with the
/// clearing factor 1/Delta (equal to 1 for kind D).
struct TransformedFlux {
  Expr f, g, clearing;
};

inline TransformedFlux transformed_flux(const transform::GeneratorSpec& s, const Expr& f, const Expr& g) {
  using expr::var;
  using transform::SubgroupKind;
  expr::require_alphabet(f, flux_alphabet(), "flux f");
  expr::require_alphabet(g, flux_alphabet(), "flux g");
  const double eps = s.epsilon();
  const Expr e(eps);
  const auto d = detail::barred_derivatives(s);
  const Expr m = detail::to_barred(s.m());
  const Expr h = detail::to_barred(s.h());
  const Expr ux = var("ub_x");
  const Expr uy = var("ub_y");

  // inverse maps: original symbols as functions of barred ones
  expr::Substitution back{{"x", var("xb")}, {"y", var("yb")}, {"t", var("tb")}, {"u", var("ub")}};
  Expr inv_denom(1.0);  // 1/Delta in barred variables
  switch (s.kind()) {
    case SubgroupKind::A:
      inv_denom = Expr(1.0) + e * (d.m_u * ux + d.h_u * uy);
      back["x"] = var("xb") + e * m;
      back["y"] = var("yb") + e * h;
      back["u_x"] = ux / inv_denom;
      back["u_y"] = uy / inv_denom;
      break;
    case SubgroupKind::B:
      inv_denom = Expr(1.0) + e * d.m_u * ux;
      back["x"] = var("xb") + e * m;
      back["u_x"] = ux / inv_denom;
      back["u_y"] = (uy - e * d.m_y * ux) / inv_denom;
      break;
    case SubgroupKind::C:
      inv_denom = Expr(1.0) + e * d.m_u * uy;
      back["y"] = var("yb") + e * m;
      back["u_x"] = (ux - e * d.m_x * uy) / inv_denom;
      back["u_y"] = uy / inv_denom;
      break;
    case SubgroupKind::D:
      back["u"] = var("ub") - e * m;
      back["u_x"] = ux - e * d.m_x;
      back["u_y"] = uy - e * d.m_y;
      break;
  }
  const Expr fo = expr::simplify_basic(expr::substitute(f, back));
  const Expr go = expr::simplify_basic(expr::substitute(g, back));
  if (s.kind() == SubgroupKind::D) {
    // the shift moves the source into the equation instead of into f
    return {fo, go, Expr(1.0)};
  }
  // derivative values are functions of (u, y) or (u, x), which the inverse map fixes
  const Expr delta = Expr(1.0) / inv_denom;
  const auto out = transform::flux_law<Expr>(s.kind(), eps, d, back.at("u_x"), back.at("u_y"), fo, go, delta);
  return {expr::simplify_basic(out[0]), expr::simplify_basic(out[1]), expr::simplify_basic(inv_denom)};
}

/// The equation satisfied by transported solutions of ub_t = D_x f + D_y g,
/// kinds A, B, C. Cleared by Delta^2 when f or g involves first jets.
inline NonlinearPDE assemble_from_flux(const transform::GeneratorSpec& s, const Expr& f, const Expr& g) {
  if (s.kind() == transform::SubgroupKind::D) {
    throw ConstructionError("kind D maps to an inhomogeneous equation; use shift_inhomogeneity");
  }
  const TransformedFlux tf = transformed_flux(s, f, g);
  Expr r = detail::conservation_residual(tf.f, tf.g);
  if (detail::uses_first_jets(f) || detail::uses_first_jets(g)) {
    r = expr::smart::mul(expr::smart::power(tf.clearing, 2.0), r);
  }
  return detail::extract(r);
}

/// Kind D: the pulled-back conservation law and its source eps*m_t.
inline ShiftedPDE shift_inhomogeneity(const transform::GeneratorSpec& s, const Expr& f, const Expr& g) {
  if (s.kind() != transform::SubgroupKind::D) throw ConstructionError("shift_inhomogeneity requires kind D");
  const TransformedFlux tf = transformed_flux(s, f, g);
  const auto d = detail::barred_derivatives(s);
  return {detail::extract(detail::conservation_residual(tf.f, tf.g)),
          expr::simplify_basic(expr::smart::mul(Expr(s.epsilon()), d.m_t))};
}

/// Closed form for the heat fluxes under xi1 = m(u), xi2 = h(u).
inline NonlinearPDE builtin_heat_family_A(const Expr& m, const Expr& h, double eps) {
  using expr::partial_diff;
  expr::require_alphabet(m, {"u"}, "function m");
  expr::require_alphabet(h, {"u"}, "function h");
  const Expr m1 = detail::to_barred(partial_diff(m, "u"));
  const Expr h1 = detail::to_barred(partial_diff(h, "u"));
  const Expr m2 = detail::to_barred(partial_diff(partial_diff(m, "u"), "u"));
  const Expr h2 = detail::to_barred(partial_diff(partial_diff(h, "u"), "u"));
  const Expr ux = expr::var("ub_x");
  const Expr uy = expr::var("ub_y");
  const Expr e(eps);
  const Expr e2(eps * eps);
  const Expr q = pow(h1, 2) + pow(m1, 2);
  NonlinearPDE p;
  p.A = Expr(1.0) + Expr(2 * eps) * h1 * uy + e2 * q * pow(uy, 2);
  p.B = Expr(-2 * eps) * (m1 * uy + h1 * ux + e * q * uy * ux);
  p.C = Expr(1.0) + Expr(2 * eps) * m1 * ux + e2 * q * pow(ux, 2);
  p.D = -e * (m2 * ux + h2 * uy) * (pow(ux, 2) + pow(uy, 2));
  p.E = pow(Expr(1.0) + e * (m1 * ux + h1 * uy), 2);
  for (Expr* c : {&p.A, &p.B, &p.C, &p.D, &p.E}) *c = expr::simplify_basic(*c);
  return p;
}

/// Closed form for the heat fluxes under xi1 = m(u, y), rederived from the
/// kind B flux law (reduces to family A with h = 0 when m_y = 0).
inline NonlinearPDE builtin_heat_family_B(const Expr& m, double eps) {
  using expr::partial_diff;
  expr::require_alphabet(m, {"u", "y"}, "function m");
  auto D1 = [&](const Expr& e, const char* v) { return partial_diff(e, v); };
  const Expr mu = detail::to_barred(D1(m, "u"));
  const Expr my = detail::to_barred(D1(m, "y"));
  const Expr muu = detail::to_barred(D1(D1(m, "u"), "u"));
  const Expr muy = detail::to_barred(D1(D1(m, "u"), "y"));
  const Expr myy = detail::to_barred(D1(D1(m, "y"), "y"));
  const Expr ux = expr::var("ub_x");
  const Expr uy = expr::var("ub_y");
  const Expr e(eps);
  const Expr e2(eps * eps);
  const Expr lead = Expr(1.0) + e * mu * ux;
  NonlinearPDE p;
  p.A = Expr(1.0) + e2 * pow(my + mu * uy, 2);
  p.B = Expr(-2 * eps) * (mu * uy + my) * lead;
  p.C = pow(lead, 2);
  p.E = pow(lead, 2);
  const Expr cubic = e2 * pow(mu, 2) * myy - Expr(2 * eps * eps) * mu * my * muy + e2 * muu * pow(my, 2) + muu;
  p.D = -e * ux *
        (pow(ux, 2) * cubic + Expr(2 * eps) * ux * uy * (mu * muy - muu * my) +
         Expr(2 * eps) * ux * (mu * myy - my * muy) + pow(uy, 2) * muu + Expr(2.0) * uy * muy + myy);
  for (Expr* c : {&p.A, &p.B, &p.C, &p.D, &p.E}) *c = expr::simplify_basic(*c);
  return p;
}

/// A ub_xx + B ub_xy + C ub_yy + D - E ub_t, interpreted.
inline double pde_residual(const NonlinearPDE& p, const Jet2Point& j) {
  expr::VariableBinding b{{"xb", j.x}, {"yb", j.y}, {"tb", j.t}, {"ub", j.u}, {"ub_x", j.u_x}, {"ub_y", j.u_y}};
  return expr::eval(p.A, b) * j.u_xx + expr::eval(p.B, b) * j.u_xy + expr::eval(p.C, b) * j.u_yy +
         expr::eval(p.D, b) - expr::eval(p.E, b) * j.u_t;
}

/// Compiled coefficients for batch evaluation.
class PDEEvaluator {
 public:
  explicit PDEEvaluator(const NonlinearPDE& p) {
    const auto& vars = coefficient_variables();
    progs_ = {expr::Program(p.A, vars), expr::Program(p.B, vars), expr::Program(p.C, vars),
              expr::Program(p.D, vars), expr::Program(p.E, vars)};
  }

  std::array<double, 5> coefficients(const Jet2Point& j) const {
    const std::array<double, 6> v{j.x, j.y, j.t, j.u, j.u_x, j.u_y};
    return {progs_[0](v), progs_[1](v), progs_[2](v), progs_[3](v), progs_[4](v)};
  }

  double residual(const Jet2Point& j) const {
    const auto c = coefficients(j);
    return c[0] * j.u_xx + c[1] * j.u_xy + c[2] * j.u_yy + c[3] - c[4] * j.u_t;
  }

 private:
  std::array<expr::Program, 5> progs_;
};

/// |Ra Eb - Rb Ea| / (1 + |Ra Eb| + |Rb Ea|): zero when the two equations
/// agree up to an overall factor at j.
inline double proportional_mismatch(const PDEEvaluator& a, const PDEEvaluator& b, const Jet2Point& j) {
  const double ra = a.residual(j);
  const double rb = b.residual(j);
  const double ea = a.coefficients(j)[4];
  const double eb = b.coefficients(j)[4];
  const double lhs = ra * eb;
  const double rhs = rb * ea;
  return std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs));
}

/// Uniform random jet, all coordinates in [lo, hi].
inline Jet2Point random_jet2(Rng& rng, double lo = -1.0, double hi = 1.0) {
  Jet2Point j;
  for (double* c : {&j.x, &j.y, &j.t, &j.u, &j.u_x, &j.u_y, &j.u_t, &j.u_xx, &j.u_xy, &j.u_yy}) {
    *c = rng.uniform(lo, hi);
  }
  return j;
}

/// 1/Delta of the inverse jet map at a barred jet: vanishes on the fold set.
inline double inverse_jet_factor(const transform::GeneratorSpec& s, const Jet2Point& j) {
  using transform::SubgroupKind;
  const auto d = s.derivatives_at({j.x, j.y, j.t, j.u});
  const double e = s.epsilon();
  switch (s.kind()) {
    case SubgroupKind::A: return 1.0 + e * (d.m_u * j.u_x + d.h_u * j.u_y);
    case SubgroupKind::B: return 1.0 + e * d.m_u * j.u_x;
    case SubgroupKind::C: return 1.0 + e * d.m_u * j.u_y;
    case SubgroupKind::D: return 1.0;
  }
  return 1.0;
}

}  // namespace equimap::pdegen
