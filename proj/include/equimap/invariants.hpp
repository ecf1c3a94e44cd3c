#pragma once

// Differential invariants of the subgroup xi1 = m(u), xi2 = h(u) and numeric
// annihilation tests under its vector fields.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "equimap/error.hpp"
#include "equimap/expr.hpp"
#include "equimap/sampling.hpp"

namespace equimap::invariants {

using expr::Expr;

/// Coordinates of the extended space, in storage order.
enum Coord : std::size_t {
  X, Y, T, U, F, G, U_X, U_Y, U_T, F_X, F_Y, F_T, F_U, G_X, G_Y, G_T, G_U, F_UX, F_UY, G_UX, G_UY, kCoords
};

inline const std::array<std::string, kCoords>& coordinate_names() {
  static const std::array<std::string, kCoords> names{"x",   "y",   "t",   "u",   "f",   "g",    "u_x",
                                                      "u_y", "u_t", "f_x", "f_y", "f_t", "f_u",  "g_x",
                                                      "g_y", "g_t", "g_u", "f_ux", "f_uy", "g_ux", "g_uy"};
  return names;
}

inline const expr::Alphabet& extended_alphabet() {
  static const expr::Alphabet a = [] {
    expr::Alphabet out;
    for (const auto& n : coordinate_names()) out.insert(n);
    return out;
  }();
  return a;
}

struct ExtendedPoint {
  std::array<double, kCoords> c{};

  double operator[](Coord i) const { return c[i]; }
  double& operator[](Coord i) { return c[i]; }

  static ExtendedPoint filled(double v) {
    ExtendedPoint p;
    p.c.fill(v);
    return p;
  }
};

using TangentVector = std::array<double, kCoords>;

/// Uniform in [lo, hi]^21.
inline ExtendedPoint random_point(Rng& rng, double lo = 0.5, double hi = 2.0) {
  ExtendedPoint p;
  for (auto& v : p.c) v = rng.uniform(lo, hi);
  return p;
}

namespace detail {

inline double nonzero(double v, const char* what) {
  if (v == 0.0 || !std::isfinite(v)) throw DegenerateDenominator(std::string(what) + " vanishes");
  return v;
}

inline std::array<double, 3> derivatives_of(const Expr& m, double u) {
  const Expr m1 = expr::partial_diff(m, "u");
  const Expr m2 = expr::partial_diff(m1, "u");
  const expr::VariableBinding b{{"u", u}};
  return {expr::eval(m, b), expr::eval(m1, b), expr::eval(m2, b)};
}

inline expr::VariableBinding bind(const ExtendedPoint& p) {
  expr::VariableBinding b;
  for (std::size_t i = 0; i < kCoords; ++i) b.set(coordinate_names()[i], p.c[i]);
  return b;
}

}  // namespace detail

/// Order-zero invariants u_y/u_x, u_t/u_x and f/xi1 + g.
struct ZeroOrder {
  double xi1, xi2, xi3;
};

inline ZeroOrder zero_order_invariants(double u_x, double u_y, double u_t, double f, double g) {
  detail::nonzero(u_x, "u_x");
  detail::nonzero(u_y, "u_y");
  const double xi1 = u_y / u_x;
  return {xi1, u_t / u_x, f / xi1 + g};
}

inline ZeroOrder zero_order_invariants(const ExtendedPoint& p) {
  return zero_order_invariants(p[U_X], p[U_Y], p[U_T], p[F], p[G]);
}

/// The 13 first-order invariants for h = 0, as expressions over the extended
/// coordinates. Note xi3 here is g/u_x, not the order-zero xi3.
inline const std::vector<Expr>& first_order_invariant_exprs() {
  static const std::vector<Expr> xs = [] {
    using expr::var;
    const Expr ux = var("u_x"), uy = var("u_y"), ut = var("u_t"), f = var("f"), g = var("g");
    const Expr fx = var("f_x"), fy = var("f_y"), ft = var("f_t");
    const Expr gx = var("g_x"), gy = var("g_y"), gt = var("g_t");
    const Expr fux = var("f_ux"), fuy = var("f_uy"), gux = var("g_ux"), guy = var("g_uy");
    const Expr xi1 = uy / ux;
    const Expr xi2 = ut / ux;
    const Expr xi3 = g / ux;
    const Expr xi10 = guy;
    return std::vector<Expr>{
        xi1,
        xi2,
        xi3,
        f + xi1 * g,
        gx + Expr(1.0) / xi1 * fx,
        gy / gx * (Expr(1.0) / xi1),
        fy - gy / gx * fx,
        gt / gx * (Expr(1.0) / xi1),
        ft - gt / gx * fx,
        xi10,
        -(xi1 * xi10 + xi3) * fx + fuy * gx * xi1,
        (xi3 - xi1 * guy) * fx + xi1 * gx * gux,
        ((guy * fx - gux * gx) * fx + (fux * gx - fuy * fx) * gx) * pow(xi1, 2),
    };
  }();
  return xs;
}

inline std::vector<double> first_order_invariants(const ExtendedPoint& p) {
  detail::nonzero(p[U_X], "u_x");
  detail::nonzero(p[U_Y], "u_y");
  detail::nonzero(p[G_X], "g_x");
  const auto b = detail::bind(p);
  std::vector<double> out;
  for (const auto& e : first_order_invariant_exprs()) out.push_back(expr::eval(e, b));
  return out;
}

/// V_m together with its first-order prolongation (h = 0).
inline TangentVector vm_tangent(const ExtendedPoint& p, const Expr& m) {
  const auto [m0, m1, m2] = detail::derivatives_of(m, p[U]);
  TangentVector v{};
  v[X] = m0;
  v[U_X] = m1 * p[U_X] * p[U_X];
  v[U_Y] = m1 * p[U_X] * p[U_Y];
  v[U_T] = m1 * p[U_X] * p[U_T];
  v[F] = -m1 * p[U_Y] * p[G];
  v[G] = m1 * p[U_X] * p[G];
  v[F_U] = -(m1 * (p[F_X] + p[U_Y] * p[G_U]) + m2 * (p[U_X] * p[U_X] * p[F_UX] + p[U_X] * p[U_Y] * p[F_UY]));
  v[G_U] = -(m1 * (p[G_X] - p[U_X] * p[G_U]) +
             m2 * (p[U_X] * p[U_X] * p[G_UX] + p[U_X] * p[U_Y] * p[G_UY] - p[U_X] * p[G]));
  v[F_X] = -m1 * p[U_Y] * p[G_X];
  v[F_Y] = -m1 * p[U_Y] * p[G_Y];
  v[F_T] = -m1 * p[U_Y] * p[G_T];
  v[G_X] = m1 * p[U_X] * p[G_X];
  v[G_Y] = m1 * p[U_X] * p[G_Y];
  v[G_T] = m1 * p[U_X] * p[G_T];
  v[F_UX] = -m1 * (2 * p[U_X] * p[F_UX] + p[U_Y] * p[F_UY] + p[U_Y] * p[G_UX]);
  v[F_UY] = -m1 * (p[U_X] * p[F_UY] + p[U_Y] * p[G_UY] + p[G]);
  v[G_UX] = -m1 * (p[U_X] * p[G_UX] + p[U_Y] * p[G_UY] - p[G]);
  return v;
}

/// V_h on the order-zero coordinates.
inline TangentVector vh_tangent(const ExtendedPoint& p, const Expr& h) {
  const auto [h0, h1, h2] = detail::derivatives_of(h, p[U]);
  (void)h2;
  TangentVector v{};
  v[Y] = h0;
  v[U_X] = h1 * p[U_X] * p[U_Y];
  v[U_Y] = h1 * p[U_Y] * p[U_Y];
  v[U_T] = h1 * p[U_Y] * p[U_T];
  v[F] = h1 * p[U_Y] * p[F];
  v[G] = -h1 * p[U_X] * p[F];
  return v;
}

/// Terms (dJ/dc)(p) * tangent_c of the directional derivative.
inline TangentVector annihilation_terms(const Expr& J, const TangentVector& tangent, const ExtendedPoint& p) {
  expr::require_alphabet(J, extended_alphabet(), "invariant candidate");
  const auto b = detail::bind(p);
  TangentVector terms{};
  for (std::size_t i = 0; i < kCoords; ++i) {
    if (tangent[i] == 0.0 || !expr::depends_on(J, coordinate_names()[i])) continue;
    terms[i] = expr::eval(expr::partial_diff(J, coordinate_names()[i]), b) * tangent[i];
  }
  return terms;
}

/// Directional derivative of J along `tangent` at p; zero for an invariant.
inline double annihilation_test(const Expr& J, const TangentVector& tangent, const ExtendedPoint& p) {
  double s = 0.0;
  for (double v : annihilation_terms(J, tangent, p)) s += v;
  return s;
}

/// 1 + |J| * |tangent|, the scale of the invariance tolerance.
inline double annihilation_scale(const Expr& J, const TangentVector& tangent, const ExtendedPoint& p) {
  double norm = 0.0;
  for (double v : tangent) norm += v * v;
  return 1.0 + std::abs(expr::eval(J, detail::bind(p))) * std::sqrt(norm);
}

/// 1 + sum of |terms|: the size the directional derivative would have
/// without cancellation.
inline double term_scale(const TangentVector& terms) {
  double s = 1.0;
  for (double v : terms) s += std::abs(v);
  return s;
}

/// Max component of [V_m, V_h] at the order-zero coordinates of p.
inline double commutator_check(const Expr& m, const Expr& h, const ExtendedPoint& p) {
  using expr::var;
  const Expr m1 = expr::partial_diff(m, "u");
  const Expr h1 = expr::partial_diff(h, "u");
  const Expr ux = var("u_x"), uy = var("u_y"), ut = var("u_t"), f = var("f"), g = var("g");
  // components over (x, y, u_x, u_y, u_t, f, g); neither field moves t or u
  const std::vector<std::string> coords{"x", "y", "u_x", "u_y", "u_t", "f", "g"};
  const std::vector<Expr> vm{m, Expr(0.0), m1 * ux * ux, m1 * ux * uy, m1 * ux * ut, -(m1 * uy * g), m1 * ux * g};
  const std::vector<Expr> vh{Expr(0.0), h, h1 * ux * uy, h1 * uy * uy, h1 * uy * ut, h1 * uy * f, -(h1 * ux * f)};
  const auto b = detail::bind(p);
  auto apply = [&](const std::vector<Expr>& field, const Expr& target) {
    double s = 0.0;
    for (std::size_t k = 0; k < coords.size(); ++k) {
      if (!expr::depends_on(target, coords[k])) continue;
      s += expr::eval(field[k], b) * expr::eval(expr::partial_diff(target, coords[k]), b);
    }
    return s;
  };
  double worst = 0.0;
  for (std::size_t c = 0; c < coords.size(); ++c) {
    worst = std::max(worst, std::abs(apply(vm, vh[c]) - apply(vh, vm[c])));
  }
  return worst;
}

}  // namespace equimap::invariants
