#pragma once

// Solutions of the linear equation carried through a transformation as an
// implicit relation G(xb, yb, tb, ub) = 0, its numerical evaluation and the
// second-order jet obtained by implicit differentiation.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "equimap/error.hpp"
#include "equimap/expr.hpp"
#include "equimap/pdegen.hpp"
#include "equimap/sampling.hpp"
#include "equimap/transform.hpp"

namespace equimap::solution {

using expr::Expr;

struct SolutionJet {
  double u = 0;
  double u_x = 0, u_y = 0, u_t = 0;
  double u_xx = 0, u_xy = 0, u_yy = 0;
};

/// Where to look for the root in ub.
struct RootPolicy {
  std::optional<std::pair<double, double>> bracket;
  std::optional<double> seed;

  static RootPolicy in(double lo, double hi) { return {std::pair{lo, hi}, std::nullopt}; }
  static RootPolicy from(double seed) { return {std::nullopt, seed}; }
};

inline constexpr double kRootTolerance = 1e-12;
inline constexpr double kMinSlope = 1e-10;
inline constexpr int kMaxDoublings = 64;

class ImplicitSolution {
 public:
  /// G over (xb, yb, tb, ub).
  explicit ImplicitSolution(Expr relation) : relation_(std::move(relation)) {
    using expr::partial_diff;
    using expr::smart::add;
    using expr::smart::div;
    using expr::smart::mul;
    using expr::smart::neg;
    expr::require_alphabet(relation_, {"xb", "yb", "tb", "ub"}, "implicit relation");
    const Expr gu = partial_diff(relation_, "ub");
    const Expr p = neg(div(partial_diff(relation_, "xb"), gu));
    const Expr q = neg(div(partial_diff(relation_, "yb"), gu));
    const Expr r = neg(div(partial_diff(relation_, "tb"), gu));
    // along the solution d/dxb = partial_xb + u_x partial_ub
    const Expr pxx = add(partial_diff(p, "xb"), mul(partial_diff(p, "ub"), p));
    const Expr pxy = add(partial_diff(p, "yb"), mul(partial_diff(p, "ub"), q));
    const Expr pyy = add(partial_diff(q, "yb"), mul(partial_diff(q, "ub"), q));
    const std::vector<std::string> vars{"xb", "yb", "tb", "ub"};
    g_ = expr::Program(relation_, vars);
    gu_ = expr::Program(gu, vars);
    jet_ = {expr::Program(p, vars),   expr::Program(q, vars),   expr::Program(r, vars),
            expr::Program(pxx, vars), expr::Program(pxy, vars), expr::Program(pyy, vars)};
  }

  const Expr& relation() const noexcept { return relation_; }

  double G(double x, double y, double t, double u) const { return g_(std::array<double, 4>{x, y, t, u}); }
  double G_u(double x, double y, double t, double u) const { return gu_(std::array<double, 4>{x, y, t, u}); }

  /// Root ub of G(x, y, t, .) selected by `policy`.
  double eval_u(double x, double y, double t, const RootPolicy& policy) const {
    auto f = [&](double u) { return G(x, y, t, u); };
    double lo = 0.0;
    double hi = 0.0;
    std::optional<double> start;
    if (policy.bracket) {
      lo = std::min(policy.bracket->first, policy.bracket->second);
      hi = std::max(policy.bracket->first, policy.bracket->second);
      if (!has_sign_change(f(lo), f(hi))) {
        throw NoBracket("no sign change of G on [" + expr::format_number(lo) + ", " + expr::format_number(hi) + "]");
      }
    } else {
      const double seed = policy.seed.value_or(0.0);
      if (auto r = newton_only(x, y, t, seed)) return *r;
      auto b = expand_bracket(f, seed);
      if (!b) throw NoBracket("no sign change of G found around seed " + expr::format_number(seed));
      std::tie(lo, hi) = *b;
      start = seed;
    }
    return refine(x, y, t, lo, hi, start);
  }

  /// Derivatives of ub along the solution surface at a root.
  SolutionJet implicit_jet(double x, double y, double t, double u) const {
    const std::array<double, 4> v{x, y, t, u};
    const double residual = g_(v);
    if (std::abs(residual) > 1e-10 * (1.0 + std::abs(u))) {
      throw NumericError("point is not on the solution: G = " + expr::format_number(residual));
    }
    const double slope = gu_(v);
    if (std::abs(slope) < kMinSlope) throw DerivativeVanishes("dG/du vanishes at the solution point");
    return {u, jet_[0](v), jet_[1](v), jet_[2](v), jet_[3](v), jet_[4](v), jet_[5](v)};
  }

 private:
  static bool has_sign_change(double a, double b) { return a == 0.0 || b == 0.0 || (a < 0.0) != (b < 0.0); }

  bool converged(double g, double u) const { return std::abs(g) <= kRootTolerance * (1.0 + std::abs(u)); }

  double accept(double x, double y, double t, double u) const {
    if (std::abs(G_u(x, y, t, u)) < kMinSlope) {
      throw DerivativeVanishes("dG/du vanishes at the root u = " + expr::format_number(u));
    }
    return u;
  }

  // A few plain Newton steps from the seed; nullopt unless they converge.
  std::optional<double> newton_only(double x, double y, double t, double u) const {
    try {
      for (int i = 0; i < 20; ++i) {
        const double g = G(x, y, t, u);
        if (converged(g, u)) return accept(x, y, t, u);
        const double s = G_u(x, y, t, u);
        if (std::abs(s) < kMinSlope) return std::nullopt;
        u -= g / s;
        if (!std::isfinite(u)) return std::nullopt;
      }
    } catch (const DomainError&) {
    }
    return std::nullopt;
  }

  template <class F>
  static std::optional<std::pair<double, double>> expand_bracket(F&& f, double seed) {
    double w = 1e-2 * (1.0 + std::abs(seed));
    for (int i = 0; i < kMaxDoublings; ++i, w *= 2.0) {
      try {
        if (has_sign_change(f(seed - w), f(seed))) return std::pair{seed - w, seed};
        if (has_sign_change(f(seed), f(seed + w))) return std::pair{seed, seed + w};
      } catch (const DomainError&) {
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  // Newton inside a sign-change bracket, bisecting whenever a step leaves it
  // or fails to halve |G|.
  double refine(double x, double y, double t, double lo, double hi, std::optional<double> start) const {
    double glo = G(x, y, t, lo);
    if (glo == 0.0) return accept(x, y, t, lo);
    if (G(x, y, t, hi) == 0.0) return accept(x, y, t, hi);
    double u = start && *start > lo && *start < hi ? *start : 0.5 * (lo + hi);
    double prev = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 400; ++iter) {
      const double g = G(x, y, t, u);
      if (converged(g, u)) return accept(x, y, t, u);
      if ((g < 0.0) == (glo < 0.0)) {
        lo = u;
        glo = g;
      } else {
        hi = u;
      }
      if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) {
        return accept(x, y, t, u);
      }
      const double s = G_u(x, y, t, u);
      double next = s != 0.0 ? u - g / s : lo - 1.0;
      if (!(next > lo && next < hi) || std::abs(g) > 0.5 * prev) next = 0.5 * (lo + hi);
      prev = std::abs(g);
      u = next;
    }
    throw NumericError("root solver did not converge");
  }

  Expr relation_;
  expr::Program g_, gu_;
  std::array<expr::Program, 6> jet_;
};

/// Substitution taking the linear-equation variables to barred ones.
inline expr::Substitution inverse_point_map(const transform::GeneratorSpec& s) {
  using expr::var;
  using transform::SubgroupKind;
  const Expr e(s.epsilon());
  const Expr m = pdegen::detail::to_barred(s.m());
  expr::Substitution map{{"x", var("xb")}, {"y", var("yb")}, {"t", var("tb")}, {"u", var("ub")}};
  switch (s.kind()) {
    case SubgroupKind::A:
      map["x"] = var("xb") + e * m;
      map["y"] = var("yb") + e * pdegen::detail::to_barred(s.h());
      break;
    case SubgroupKind::B: map["x"] = var("xb") + e * m; break;
    case SubgroupKind::C: map["y"] = var("yb") + e * m; break;
    case SubgroupKind::D: map["u"] = var("ub") - e * m; break;
  }
  return map;
}

/// phi(x, y, t, u) = 0 solving the linear equation, carried to barred variables.
inline ImplicitSolution transport(const transform::GeneratorSpec& s, const Expr& phi) {
  expr::require_alphabet(phi, {"x", "y", "t", "u"}, "solution relation");
  return ImplicitSolution(expr::simplify_basic(expr::substitute(phi, inverse_point_map(s))));
}

inline pdegen::Jet2Point to_jet2(double x, double y, double t, const SolutionJet& j) {
  return {x, y, t, j.u, j.u_x, j.u_y, j.u_t, j.u_xx, j.u_xy, j.u_yy};
}

struct SamplePoint {
  double x = 0, y = 0, t = 0;
};

struct Failure {
  SamplePoint at;
  std::string reason;
};

struct ResidualReport {
  std::size_t n = 0;  // points evaluated successfully
  double max_abs_residual = 0.0;
  double mean_abs_residual = 0.0;
  std::vector<Failure> failures;
};

/// Axis-aligned box in (xb, yb, tb).
struct Region {
  std::array<double, 3> lo{0, 0, 0};
  std::array<double, 3> hi{1, 1, 1};
};

/// Rejection sampling; `admissible` may veto points (e.g. near a fold).
inline std::vector<SamplePoint> sample_region(Rng& rng, const Region& r, std::size_t n,
                                              const std::function<bool(const SamplePoint&)>& admissible = {}) {
  std::vector<SamplePoint> out;
  const std::size_t cap = 1000 * n + 1000;
  for (std::size_t tries = 0; out.size() < n && tries < cap; ++tries) {
    SamplePoint p{rng.uniform(r.lo[0], r.hi[0]), rng.uniform(r.lo[1], r.hi[1]), rng.uniform(r.lo[2], r.hi[2])};
    if (!admissible || admissible(p)) out.push_back(p);
  }
  if (out.size() < n) throw NumericError("admissible region too small for rejection sampling");
  return out;
}

struct Axis {
  double lo = 0, hi = 1;
  std::size_t n = 1;

  double at(std::size_t i) const { return n <= 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1); }
};

/// Tensor grid, x fastest.
inline std::vector<SamplePoint> grid(const Axis& x, const Axis& y, const Axis& t) {
  std::vector<SamplePoint> out;
  out.reserve(x.n * y.n * t.n);
  for (std::size_t k = 0; k < t.n; ++k)
    for (std::size_t j = 0; j < y.n; ++j)
      for (std::size_t i = 0; i < x.n; ++i) out.push_back({x.at(i), y.at(j), t.at(k)});
  return out;
}

/// Residual of `pde` (plus an optional source over xb, yb, tb) along the
/// solution at each point. Points where the solver fails are listed in
/// `failures` and excluded from the statistics.
inline ResidualReport verify_residual(const ImplicitSolution& sol, const pdegen::NonlinearPDE& pde,
                                      const std::vector<SamplePoint>& points, const RootPolicy& policy,
                                      const std::optional<Expr>& source = std::nullopt) {
  const pdegen::PDEEvaluator ev(pde);
  std::optional<expr::Program> src;
  if (source) src.emplace(*source, std::vector<std::string>{"xb", "yb", "tb"});
  ResidualReport rep;
  double sum = 0.0;
  for (const auto& p : points) {
    try {
      const double u = sol.eval_u(p.x, p.y, p.t, policy);
      const SolutionJet j = sol.implicit_jet(p.x, p.y, p.t, u);
      double r = ev.residual(to_jet2(p.x, p.y, p.t, j));
      if (src) r += (*src)(std::array<double, 3>{p.x, p.y, p.t});
      rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(r));
      sum += std::abs(r);
      ++rep.n;
    } catch (const NumericError& e) {
      rep.failures.push_back({p, std::string(e.kind()) + ": " + e.what()});
    }
  }
  rep.mean_abs_residual = rep.n ? sum / static_cast<double>(rep.n) : 0.0;
  return rep;
}

/// Largest |u_xx + u_yy - u_t| of the untransformed relation phi at `points`;
/// validates inputs before transport.
inline double heat_defect(const Expr& phi, const std::vector<SamplePoint>& points, const RootPolicy& policy) {
  ImplicitSolution sol(expr::rename(phi, {{"x", "xb"}, {"y", "yb"}, {"t", "tb"}, {"u", "ub"}}));
  double worst = 0.0;
  for (const auto& p : points) {
    const double u = sol.eval_u(p.x, p.y, p.t, policy);
    const SolutionJet j = sol.implicit_jet(p.x, p.y, p.t, u);
    worst = std::max(worst, std::abs(j.u_xx + j.u_yy - j.u_t));
  }
  return worst;
}

}  // namespace equimap::solution
