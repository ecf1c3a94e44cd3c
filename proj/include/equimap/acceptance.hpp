#pragma once

// The acceptance suite: one check per criterion with its tolerance pinned
// here. Shared by the acceptance test binary and `equimap selftest`.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "equimap/expr.hpp"
#include "equimap/invariants.hpp"
#include "equimap/pdegen.hpp"
#include "equimap/sampling.hpp"
#include "equimap/solution.hpp"
#include "equimap/testing/random_expr.hpp"
#include "equimap/testing/sample_specs.hpp"
#include "equimap/transform.hpp"

namespace equimap::acceptance {

using expr::Expr;
using expr::parse;
using transform::GeneratorSpec;

struct Outcome {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline bool time_limit(double seconds, double limit, std::string& detail) {
  detail += " time=" + num(seconds) + "s (limit " + num(limit) + "s)";
  return seconds < limit;
}

double constexpr kQuadEps = 0.5;

inline double quadratic_closed_form(double x, double y, double t) {
  return 1.0 - std::sqrt(1.0 - 2.0 * (x + y * y + 2.0 * t));
}

inline double discriminant(const solution::SamplePoint& p) { return 1.0 - 2.0 * (p.x + p.y * p.y + 2.0 * p.t); }

}  // namespace detail

// 1. Quadratic map: implicit solution against its closed form, and the printed
//    equation along it.
inline bool quadratic_map(std::uint64_t seed, std::string& out) {
  constexpr double kValueTol = 1e-10;
  constexpr double kResidualTol = 1e-8;
  auto s = GeneratorSpec::kind_a(parse("u^2"), parse("0"), detail::kQuadEps);
  auto sol = solution::transport(s, parse("u - (x + y^2 + 2*t)"));
  Rng rng(seed);
  auto pts = solution::sample_region(rng, {{-1.5, -1, 0}, {0.45, 1, 0.25}}, 200,
                                     [](const solution::SamplePoint& p) { return detail::discriminant(p) >= 0.1; });
  const auto policy = solution::RootPolicy::in(-3, 1);
  double worst = 0.0;
  for (const auto& p : pts) {
    worst = std::max(worst, std::abs(sol.eval_u(p.x, p.y, p.t, policy) - detail::quadratic_closed_form(p.x, p.y, p.t)));
  }
  const auto& al = pdegen::coefficient_alphabet();
  pdegen::NonlinearPDE printed{parse("1 + ub^2*ub_y^2", al), parse("-2*(1 + ub*ub_x)*ub*ub_y", al),
                               parse("(1 + ub*ub_x)^2", al), parse("-(ub_y^2 + ub_x^2)*ub_x", al),
                               parse("(1 + ub*ub_x)^2", al)};
  auto rep = solution::verify_residual(sol, printed, pts, policy);
  out = "max|u - closed form|=" + detail::num(worst) + " (tol " + detail::num(kValueTol) + ") max residual=" +
        detail::num(rep.max_abs_residual) + " (tol " + detail::num(kResidualTol) + ") points=" +
        std::to_string(rep.n) + " failures=" + std::to_string(rep.failures.size());
  return worst <= kValueTol && rep.max_abs_residual <= kResidualTol && rep.failures.empty() && rep.n == 200;
}

// 2. Assembled coefficients against the closed-form family A.
inline bool cross_check(std::uint64_t seed, std::string& out) {
  constexpr double kTol = 1e-9;
  constexpr int kPoints = 1000;
  constexpr double kFoldMargin = 0.1;
  const std::pair<const char*, const char*> pairs[] = {{"u^2", "0"}, {"sin(u)", "cos(u)"}, {"u^3 - u", "u^2"}};
  Rng rng(seed);
  double worst = 0.0;
  int configs = 0;
  for (auto [m, h] : pairs) {
    for (double eps : {0.1, 0.5, 1.0}) {
      auto s = GeneratorSpec::kind_a(parse(m), parse(h), eps);
      pdegen::PDEEvaluator assembled(pdegen::assemble_from_flux(s, parse("u_x"), parse("u_y")));
      pdegen::PDEEvaluator builtin(pdegen::builtin_heat_family_A(parse(m), parse(h), eps));
      for (int done = 0; done < kPoints;) {
        auto j = pdegen::random_jet2(rng);
        if (std::abs(pdegen::inverse_jet_factor(s, j)) < kFoldMargin) continue;
        worst = std::max(worst, pdegen::proportional_mismatch(assembled, builtin, j));
        ++done;
      }
      ++configs;
    }
  }
  out = "configs=" + std::to_string(configs) + " x " + std::to_string(kPoints) +
        " jets, max proportional mismatch=" + detail::num(worst) + " (tol " + detail::num(kTol) + ")";
  return worst <= kTol;
}

// 3. Composition, identity and inverse laws.
inline bool group_axioms(std::uint64_t seed, std::string& out) {
  using namespace transform;
  constexpr double kTol = 1e-12;
  Rng rng(seed);
  auto pd = [](const Point& a, const Point& b) {
    return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.t - b.t), std::abs(a.u - b.u)});
  };
  auto jd = [&](const JetPoint1& a, const JetPoint1& b) {
    return std::max({pd(a.point(), b.point()), std::abs(a.u_x - b.u_x), std::abs(a.u_y - b.u_y),
                     std::abs(a.u_t - b.u_t)});
  };
  auto fd = [](const FluxPair& a, const FluxPair& b) { return std::max(std::abs(a.f - b.f), std::abs(a.g - b.g)); };
  double comp = 0.0, ident = 0.0, inv = 0.0;
  for (auto kind : testing::all_kinds()) {
    const GeneratorSpec base = testing::sample_spec(kind, 0.0);
    for (int i = 0; i < 100; ++i) {
      const double e1 = rng.uniform(-0.15, 0.15);
      const double e2 = rng.uniform(-0.15, 0.15);
      const auto s1 = base.with_epsilon(e1), s2 = base.with_epsilon(e2), s12 = base.with_epsilon(e1 + e2);
      const auto sinv = base.with_epsilon(-e1);
      const JetPoint1 j = testing::random_jet(rng);
      const FluxPair fp{rng.uniform(-1, 1), rng.uniform(-1, 1)};

      const JetPoint1 j2 = push_jet1(s2, j);
      comp = std::max({comp, pd(push_point(s1, j2), push_point(s12, j)), jd(push_jet1(s1, j2), push_jet1(s12, j)),
                       fd(push_flux(s1, j2, push_flux(s2, j, fp)), push_flux(s12, j, fp))});

      ident = std::max({ident, pd(push_point(base, j), j.point()), jd(push_jet1(base, j), j),
                        fd(push_flux(base, j, fp), fp)});

      const JetPoint1 j1 = push_jet1(s1, j);
      inv = std::max({inv, pd(push_point(sinv, j1), j.point()), pd(pull_point(s1, j1.point()), j.point()),
                      jd(push_jet1(sinv, j1), j), fd(push_flux(sinv, j1, push_flux(s1, j, fp)), fp)});
    }
  }
  out = "kinds=A,B,C,D x 100: composition=" + detail::num(comp) + " identity=" + detail::num(ident) +
        " inverse=" + detail::num(inv) + " (tol " + detail::num(kTol) + ")";
  return comp <= kTol && ident <= kTol && inv <= kTol;
}

// 4. RK4 flow of the generator against the finite maps.
inline bool flow_oracle(std::uint64_t seed, std::string& out) {
  using namespace transform;
  constexpr double kTol = 1e-9;
  Rng rng(seed);
  double worst = 0.0;
  std::vector<GeneratorSpec> specs;
  for (auto kind : testing::all_kinds()) specs.push_back(testing::sample_spec(kind, 0.0));
  specs.push_back(GeneratorSpec::kind_a(parse("u^2"), parse("0"), 0.0));
  for (const auto& base : specs) {
    for (int i = 0; i < 100; ++i) {
      const auto s = base.with_epsilon(rng.uniform(-0.3, 0.3));
      const Point p = testing::random_jet(rng).point();
      const Point a = flow_oracle(s, p, s.epsilon());
      const Point b = push_point(s, p);
      worst = std::max({worst, std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.t - b.t), std::abs(a.u - b.u)});
    }
  }
  out = "specs=" + std::to_string(specs.size()) + " x 100, |eps|<=0.3, max deviation=" + detail::num(worst) +
        " (tol " + detail::num(kTol) + ")";
  return worst <= kTol;
}

// 5. Order-zero invariants under finite kind-A maps.
inline bool zero_order(std::uint64_t seed, std::string& out) {
  using namespace transform;
  constexpr double kTol = 1e-10;
  const std::pair<const char*, const char*> pairs[] = {{"sin(u)", "cos(u)"}, {"u^2", "0"}, {"u^3 - u", "u^2"},
                                                       {"u", "exp(u)"}};
  Rng rng(seed);
  double worst = 0.0;
  int tested = 0;
  for (auto [m, h] : pairs) {
    const auto base = GeneratorSpec::kind_a(parse(m), parse(h), 0.0);
    for (int k = 0; k < 100;) {
      const auto s = base.with_epsilon(rng.uniform(-0.3, 0.3));
      const JetPoint1 j = testing::random_jet(rng);
      const FluxPair fp{rng.uniform(-1, 1), rng.uniform(-1, 1)};
      // non-degenerate: invariants defined and the map away from its fold
      if (std::abs(j.u_x) < 0.1 || std::abs(j.u_y) < 0.1 || std::abs(jacobian_denominator(s, j)) < 0.1) continue;
      const auto before = invariants::zero_order_invariants(j.u_x, j.u_y, j.u_t, fp.f, fp.g);
      const auto pj = push_jet1(s, j);
      const auto pf = push_flux(s, j, fp);
      const auto after = invariants::zero_order_invariants(pj.u_x, pj.u_y, pj.u_t, pf.f, pf.g);
      auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
      worst = std::max({worst, rel(after.xi1, before.xi1), rel(after.xi2, before.xi2), rel(after.xi3, before.xi3)});
      ++k;
      ++tested;
    }
  }
  out = "jets=" + std::to_string(tested) + " max relative change=" + detail::num(worst) + " (tol " +
        detail::num(kTol) + ")";
  return worst <= kTol;
}

// 6. First-order annihilation and negative controls.
inline bool first_order(std::uint64_t seed, std::string& out) {
  using namespace invariants;
  constexpr double kTol = 1e-8;
  constexpr double kControl = 1e-2;
  constexpr double kGeneric = 0.05;
  Rng rng(seed);
  double worst = 0.0;
  double weakest_control = std::numeric_limits<double>::infinity();
  const auto& xs = first_order_invariant_exprs();
  const Expr controls[] = {parse("u_x"), parse("f"), parse("g_x")};
  for (const char* m : {"u^2", "sin(u)", "u^3 - u"}) {
    const Expr me = parse(m);
    const Expr m1 = expr::partial_diff(me, "u");
    for (int i = 0; i < 100; ++i) {
      const ExtendedPoint p = random_point(rng);
      const TangentVector t = vm_tangent(p, me);
      for (const auto& J : xs) worst = std::max(worst, std::abs(annihilation_test(J, t, p)) / annihilation_scale(J, t, p));
    }
    for (int i = 0; i < 100;) {
      const ExtendedPoint p = random_point(rng);
      if (std::abs(expr::eval(m1, {{"u", p[U]}})) < kGeneric) continue;
      const TangentVector t = vm_tangent(p, me);
      for (const auto& J : controls) {
        const double a = std::abs(annihilation_test(J, t, p));
        weakest_control = std::min(weakest_control, a / term_scale(annihilation_terms(J, t, p)));
      }
      ++i;
    }
  }
  out = "13 invariants x 3 m x 100 points: max |V(J)|/scale=" + detail::num(worst) + " (tol " + detail::num(kTol) +
        "), weakest control=" + detail::num(weakest_control) + " (must exceed " + detail::num(kControl) + ")";
  return worst <= kTol && weakest_control > kControl;
}

// 7. The two order-zero fields commute.
inline bool commutator(std::uint64_t seed, std::string& out) {
  constexpr double kTol = 1e-10;
  Rng rng(seed);
  double worst = 0.0;
  const std::pair<const char*, const char*> pairs[] = {{"u^2", "sin(u)"}, {"u", "u"}};
  for (auto [m, h] : pairs) {
    const Expr me = parse(m), he = parse(h);
    for (int i = 0; i < 100; ++i) worst = std::max(worst, invariants::commutator_check(me, he, invariants::random_point(rng)));
  }
  out = "max |[V_m, V_h]| component=" + detail::num(worst) + " (tol " + detail::num(kTol) + ")";
  return worst <= kTol;
}

// 8. Transported solution of the first-order conservation law.
inline bool first_order_law(std::uint64_t, std::string& out) {
  constexpr double kTol = 1e-8;
  constexpr double kEps = 0.2;
  auto s = GeneratorSpec::kind_c(parse("u*x"), kEps);
  auto pde = pdegen::assemble_from_flux(s, parse("u"), parse("u"));
  auto sol = solution::transport(s, parse("u - (t + x)*(y - x)"));
  auto pts = solution::grid({0, 1, 10}, {0, 1, 10}, {0, 0.5, 5});
  auto rep = solution::verify_residual(sol, pde, pts, solution::RootPolicy::in(-5, 5));
  out = "m=u*x eps=0.2, grid 10x10x5: points=" + std::to_string(rep.n) + " failures=" +
        std::to_string(rep.failures.size()) + " max residual=" + detail::num(rep.max_abs_residual) + " (tol " +
        detail::num(kTol) + ")";
  return rep.failures.empty() && rep.n == 500 && rep.max_abs_residual <= kTol;
}

// 9. Expression engine: print/parse round trip and derivatives vs FD.
inline bool expression_engine(std::uint64_t seed, std::string& out) {
  constexpr double kTol = 1e-5;
  constexpr double kStep = 1e-6;
  Rng rng(seed);
  const std::vector<std::string> vars{"x", "y", "t", "u", "u_x", "u_yy"};
  const auto alphabet = expr::JetContext::standard().alphabet();
  int round_trips = 0;
  for (int i = 0; i < 500; ++i) {
    const Expr e = testing::random_tree(rng, vars, 5);
    if (expr::parse(expr::to_string(e), alphabet) == e) ++round_trips;
  }
  const std::vector<std::string> fvars{"x", "y", "t", "u"};
  double worst = 0.0;
  for (int checked = 0; checked < 200;) {
    const Expr e = testing::random_smooth(rng, fvars, 4);
    const std::string& v = fvars[static_cast<std::size_t>(rng.integer(0, 3))];
    expr::VariableBinding b{{"x", rng.uniform(-1, 1)}, {"y", rng.uniform(-1, 1)}, {"t", rng.uniform(-1, 1)},
                            {"u", rng.uniform(-1, 1)}};
    double sym = 0.0, fd = 0.0;
    try {
      if (std::abs(expr::eval(e, b)) > 1e3) continue;
      sym = expr::eval(expr::partial_diff(e, v), b);
      const double x0 = b.get(v);
      expr::VariableBinding bp = b, bm = b;
      bp.set(v, x0 + kStep);
      bm.set(v, x0 - kStep);
      fd = (expr::eval(e, bp) - expr::eval(e, bm)) / (2 * kStep);
    } catch (const DomainError&) {
      continue;
    }
    if (std::abs(sym) > 1e3) continue;
    worst = std::max(worst, std::abs(sym - fd) / (1.0 + std::abs(fd)));
    ++checked;
  }
  out = "round trips=" + std::to_string(round_trips) + "/500, max |d_sym - d_fd|/(1+|d_fd|)=" + detail::num(worst) +
        " over 200 (tol " + detail::num(kTol) + ")";
  return round_trips == 500 && worst <= kTol;
}

// 10. Sinusoidal heat solution under the power-law map.
inline bool sinusoidal(std::uint64_t seed, std::string& out) {
  constexpr double kTol = 1e-8;
  constexpr double kEps = 0.1;
  auto s = GeneratorSpec::kind_a(parse("u^2"), parse("u^3"), kEps);
  auto sol = solution::transport(s, parse("u - sin(x)*sin(y)*exp(-2*t)"));
  Rng rng(seed);
  // dG/du >= 1 - 5 eps on this box, so the root in the bracket is unique
  auto pts = solution::sample_region(rng, {{0, 0, 0}, {std::numbers::pi, std::numbers::pi, 0.5}}, 100);
  auto rep = solution::verify_residual(sol, pdegen::builtin_heat_family_A(parse("u^2"), parse("u^3"), kEps), pts,
                                       solution::RootPolicy::in(-1.5, 1.5));
  out = "n=2 r=3 mu=eta=1 F=1 eps=0.1: points=" + std::to_string(rep.n) + " failures=" +
        std::to_string(rep.failures.size()) + " max residual=" + detail::num(rep.max_abs_residual) + " (tol " +
        detail::num(kTol) + ")";
  return rep.failures.empty() && rep.n == 100 && rep.max_abs_residual <= kTol;
}

struct Criterion {
  int id;
  const char* name;
  std::function<bool(std::uint64_t, std::string&)> run;
  double time_limit;  // seconds; 0 for none
};

inline const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> c{
      {1, "quadratic map closed form", quadratic_map, 5.0},
      {2, "coefficient cross-check", cross_check, 10.0},
      {3, "group axioms", group_axioms, 0.0},
      {4, "flow oracle", flow_oracle, 0.0},
      {5, "zero-order invariants", zero_order, 0.0},
      {6, "first-order annihilation", first_order, 0.0},
      {7, "commutator", commutator, 0.0},
      {8, "first-order conservation law", first_order_law, 0.0},
      {9, "expression engine", expression_engine, 0.0},
      {10, "sinusoidal solution, power-law map", sinusoidal, 0.0},
  };
  return c;
}

inline constexpr std::uint64_t kDefaultSeed = 20240611;

inline Outcome run(const Criterion& c, std::uint64_t seed) {
  Outcome o;
  o.id = c.id;
  o.name = c.name;
  const auto start = std::chrono::steady_clock::now();
  try {
    o.pass = c.run(seed + static_cast<std::uint64_t>(c.id), o.detail);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail += std::string(" error: ") + e.what();
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (c.time_limit > 0.0) o.pass = detail::time_limit(o.seconds, c.time_limit, o.detail) && o.pass;
  return o;
}

inline std::string format(const Outcome& o) {
  return std::string(o.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(o.id) + " (" + o.name + "): " +
         o.detail;
}

/// Runs every criterion, printing one line each; true when all pass.
inline bool run_all(std::uint64_t seed, const std::function<void(const std::string&)>& emit) {
  bool all = true;
  for (const auto& c : criteria()) {
    const Outcome o = run(c, seed);
    all = all && o.pass;
    emit(format(o));
  }
  return all;
}

}  // namespace equimap::acceptance
