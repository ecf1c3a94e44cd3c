#pragma once

// Batch commands behind the `equimap` executable. JSON on stdout (or --out)
// is the machine interface; human-oriented text goes to stderr.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "equimap/acceptance.hpp"
#include "equimap/error.hpp"
#include "equimap/expr.hpp"
#include "equimap/invariants.hpp"
#include "equimap/pdegen.hpp"
#include "equimap/sampling.hpp"
#include "equimap/serialize.hpp"
#include "equimap/solution.hpp"
#include "equimap/transform.hpp"

namespace equimap::cli {

using serialize::json;

enum ExitCode : int { kOk = 0, kVerificationFailure = 1, kUsage = 2, kNumeric = 3 };

/// Bad flag values or malformed input files.
class UsageError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "usage_error"; }
};

struct SpecFlags {
  std::string file;
  std::string kind;
  std::string m;
  std::optional<std::string> h;
  std::optional<std::string> M;
  double eps = 0.0;
};

struct RunConfig {
  SpecFlags spec;
  std::string f = "u_x";
  std::string g = "u_y";
  std::string phi;
  std::string grid_x = "0:1:5", grid_y = "0:1:5", grid_t = "0:0.5:3";  // transport, "lo:hi:n"
  std::string box_x = "0:1", box_y = "0:1", box_t = "0:0.5";           // verify sampling, "lo:hi"
  std::optional<std::string> bracket;
  std::optional<double> seed_u;
  std::optional<std::string> reference;
  std::string pde_file;
  std::size_t n = 100;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  double min_slope = 0.0;
  std::string out;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw UsageError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline std::vector<double> split_numbers(const std::string& text, std::size_t count, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ':')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) throw UsageError(std::string("bad number in ") + what + ": '" + text + "'");
    out.push_back(v);
  }
  if (out.size() != count) throw UsageError(std::string(what) + " expects " + std::to_string(count) + " ':'-separated values");
  return out;
}

inline solution::Axis parse_axis(const std::string& text, const char* what) {
  auto v = split_numbers(text, 3, what);
  if (v[2] < 1 || v[2] != static_cast<double>(static_cast<std::size_t>(v[2]))) {
    throw UsageError(std::string(what) + ": point count must be a positive integer");
  }
  return {v[0], v[1], static_cast<std::size_t>(v[2])};
}

inline std::pair<double, double> parse_range(const std::string& text, const char* what) {
  auto v = split_numbers(text, 2, what);
  return {v[0], v[1]};
}

inline transform::GeneratorSpec load_spec(const SpecFlags& f) {
  if (!f.file.empty()) return serialize::spec_from_json(read_json(f.file));
  if (f.kind.empty() || f.m.empty()) throw UsageError("give --spec FILE or both --kind and --m");
  std::optional<std::string_view> h, M;
  if (f.h) h = *f.h;
  if (f.M) M = *f.M;
  return transform::GeneratorSpec::parse(transform::parse_kind(f.kind), f.m, h, M, f.eps);
}

struct Generated {
  pdegen::NonlinearPDE pde;
  std::optional<expr::Expr> source;
};

inline Generated generate_pde(const transform::GeneratorSpec& s, const RunConfig& cfg) {
  const auto& al = pdegen::flux_alphabet();
  const expr::Expr f = expr::parse(cfg.f, al);
  const expr::Expr g = expr::parse(cfg.g, al);
  if (s.kind() == transform::SubgroupKind::D) {
    auto sh = pdegen::shift_inhomogeneity(s, f, g);
    return {sh.pde, sh.source};
  }
  return {pdegen::assemble_from_flux(s, f, g), std::nullopt};
}

inline solution::RootPolicy root_policy(const RunConfig& cfg) {
  if (cfg.bracket && cfg.seed_u) throw UsageError("--bracket and --seed-u are exclusive");
  if (cfg.bracket) {
    auto [lo, hi] = parse_range(*cfg.bracket, "--bracket");
    return solution::RootPolicy::in(lo, hi);
  }
  return solution::RootPolicy::from(cfg.seed_u.value_or(0.0));
}

inline void emit(const json& doc, const RunConfig& cfg, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) throw UsageError("cannot write '" + cfg.out + "'");
  f << text;
}

}  // namespace detail

inline constexpr std::size_t kCrossCheckPoints = 1000;

inline int cmd_generate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto s = detail::load_spec(cfg.spec);
  const auto gen = detail::generate_pde(s, cfg);
  json doc;
  doc["spec"] = serialize::to_json(s);
  doc["flux"] = {{"f", cfg.f}, {"g", cfg.g}};
  doc["pde"] = serialize::to_json(gen.pde);
  if (gen.source) doc["source"] = expr::to_string(*gen.source);

  const bool heat = expr::parse(cfg.f) == expr::var("u_x") && expr::parse(cfg.g) == expr::var("u_y");
  using transform::SubgroupKind;
  if (heat && (s.kind() == SubgroupKind::A || s.kind() == SubgroupKind::B)) {
    const auto builtin = s.kind() == SubgroupKind::A ? pdegen::builtin_heat_family_A(s.m(), s.h(), s.epsilon())
                                                     : pdegen::builtin_heat_family_B(s.m(), s.epsilon());
    const pdegen::PDEEvaluator a(gen.pde), b(builtin);
    Rng rng(cfg.seed);
    double worst = 0.0;
    for (std::size_t done = 0; done < kCrossCheckPoints;) {
      const auto j = pdegen::random_jet2(rng);
      if (std::abs(pdegen::inverse_jet_factor(s, j)) < 0.1) continue;
      try {
        worst = std::max(worst, pdegen::proportional_mismatch(a, b, j));
      } catch (const DomainError&) {
        continue;
      }
      ++done;
    }
    doc["cross_check"] = {{"reference", s.kind() == SubgroupKind::A ? "family_A" : "family_B"},
                          {"points", kCrossCheckPoints},
                          {"max_mismatch", worst}};
    err << "cross-check against the closed form: max proportional mismatch " << worst << "\n";
  }
  err << serialize::pretty(gen.pde, gen.source);
  detail::emit(doc, cfg, out);
  return kOk;
}

inline int cmd_transport(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const auto s = detail::load_spec(cfg.spec);
  const expr::Expr phi = expr::parse(cfg.phi, {"x", "y", "t", "u"});
  const auto sol = solution::transport(s, phi);
  const auto policy = detail::root_policy(cfg);
  const auto pts = solution::grid(detail::parse_axis(cfg.grid_x, "--x"), detail::parse_axis(cfg.grid_y, "--y"),
                                  detail::parse_axis(cfg.grid_t, "--t"));
  std::optional<expr::Program> ref;
  if (cfg.reference) ref.emplace(expr::parse(*cfg.reference, {"x", "y", "t"}), std::vector<std::string>{"x", "y", "t"});

  json values = json::array();
  std::size_t failures = 0;
  double ref_err = 0.0;
  for (const auto& p : pts) {
    json row{{"x", p.x}, {"y", p.y}, {"t", p.t}};
    try {
      const double u = sol.eval_u(p.x, p.y, p.t, policy);
      row["u"] = u;
      if (ref) ref_err = std::max(ref_err, std::abs(u - (*ref)(std::array<double, 3>{p.x, p.y, p.t})));
    } catch (const NumericError& e) {
      row["error"] = std::string(e.kind()) + ": " + e.what();
      ++failures;
    }
    values.push_back(row);
  }
  const auto gen = detail::generate_pde(s, cfg);
  json doc;
  doc["spec"] = serialize::to_json(s);
  doc["phi"] = cfg.phi;
  doc["relation"] = expr::to_string(sol.relation());
  doc["values"] = values;
  doc["failures"] = failures;
  if (ref) doc["reference"] = {{"expr", *cfg.reference}, {"max_abs_error", ref_err}};
  doc["residual"] = serialize::to_json(solution::verify_residual(sol, gen.pde, pts, policy, gen.source));
  detail::emit(doc, cfg, out);
  return kOk;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto s = detail::load_spec(cfg.spec);
  const auto sol = solution::transport(s, expr::parse(cfg.phi, {"x", "y", "t", "u"}));
  const auto policy = detail::root_policy(cfg);

  detail::Generated pde;
  std::string origin = "generated";
  if (!cfg.pde_file.empty()) {
    json j = detail::read_json(cfg.pde_file);
    // accept a bare equation or a whole `generate` document
    const json& eq = j.contains("pde") ? j.at("pde") : j;
    pde.pde = serialize::pde_from_json(eq);
    if (j.contains("source")) pde.source = expr::parse(j.at("source").get<std::string>(), {"xb", "yb", "tb"});
    origin = cfg.pde_file;
  } else {
    pde = detail::generate_pde(s, cfg);
  }

  const auto [x0, x1] = detail::parse_range(cfg.box_x, "--x");
  const auto [y0, y1] = detail::parse_range(cfg.box_y, "--y");
  const auto [t0, t1] = detail::parse_range(cfg.box_t, "--t");
  Rng rng(cfg.seed);
  std::function<bool(const solution::SamplePoint&)> admissible;
  if (cfg.min_slope > 0.0) {
    admissible = [&](const solution::SamplePoint& p) {
      try {
        const double u = sol.eval_u(p.x, p.y, p.t, policy);
        return std::abs(sol.G_u(p.x, p.y, p.t, u)) >= cfg.min_slope;
      } catch (const NumericError&) {
        return false;
      }
    };
  }
  const auto pts = solution::sample_region(rng, {{x0, y0, t0}, {x1, y1, t1}}, cfg.n, admissible);
  const auto rep = solution::verify_residual(sol, pde.pde, pts, policy, pde.source);
  const bool pass = rep.n > 0 && rep.failures.empty() && rep.max_abs_residual <= cfg.tol;

  json doc;
  doc["spec"] = serialize::to_json(s);
  doc["phi"] = cfg.phi;
  doc["pde_origin"] = origin;
  doc["seed"] = cfg.seed;
  doc["tolerance"] = cfg.tol;
  doc["report"] = serialize::to_json(rep);
  doc["pass"] = pass;
  detail::emit(doc, cfg, out);
  if (rep.n == 0) {
    err << "no point could be evaluated\n";
    return kNumeric;
  }
  return pass ? kOk : kVerificationFailure;
}

inline int cmd_invariants(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const expr::Expr m = expr::parse(cfg.spec.m.empty() ? "u^2" : cfg.spec.m, {"u"});
  const auto& xs = invariants::first_order_invariant_exprs();
  std::vector<double> worst(xs.size(), 0.0);
  Rng rng(cfg.seed);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const auto p = invariants::random_point(rng);
    const auto tv = invariants::vm_tangent(p, m);
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double a = std::abs(invariants::annihilation_test(xs[k], tv, p));
      worst[k] = std::max(worst[k], a / invariants::annihilation_scale(xs[k], tv, p));
    }
  }
  json rows = json::array();
  bool pass = true;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const bool ok = worst[k] <= cfg.tol;
    pass = pass && ok;
    rows.push_back({{"index", k + 1}, {"invariant", expr::to_string(xs[k])}, {"max_scaled", worst[k]}, {"pass", ok}});
  }
  json doc;
  doc["m"] = expr::to_string(m);
  doc["points"] = cfg.n;
  doc["seed"] = cfg.seed;
  doc["tolerance"] = cfg.tol;
  doc["invariants"] = rows;
  doc["pass"] = pass;
  detail::emit(doc, cfg, out);
  return pass ? kOk : kVerificationFailure;
}

inline int cmd_selftest(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const bool ok = acceptance::run_all(cfg.seed, [&](const std::string& line) { out << line << "\n" << std::flush; });
  out << (ok ? "selftest passed\n" : "selftest FAILED\n");
  return ok ? kOk : kVerificationFailure;
}

namespace detail {

inline void error_line(std::ostream& err, const char* kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

inline void add_spec_flags(CLI::App* c, SpecFlags& s) {
  c->add_option("--spec", s.file, "generator spec JSON file");
  c->add_option("--kind", s.kind, "subgroup kind A, B, C or D");
  c->add_option("--m", s.m, "free function m");
  c->add_option("--h", s.h, "free function h (kind A)");
  c->add_option("--M", s.M, "antiderivative M with M_x = m_t (kind D)");
  c->add_option("--eps", s.eps, "group parameter");
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"equivalence-transformation toolkit for the heat equation"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");  // frees -h; --h names the second free function
  RunConfig cfg;
  std::uint64_t seed = 1;

  auto* gen = app.add_subcommand("generate", "transformed equation for a generator and fluxes");
  detail::add_spec_flags(gen, cfg.spec);
  gen->add_option("--f", cfg.f, "flux f over x, y, t, u, u_x, u_y");
  gen->add_option("--g", cfg.g, "flux g");
  gen->add_option("--seed", seed, "seed for the cross-check points");
  gen->add_option("--out", cfg.out, "write JSON here instead of stdout");

  auto* tr = app.add_subcommand("transport", "evaluate a transported solution on a grid");
  detail::add_spec_flags(tr, cfg.spec);
  tr->add_option("--phi", cfg.phi, "relation phi(x, y, t, u) = 0 solving the linear equation")->required();
  tr->add_option("--f", cfg.f);
  tr->add_option("--g", cfg.g);
  tr->add_option("--x", cfg.grid_x, "grid lo:hi:n");
  tr->add_option("--y", cfg.grid_y, "grid lo:hi:n");
  tr->add_option("--t", cfg.grid_t, "grid lo:hi:n");
  tr->add_option("--bracket", cfg.bracket, "root bracket lo:hi");
  tr->add_option("--seed-u", cfg.seed_u, "Newton seed for the root");
  tr->add_option("--reference", cfg.reference, "closed form of the solution over x, y, t");
  tr->add_option("--out", cfg.out);

  auto* ve = app.add_subcommand("verify", "residual of an equation along a transported solution");
  detail::add_spec_flags(ve, cfg.spec);
  ve->add_option("--phi", cfg.phi)->required();
  ve->add_option("--pde", cfg.pde_file, "equation JSON; generated from the spec when absent");
  ve->add_option("--f", cfg.f);
  ve->add_option("--g", cfg.g);
  ve->add_option("--x", cfg.box_x, "sampling box lo:hi");
  ve->add_option("--y", cfg.box_y, "sampling box lo:hi");
  ve->add_option("--t", cfg.box_t, "sampling box lo:hi");
  ve->add_option("--bracket", cfg.bracket);
  ve->add_option("--seed-u", cfg.seed_u);
  ve->add_option("--min-slope", cfg.min_slope, "reject points where |dG/du| at the root is below this");
  ve->add_option("--n", cfg.n, "number of sample points");
  ve->add_option("--seed", seed);
  ve->add_option("--tol", cfg.tol);
  ve->add_option("--out", cfg.out);

  auto* inv = app.add_subcommand("invariants", "annihilation report for the first-order invariants");
  inv->add_option("--m", cfg.spec.m, "free function m(u)");
  inv->add_option("--n", cfg.n);
  inv->add_option("--seed", seed);
  inv->add_option("--tol", cfg.tol);
  inv->add_option("--out", cfg.out);

  auto* st = app.add_subcommand("selftest", "run every acceptance check");
  std::uint64_t selftest_seed = acceptance::kDefaultSeed;
  st->add_option("--seed", selftest_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (st->parsed()) seed = selftest_seed;
  try {
    if (const char* env = std::getenv("EQUIMAP_SEED")) {
      try {
        std::size_t used = 0;
        seed = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument("trailing text");
      } catch (const std::exception&) {
        throw UsageError(std::string("EQUIMAP_SEED is not an unsigned integer: '") + env + "'");
      }
    }
    cfg.seed = seed;
    if (gen->parsed()) return cmd_generate(cfg, out, err);
    if (tr->parsed()) return cmd_transport(cfg, out, err);
    if (ve->parsed()) return cmd_verify(cfg, out, err);
    if (inv->parsed()) return cmd_invariants(cfg, out, err);
    return cmd_selftest(cfg, out, err);
  } catch (const NumericError& e) {
    detail::error_line(err, e.kind(), e.what());
    return kNumeric;
  } catch (const Error& e) {
    detail::error_line(err, e.kind(), e.what());
    return kUsage;
  }
}

}  // namespace equimap::cli
