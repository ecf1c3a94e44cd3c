#pragma once

// JSON documents for generator specs, equations and residual reports.
// Expressions travel as grammar strings.

#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "equimap/error.hpp"
#include "equimap/expr.hpp"
#include "equimap/pdegen.hpp"
#include "equimap/solution.hpp"
#include "equimap/transform.hpp"

namespace equimap::serialize {

using json = nlohmann::ordered_json;

inline json to_json(const transform::GeneratorSpec& s) {
  json j;
  j["kind"] = std::string(1, transform::kind_letter(s.kind()));
  j["m"] = expr::to_string(s.m());
  if (s.kind() == transform::SubgroupKind::A) j["h"] = expr::to_string(s.h());
  if (s.antiderivative()) j["M"] = expr::to_string(*s.antiderivative());
  j["epsilon"] = s.epsilon();
  return j;
}

namespace detail {

inline std::string require_string(const json& j, const char* key) {
  if (!j.contains(key)) throw ConstructionError(std::string("missing field '") + key + "'");
  if (!j.at(key).is_string()) throw ConstructionError(std::string("field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

inline std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return require_string(j, key);
}

}  // namespace detail

inline transform::GeneratorSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ConstructionError("generator spec must be a JSON object");
  const auto kind = transform::parse_kind(detail::require_string(j, "kind"));
  if (!j.contains("epsilon") || !j.at("epsilon").is_number()) {
    throw ConstructionError("field 'epsilon' must be a number");
  }
  const std::string m = detail::require_string(j, "m");
  const auto h = detail::optional_string(j, "h");
  const auto M = detail::optional_string(j, "M");
  std::optional<std::string_view> hv, Mv;
  if (h) hv = *h;
  if (M) Mv = *M;
  return transform::GeneratorSpec::parse(kind, m, hv, Mv, j.at("epsilon").get<double>());
}

inline json to_json(const pdegen::NonlinearPDE& p) {
  json j;
  j["A"] = expr::to_string(p.A);
  j["B"] = expr::to_string(p.B);
  j["C"] = expr::to_string(p.C);
  j["D"] = expr::to_string(p.D);
  j["E"] = expr::to_string(p.E);
  return j;
}

inline pdegen::NonlinearPDE pde_from_json(const json& j) {
  if (!j.is_object()) throw ConstructionError("equation must be a JSON object");
  const auto& al = pdegen::coefficient_alphabet();
  auto get = [&](const char* k) { return expr::parse(detail::require_string(j, k), al); };
  return {get("A"), get("B"), get("C"), get("D"), get("E")};
}

inline json to_json(const solution::ResidualReport& r) {
  json j;
  j["n"] = r.n;
  j["max_abs_residual"] = r.max_abs_residual;
  j["mean_abs_residual"] = r.mean_abs_residual;
  json failures = json::array();
  for (const auto& f : r.failures) {
    failures.push_back({{"x", f.at.x}, {"y", f.at.y}, {"t", f.at.t}, {"reason", f.reason}});
  }
  j["failures"] = failures;
  return j;
}

/// Human-readable layout of the equation. Not for parsing.
inline std::string pretty(const pdegen::NonlinearPDE& p, const std::optional<expr::Expr>& source = std::nullopt) {
  std::ostringstream os;
  os << "# human-readable form, not for parsing; use the JSON document\n"
     << "  A ub_xx + B ub_xy + C ub_yy + D" << (source ? " + S" : "") << " = E ub_t\n"
     << "  A = " << expr::to_string(p.A) << "\n"
     << "  B = " << expr::to_string(p.B) << "\n"
     << "  C = " << expr::to_string(p.C) << "\n"
     << "  D = " << expr::to_string(p.D) << "\n"
     << "  E = " << expr::to_string(p.E) << "\n";
  if (source) os << "  S = " << expr::to_string(*source) << "\n";
  return os.str();
}

}  // namespace equimap::serialize
