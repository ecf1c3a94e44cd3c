#include <catch2/catch_amalgamated.hpp>

#include "equimap/serialize.hpp"
#include "equimap/testing/sample_specs.hpp"

using namespace equimap;
using namespace equimap::serialize;
using equimap::expr::parse;
using Catch::Approx;

TEST_CASE("generator specs round-trip through JSON", "[serialize]") {
  for (auto kind : testing::all_kinds()) {
    auto s = testing::sample_spec(kind, 0.25);
    json j = to_json(s);
    CHECK(j["kind"] == std::string(1, transform::kind_letter(kind)));
    CHECK(j.contains("h") == (kind == transform::SubgroupKind::A));
    CHECK(j.contains("M") == (kind == transform::SubgroupKind::D));
    auto back = spec_from_json(json::parse(j.dump()));
    CHECK(back.kind() == s.kind());
    CHECK(back.epsilon() == 0.25);
    CHECK(back.m() == s.m());
    CHECK(back.h() == s.h());
  }
  json a = to_json(transform::GeneratorSpec::kind_a(parse("u^2"), parse("0"), 0.5));
  CHECK(a.dump() == R"({"kind":"A","m":"u^2","h":"0","epsilon":0.5})");
}

TEST_CASE("malformed spec documents are rejected", "[serialize]") {
  CHECK_THROWS_AS(spec_from_json(json::parse(R"({"kind":"A","m":"u"})")), ConstructionError);
  CHECK_THROWS_AS(spec_from_json(json::parse(R"({"kind":"Q","m":"u","epsilon":1})")), ConstructionError);
  CHECK_THROWS_AS(spec_from_json(json::parse(R"({"kind":"A","m":3,"epsilon":1})")), ConstructionError);
  CHECK_THROWS_AS(spec_from_json(json::parse(R"({"kind":"A","m":"u*x","epsilon":1})")), ParseError);
  CHECK_THROWS_AS(spec_from_json(json::parse(R"({"kind":"D","m":"x*t","epsilon":1})")), ConstructionError);
  CHECK_THROWS_AS(spec_from_json(json::parse(R"({"kind":"A","m":"u^","epsilon":1})")), ParseError);
  CHECK_THROWS_AS(spec_from_json(json::parse("[1,2]")), ConstructionError);
  // h is optional for kind A
  CHECK(spec_from_json(json::parse(R"({"kind":"A","m":"u","epsilon":1})")).h().is_constant(0.0));
}

TEST_CASE("equations round-trip and pretty-print", "[serialize]") {
  auto p = pdegen::builtin_heat_family_A(parse("sin(u)"), parse("cos(u)"), 1.0);
  auto back = pde_from_json(json::parse(to_json(p).dump()));
  pdegen::PDEEvaluator a(p), b(back);
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    auto j = pdegen::random_jet2(rng);
    CHECK(b.residual(j) == a.residual(j));
  }
  std::string text = pretty(p);
  CHECK(text.find("not for parsing") != std::string::npos);
  CHECK(text.find("E = ") != std::string::npos);
  CHECK_THROWS_AS(pde_from_json(json::parse(R"({"A":"1","B":"0","C":"1","D":"u_xx","E":"1"})")), ParseError);
}

TEST_CASE("residual reports", "[serialize]") {
  solution::ResidualReport r;
  r.n = 2;
  r.max_abs_residual = 1e-9;
  r.mean_abs_residual = 5e-10;
  r.failures.push_back({{0.6, 0, 0}, "no_bracket: no sign change"});
  json j = to_json(r);
  CHECK(j.dump() ==
        R"({"n":2,"max_abs_residual":1e-09,"mean_abs_residual":5e-10,"failures":[{"x":0.6,"y":0.0,"t":0.0,"reason":"no_bracket: no sign change"}]})");
}
