#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "equimap/testing/sample_specs.hpp"
#include "equimap/transform.hpp"

using namespace equimap;
using namespace equimap::transform;
using equimap::expr::parse;
using Catch::Approx;

namespace {

double max_diff(const Point& a, const Point& b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.t - b.t), std::abs(a.u - b.u)});
}

double max_diff(const JetPoint1& a, const JetPoint1& b) {
  return std::max({max_diff(a.point(), b.point()), std::abs(a.u_x - b.u_x), std::abs(a.u_y - b.u_y),
                   std::abs(a.u_t - b.u_t)});
}

JetPoint1 jet_at(const Point& p, double u_x, double u_y, double u_t) { return {p.x, p.y, p.t, p.u, u_x, u_y, u_t}; }

}  // namespace

TEST_CASE("point maps of the worked examples", "[transform]") {
  auto quad = GeneratorSpec::kind_a(parse("u^2"), parse("0"), 0.5);
  Point q = push_point(quad, Point{0.5, 0, 0, 0.5});
  CHECK(q.x == Approx(0.375).margin(1e-15));
  CHECK(q.y == 0.0);
  CHECK(q.u == 0.5);
  Point back = pull_point(quad, Point{0.375, 0, 0, 0.5});
  CHECK(back.x == Approx(0.5).margin(1e-15));

  auto trig = GeneratorSpec::kind_a(parse("sin(u)"), parse("cos(u)"), 1.0);
  Point r = push_point(trig, Point{0, 0, 0, 0});
  CHECK(r.x == Approx(0.0).margin(1e-15));
  CHECK(r.y == Approx(-1.0).margin(1e-15));

  for (auto kind : testing::all_kinds()) {
    auto s = testing::sample_spec(kind, 0.0);
    Point p{0.3, -0.2, 0.7, 0.1};
    CHECK(max_diff(push_point(s, p), p) == 0.0);
    JetPoint1 j = jet_at(p, 0.4, 0.5, 0.6);
    CHECK(max_diff(push_jet1(s, j), j) == 0.0);
  }
}

TEST_CASE("jet and flux maps", "[transform]") {
  auto lin = GeneratorSpec::kind_a(parse("u"), parse("0"), 0.1);
  JetPoint1 j{0, 0, 0, 7.0, 2, 3, 5};
  CHECK(jacobian_denominator(lin, j) == Approx(0.8));
  JetPoint1 out = push_jet1(lin, j);
  CHECK(out.u_x == Approx(2.5));
  CHECK(out.u_y == Approx(3.75));
  CHECK(out.u_t == Approx(6.25));
  FluxPair fp = push_flux(lin, j, {2, 3});
  CHECK(fp.f == Approx(0.875));
  CHECK(fp.g == Approx(3.75));

  FluxPair same = push_flux(lin.with_epsilon(0.0), j, {2, 3});
  CHECK(same.f == 2.0);
  CHECK(same.g == 3.0);

  auto shift = GeneratorSpec::kind_d(parse("x + y"), parse("0"), 2.0);
  JetPoint1 s = push_jet1(shift, JetPoint1{0.5, 0.25, 0, 0, 0, 0, 0});
  CHECK(s.u_x == 2.0);
  CHECK(s.u_y == 2.0);
  CHECK(s.u_t == 0.0);
  CHECK(s.u == Approx(1.5));
  FluxPair sf = push_flux(shift, JetPoint1{}, {1.25, -2});
  CHECK(sf.f == 1.25);
  CHECK(sf.g == -2.0);
}

TEST_CASE("fold set raises DegenerateJacobian", "[transform]") {
  auto lin = GeneratorSpec::kind_a(parse("u"), parse("0"), 0.5);
  JetPoint1 j{0, 0, 0, 0, 2, 0, 1};
  CHECK_THROWS_AS(push_jet1(lin, j), DegenerateJacobian);
  CHECK_THROWS_AS(push_flux(lin, j, {1, 1}), DegenerateJacobian);
  try {
    push_jet1(lin, j);
  } catch (const NumericError& e) {
    CHECK(std::string(e.kind()) == "degenerate_jacobian");
  }
}

TEST_CASE("construction validates arguments and antiderivative", "[transform]") {
  CHECK_THROWS_AS(GeneratorSpec::kind_a(parse("x*u"), parse("0"), 0.1), ConstructionError);
  CHECK_THROWS_AS(GeneratorSpec::kind_b(parse("u*x"), 0.1), ConstructionError);
  CHECK_THROWS_AS(GeneratorSpec::kind_c(parse("u*y"), 0.1), ConstructionError);
  CHECK_THROWS_AS(GeneratorSpec::kind_d(parse("u"), parse("0"), 0.1), ConstructionError);
  // m = x*t needs M_x = x
  CHECK_THROWS_AS(GeneratorSpec::kind_d(parse("x*t"), parse("x*t"), 0.1), ConstructionError);
  CHECK_NOTHROW(GeneratorSpec::kind_d(parse("x*t"), parse("x^2/2"), 0.1));
  CHECK_NOTHROW(GeneratorSpec::kind_d(parse("x*t"), parse("x^2/2 + y*t"), 0.1));
  CHECK_THROWS_AS(GeneratorSpec::make(SubgroupKind::D, parse("x"), std::nullopt, std::nullopt, 0.1),
                  ConstructionError);
  CHECK_THROWS_AS(GeneratorSpec::make(SubgroupKind::B, parse("u"), parse("u"), std::nullopt, 0.1),
                  ConstructionError);
  CHECK_THROWS_AS(parse_kind("E"), ConstructionError);
  CHECK(parse_kind("c") == SubgroupKind::C);
}

TEST_CASE("generators satisfy the admissibility structure", "[transform]") {
  for (auto kind : testing::all_kinds()) {
    CHECK(generator_structure_defect(testing::sample_spec(kind, 0.2)) < 1e-12);
  }
}

TEST_CASE("group laws hold for every kind", "[transform][group]") {
  Rng rng(2024);
  for (auto kind : testing::all_kinds()) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      double e1 = rng.uniform(-0.15, 0.15);
      double e2 = rng.uniform(-0.15, 0.15);
      auto base = testing::sample_spec(kind, 0.0);
      auto s1 = base.with_epsilon(e1);
      auto s2 = base.with_epsilon(e2);
      auto s12 = base.with_epsilon(e1 + e2);
      JetPoint1 j = testing::random_jet(rng);
      FluxPair fp{rng.uniform(-1, 1), rng.uniform(-1, 1)};

      JetPoint1 two = push_jet1(s1, push_jet1(s2, j));
      worst = std::max(worst, max_diff(two, push_jet1(s12, j)));
      FluxPair f2 = push_flux(s1, push_jet1(s2, j), push_flux(s2, j, fp));
      FluxPair f12 = push_flux(s12, j, fp);
      worst = std::max({worst, std::abs(f2.f - f12.f), std::abs(f2.g - f12.g)});

      auto inv = base.with_epsilon(-e1);
      worst = std::max(worst, max_diff(push_jet1(inv, push_jet1(s1, j)), j));
      FluxPair fi = push_flux(inv, push_jet1(s1, j), push_flux(s1, j, fp));
      worst = std::max({worst, std::abs(fi.f - fp.f), std::abs(fi.g - fp.g)});
      worst = std::max(worst, max_diff(pull_point(s1, push_point(s1, j.point())), j.point()));
    }
    INFO("kind " << kind_letter(kind));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("flow oracle matches the finite maps", "[transform][flow]") {
  Rng rng(77);
  for (auto kind : testing::all_kinds()) {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      auto s = testing::sample_spec(kind, rng.uniform(-0.3, 0.3));
      Point p = testing::random_jet(rng).point();
      worst = std::max(worst, max_diff(flow_oracle(s, p, s.epsilon()), push_point(s, p)));
    }
    INFO("kind " << kind_letter(kind));
    CHECK(worst <= 1e-9);
  }
  auto s = testing::sample_spec(SubgroupKind::A, 0.2);
  Point p{0.1, 0.2, 0.3, 0.4};
  CHECK(max_diff(flow_oracle(s, p, 0.0), p) == 0.0);
}

TEST_CASE("zero-order invariants of the jet map", "[transform][invariants]") {
  // ratios u_y/u_x, u_t/u_x and f*u_x/u_y + g survive kind A
  Rng rng(5);
  auto base = testing::sample_spec(SubgroupKind::A, 0.0);
  int tested = 0;
  for (int i = 0; i < 200 && tested < 100; ++i) {
    JetPoint1 j = testing::random_jet(rng);
    if (std::abs(j.u_x) < 0.1 || std::abs(j.u_y) < 0.1) continue;
    auto s = base.with_epsilon(rng.uniform(-0.3, 0.3));
    FluxPair fp{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    JetPoint1 o = push_jet1(s, j);
    FluxPair of = push_flux(s, j, fp);
    CHECK(o.u_y / o.u_x == Approx(j.u_y / j.u_x).epsilon(1e-10));
    CHECK(o.u_t / o.u_x == Approx(j.u_t / j.u_x).epsilon(1e-10));
    double before = fp.f * j.u_x / j.u_y + fp.g;
    double after = of.f * o.u_x / o.u_y + of.g;
    CHECK(after == Approx(before).epsilon(1e-10).margin(1e-10));
    ++tested;
  }
  CHECK(tested == 100);
}
