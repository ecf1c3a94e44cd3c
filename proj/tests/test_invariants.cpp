#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "equimap/invariants.hpp"
#include "equimap/transform.hpp"

using namespace equimap;
using namespace equimap::invariants;
using equimap::expr::parse;
using Catch::Approx;

TEST_CASE("zero-order invariants", "[invariants]") {
  ZeroOrder z = zero_order_invariants(2, 3, 5, 2, 3);
  CHECK(z.xi1 == 1.5);
  CHECK(z.xi2 == 2.5);
  CHECK(z.xi3 == Approx(2 / 1.5 + 3));
  CHECK(zero_order_invariants(7, 7, 1, 1, 1).xi1 == 1.0);
  CHECK_THROWS_AS(zero_order_invariants(0, 1, 1, 1, 1), DegenerateDenominator);
  CHECK_THROWS_AS(zero_order_invariants(1, 0, 1, 1, 1), DegenerateDenominator);

  auto s = transform::GeneratorSpec::kind_a(parse("u"), parse("0"), 0.1);
  transform::JetPoint1 j{0, 0, 0, 0.3, 2, 3, 5};
  auto pj = transform::push_jet1(s, j);
  auto pf = transform::push_flux(s, j, {2, 3});
  ZeroOrder after = zero_order_invariants(pj.u_x, pj.u_y, pj.u_t, pf.f, pf.g);
  CHECK(after.xi1 == Approx(z.xi1).epsilon(1e-12));
  CHECK(after.xi2 == Approx(z.xi2).epsilon(1e-12));
  CHECK(after.xi3 == Approx(z.xi3).epsilon(1e-12));
}

TEST_CASE("first-order invariants at the all-ones point", "[invariants]") {
  auto v = first_order_invariants(ExtendedPoint::filled(1.0));
  const double expected[] = {1, 1, 1, 2, 2, 1, 0, 1, 0, 1, -1, 1, 0};
  REQUIRE(v.size() == 13);
  for (int i = 0; i < 13; ++i) CHECK(v[i] == Approx(expected[i]).margin(1e-15));

  // homogeneity in the flux gradients
  Rng rng(1);
  ExtendedPoint p = random_point(rng);
  ExtendedPoint q = p;
  const double lambda = 3.5;
  for (Coord c : {F_X, F_Y, F_T, G_X, G_Y, G_T}) q[c] *= lambda;
  auto a = first_order_invariants(p);
  auto b = first_order_invariants(q);
  CHECK(b[4] == Approx(lambda * a[4]));
  CHECK(b[6] == Approx(lambda * a[6]));
  CHECK(b[8] == Approx(lambda * a[8]));
  CHECK(b[5] == Approx(a[5]));
  CHECK(b[7] == Approx(a[7]));

  ExtendedPoint bad = p;
  bad[G_X] = 0;
  CHECK_THROWS_AS(first_order_invariants(bad), DegenerateDenominator);
}

TEST_CASE("prolonged field components", "[invariants]") {
  TangentVector c = vm_tangent(ExtendedPoint::filled(1.0), parse("3"));
  CHECK(c[X] == 3.0);
  for (std::size_t i = 1; i < kCoords; ++i) CHECK(c[i] == 0.0);

  TangentVector v = vm_tangent(ExtendedPoint::filled(1.0), parse("u"));
  CHECK(v[X] == 1);
  CHECK(v[U_X] == 1);
  CHECK(v[U_Y] == 1);
  CHECK(v[U_T] == 1);
  CHECK(v[F] == -1);
  CHECK(v[G] == 1);
  CHECK(v[F_X] == -1);
  CHECK(v[G_X] == 1);
  CHECK(v[F_UX] == -4);
  CHECK(v[F_UY] == -3);
  CHECK(v[G_UX] == -1);
  CHECK(v[G_UY] == 0);
  CHECK(v[F_U] == -2);
  CHECK(v[G_U] == 0);
  CHECK(v[Y] == 0);
  CHECK(v[U] == 0);

  TangentVector h = vh_tangent(ExtendedPoint::filled(1.0), parse("2"));
  CHECK(h[Y] == 2.0);
  CHECK(h[U_X] == 0.0);
}

TEST_CASE("order-zero invariants annihilate under both fields", "[invariants]") {
  Rng rng(2);
  const Expr xi1 = parse("u_y/u_x"), xi2 = parse("u_t/u_x"), xi3 = parse("f*u_x/u_y + g");
  for (int i = 0; i < 100; ++i) {
    ExtendedPoint p = random_point(rng);
    for (const Expr& J : {xi1, xi2, xi3}) {
      for (const TangentVector& t : {vm_tangent(p, parse("u^2")), vh_tangent(p, parse("sin(u)"))}) {
        CHECK(std::abs(annihilation_test(J, t, p)) <= 1e-12 * term_scale(annihilation_terms(J, t, p)));
      }
    }
  }
}

TEST_CASE("first-order invariants annihilate under the prolonged field", "[invariants]") {
  Rng rng(3);
  const auto& xs = first_order_invariant_exprs();
  for (const char* m : {"u^2", "sin(u)", "u^3 - u"}) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      ExtendedPoint p = random_point(rng);
      TangentVector t = vm_tangent(p, parse(m));
      for (const auto& J : xs) {
        double a = std::abs(annihilation_test(J, t, p));
        worst = std::max({worst, a / annihilation_scale(J, t, p), a / term_scale(annihilation_terms(J, t, p))});
      }
    }
    INFO("m = " << m);
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("non-invariants are detected", "[invariants]") {
  CHECK(annihilation_test(parse("u_x"), vm_tangent(ExtendedPoint::filled(1.0), parse("u")),
                          ExtendedPoint::filled(1.0)) == 1.0);
  Rng rng(4);
  for (const char* m : {"u^2", "sin(u)", "u^3 - u"}) {
    const Expr me = parse(m);
    const Expr m1 = expr::partial_diff(me, "u");
    int tested = 0;
    while (tested < 100) {
      ExtendedPoint p = random_point(rng);
      if (std::abs(expr::eval(m1, {{"u", p[U]}})) < 0.05) continue;
      TangentVector t = vm_tangent(p, me);
      for (const char* J : {"u_x", "f", "g_x"}) {
        const Expr je = parse(J);
        CHECK(std::abs(annihilation_test(je, t, p)) > 1e-2 * term_scale(annihilation_terms(je, t, p)));
      }
      ++tested;
    }
  }
}

TEST_CASE("the two order-zero fields commute", "[invariants]") {
  CHECK(commutator_check(parse("2"), parse("5"), ExtendedPoint::filled(1.0)) == 0.0);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    ExtendedPoint p = random_point(rng);
    CHECK(commutator_check(parse("u^2"), parse("sin(u)"), p) <= 1e-10);
    CHECK(commutator_check(parse("u"), parse("u"), p) <= 1e-12);
  }
  // power nonlinearities as in the power-law family
  CHECK(commutator_check(parse("u^2"), parse("u^3"), ExtendedPoint::filled(1.3)) <= 1e-10);
}
