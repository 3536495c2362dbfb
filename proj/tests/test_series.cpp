#include <doctest.h>

#include <cmath>

#include "pirogov/common.hpp"
#include "pirogov/series.hpp"

using namespace pirogov;
using namespace pirogov::series;

namespace {

using RS = TruncatedSeries<Rational>;
using DS = TruncatedSeries<double>;

RS make(std::initializer_list<Rational> coeffs) {
  RS s(static_cast<int>(coeffs.size()) - 1);
  int k = 0;
  for (const auto& x : coeffs) s.c[static_cast<size_t>(k++)] = x;
  return s;
}

RS random_poly_with_unit_constant(Rng& rng, int order) {
  RS s(order);
  s.c[0] = 1;
  for (int k = 1; k <= order; ++k) {
    int num = static_cast<int>(rng.next_bits() % 19) - 9;
    int den = 1 + static_cast<int>(rng.next_bits() % 9);
    s.c[static_cast<size_t>(k)] = Rational(num, den);
  }
  return s;
}

}  // namespace

TEST_SUITE("series") {

TEST_CASE("construction and basic shape") {
  RS z3(3);
  CHECK(z3.order == 3);
  CHECK(z3.c.size() == 4);
  CHECK(z3.is_zero());
  CHECK(z3.min_order() == 4);

  RS one = RS::one(2);
  CHECK(one.c[0] == 1);
  CHECK(one.min_order() == 0);

  RS mono = RS::monomial(2, Rational(5), 4);
  CHECK(mono.c[2] == 5);
  CHECK(mono.min_order() == 2);
  // a monomial past the truncation order is just zero at this order
  CHECK(RS::monomial(5, Rational(1), 3).is_zero());

  CHECK_THROWS_AS(RS(-1), ValidationError);
}

TEST_CASE("multiplication truncates and matches hand expansion") {
  // (1+z)(1-z) to order 2
  RS a = make({1, 1, 0});
  RS b = make({1, -1, 0});
  RS ab = mul(a, b);
  CHECK(ab.c[0] == 1);
  CHECK(ab.c[1] == 0);
  CHECK(ab.c[2] == -1);

  // (1+z)^2 at order 1 loses the z^2 term
  RS a1 = make({1, 1});
  RS sq = mul(a1, a1);
  CHECK(sq.order == 1);
  CHECK(sq.c[0] == 1);
  CHECK(sq.c[1] == 2);

  // z^2 * z^2 = z^4 vanishes at order 3
  RS z2 = RS::monomial(2, Rational(1), 3);
  CHECK(mul(z2, z2).is_zero());
}

TEST_CASE("order mismatch is rejected") {
  RS a(2), b(3);
  CHECK_THROWS_AS(mul(a, b), ValidationError);
  CHECK_THROWS_AS(add(a, b), ValidationError);
  RS c(2);
  CHECK_THROWS_AS(add_scaled_inplace(c, Rational(1), b), ValidationError);
}

TEST_CASE("mul is commutative and associative") {
  Rng rng(411);
  for (int trial = 0; trial < 50; ++trial) {
    Rng r = rng.substream(static_cast<uint64_t>(trial));
    RS a = random_poly_with_unit_constant(r, 6);
    Rng r2 = r.substream(1);
    RS b = random_poly_with_unit_constant(r2, 6);
    Rng r3 = r.substream(2);
    RS c = random_poly_with_unit_constant(r3, 6);
    RS ab = mul(a, b);
    RS ba = mul(b, a);
    CHECK(ab.c == ba.c);
    CHECK(mul(ab, c).c == mul(a, mul(b, c)).c);
  }
}

TEST_CASE("log of (1+z)") {
  RS e = make({1, 1, 0, 0});
  RS p = log_from_poly(e);
  CHECK(p.c[0] == 0);
  CHECK(p.c[1] == 1);
  CHECK(p.c[2] == Rational(-1, 2));
  CHECK(p.c[3] == Rational(1, 3));
}

TEST_CASE("log of (1+z)^2 doubles the log of (1+z)") {
  RS e = make({1, 2, 1, 0});
  RS p = log_from_poly(e);
  CHECK(p.c[0] == 0);
  CHECK(p.c[1] == 2);
  CHECK(p.c[2] == -1);
  CHECK(p.c[3] == Rational(2, 3));
}

TEST_CASE("exp of a linear term gives factorial decay") {
  // exp(lambda z): coefficient of z^k is lambda^k / k!
  Rational lambda(3, 2);
  RS p(5);
  p.c[1] = lambda;
  RS e = poly_from_log(p);
  Rational expect(1);
  Rational power(1);
  for (int k = 0; k <= 5; ++k) {
    if (k > 0) {
      power *= lambda;
      expect *= k;
    }
    CHECK(e.c[static_cast<size_t>(k)] == power / expect);
  }
}

TEST_CASE("log requires unit constant, exp requires zero constant") {
  RS two = make({2, 1});
  CHECK_THROWS_AS(log_from_poly(two), ValidationError);
  RS off = make({1, 1});
  CHECK_THROWS_AS(poly_from_log(off), ValidationError);
}

TEST_CASE("log and exp invert each other exactly") {
  Rng rng(887);
  for (int trial = 0; trial < 200; ++trial) {
    Rng r = rng.substream(static_cast<uint64_t>(trial));
    int order = 1 + static_cast<int>(r.next_bits() % 10);
    RS e = random_poly_with_unit_constant(r, order);
    RS back = poly_from_log(log_from_poly(e));
    CHECK(back.c == e.c);
    // and the other direction, starting from a log-side series
    RS p = log_from_poly(e);
    CHECK(log_from_poly(poly_from_log(p)).c == p.c);
  }
}

TEST_CASE("float backend tracks the exact backend") {
  Rng rng(552);
  for (int trial = 0; trial < 40; ++trial) {
    Rng r = rng.substream(static_cast<uint64_t>(trial));
    RS e = random_poly_with_unit_constant(r, 8);
    RS p_exact = log_from_poly(e);
    DS p_float = log_from_poly(to_double_series(e));
    for (int k = 0; k <= 8; ++k) {
      double want = to_double(p_exact.c[static_cast<size_t>(k)]);
      CHECK(std::abs(p_float.c[static_cast<size_t>(k)] - want) <=
            backend_traits<double>::tolerance * (1.0 + std::abs(want)));
    }
  }
}

TEST_CASE("evaluation by Horner") {
  // truncations of log(1+z) evaluated at 1/2, against hand sums
  DS p3(3);
  p3.c[1] = 1.0;
  p3.c[2] = -0.5;
  p3.c[3] = 1.0 / 3.0;
  CHECK(evaluate(p3, 0.5) == doctest::Approx(0.41666666666666663).epsilon(1e-12));

  DS p4(4);
  p4.c[1] = 1.0;
  p4.c[2] = -0.5;
  p4.c[3] = 1.0 / 3.0;
  p4.c[4] = -0.25;
  CHECK(evaluate(p4, 0.5) == doctest::Approx(0.40104166666666663).epsilon(1e-12));

  RS q = make({1, Rational(1, 2), Rational(1, 4)});
  CHECK(evaluate(q, Rational(2)) == Rational(3));
}

TEST_CASE("resize and power helpers") {
  RS e = make({1, 1, 0, 0});
  RS shrunk = resized(e, 1);
  CHECK(shrunk.order == 1);
  CHECK(shrunk.c[1] == 1);
  RS grown = resized(shrunk, 4);
  CHECK(grown.order == 4);
  CHECK(grown.c[1] == 1);
  CHECK(grown.c[4] == 0);

  RS cube = pow(e, 3);  // (1+z)^3 truncated at 3
  CHECK(cube.c[0] == 1);
  CHECK(cube.c[1] == 3);
  CHECK(cube.c[2] == 3);
  CHECK(cube.c[3] == 1);
  CHECK(pow(e, 0).c == RS::one(3).c);
}

}  // TEST_SUITE
