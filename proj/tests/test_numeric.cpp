#include <cmath>

#include "cantor/errors.hpp"
#include "cantor/numeric.hpp"
#include "doctest.h"
#include "gen.hpp"

using namespace cantor;

TEST_CASE("integer and rational parsing") {
  CHECK(parse_bigint("12345678901234567890123") == BigInt("12345678901234567890123"));
  CHECK(parse_bigint("0xff") == 255);
  CHECK(parse_rational("6/4") == Rational(3, 2));
  CHECK(parse_rational("7") == 7);
  CHECK(to_string(Rational(3, 1)) == "3");
  CHECK(to_string(Rational(-2, 6)) == "-1/3");
  CHECK_THROWS_AS(parse_rational("1/0"), Error);
  CHECK_THROWS_AS(parse_bigint("12a"), Error);
}

TEST_CASE("floor_root brackets the root") {
  gen::Source src(11);
  for (int trial = 0; trial < 200; ++trial) {
    const BigInt x = src.bigint(32 + 32 * static_cast<unsigned>(src.below(6)));
    const unsigned long d = src.between(1, 9);
    const BigInt r = floor_root(x, d);
    BigInt lo = 1, hi = 1;
    for (unsigned long i = 0; i < d; ++i) {
      lo *= r;
      hi *= r + 1;
    }
    CHECK(lo <= x);
    CHECK(hi > x);
  }
  CHECK(floor_root(BigInt(1000), 3) == 10);
  CHECK(floor_root(BigInt(999), 3) == 9);
}

TEST_CASE("floor of rationals rounds toward minus infinity") {
  CHECK(floor(Rational(7, 2)) == 3);
  CHECK(floor(Rational(-7, 2)) == -4);
  CHECK(floor(Rational(4)) == 4);
}

TEST_CASE("HighPrecReal enclosures hold the exact result") {
  gen::Source src(5);
  for (int trial = 0; trial < 300; ++trial) {
    const Rational a = src.rational(1000000, 999983), b = src.rational(1000000, 999979);
    const Rational c = src.rational(1000, 997);
    HighPrecReal x(a), y(b), z(c);
    CHECK((x + y).contains(a + b));
    CHECK((x - y).contains(a - b));
    CHECK((x * y * z).contains(a * b * c));
    if (b != 0) CHECK((x / y).contains(a / b));
    HighPrecReal acc(0L);
    Rational exact(0);
    for (int i = 1; i <= 50; ++i) {
      acc += HighPrecReal(Rational(1, 3 * i + 1)) * z;
      exact += Rational(1, 3 * i + 1) * c;
    }
    CHECK(acc.contains(exact));
  }
}

TEST_CASE("HighPrecReal reciprocal of shifted mantissas") {
  const HighPrecReal r = HighPrecReal::reciprocal(BigInt(3), 100);
  CHECK(r.contains(Rational(BigInt(1), BigInt(3) << 100)));
  CHECK(r.excludes_zero());
  CHECK(HighPrecReal(0L).is_zero());
}

TEST_CASE("QValue comparisons agree with materialized values") {
  gen::Source src(9);
  for (int trial = 0; trial < 300; ++trial) {
    const QValue a(BigInt(src.between(1, 1000)), src.below(40));
    const QValue b(BigInt(src.between(1, 1000)), src.below(40));
    const BigInt av = a.to_bigint(), bv = b.to_bigint();
    const auto want = av < bv ? std::strong_ordering::less : av > bv ? std::strong_ordering::greater
                                                                       : std::strong_ordering::equal;
    CHECK(((a <=> b) == want));
    CHECK(((a <=> bv) == want));
    CHECK(a.bit_length() == msb(av) + 1);
    CHECK(std::abs(a.log2() - std::log2(av.convert_to<double>())) < 1e-9);
  }
  CHECK(QValue(BigInt(3), 2) == BigInt(12));
  CHECK(QValue(BigInt(6), 1) == QValue(BigInt(12), 0));
}

TEST_CASE("huge QValues refuse materialization") {
  QValue huge(BigInt(5), value_cap_bits() + 10);
  CHECK(huge.is_huge());
  CHECK_THROWS_AS(huge.to_bigint(), OverflowPolicyError);
  CHECK(huge > QValue(BigInt(5), 3));
}
