#include <cstdio>
#include <filesystem>

#include "cantor/codec.hpp"
#include "cantor/errors.hpp"
#include "doctest.h"
#include "gen.hpp"

using namespace cantor;

namespace {

std::vector<BigInt> ints(std::initializer_list<int> v) { return {v.begin(), v.end()}; }

std::vector<BigInt> prefix(const DigitStream& x, std::uint64_t n) {
  std::vector<BigInt> out;
  for (std::uint64_t i = 1; i <= n; ++i) out.push_back(x.value(i));
  return out;
}

}  // namespace

TEST_CASE("digits of rationals") {
  const auto two = BasicSequence::constant(2);
  CHECK(digits_from_real(Rational(1, 2), two, 3) == ints({1, 0, 0}));
  const auto q23 = BasicSequence::from_spec("blocks:[2]^1,[3]^1");
  CHECK(digits_from_real(Rational(5, 6), q23, 2) == ints({1, 2}));
  CHECK(digits_from_real(Rational(0), BasicSequence::from_spec("pow:1:1"), 5) == ints({0, 0, 0, 0, 0}));
}

TEST_CASE("reals from digits") {
  const auto two = BasicSequence::constant(2);
  CHECK(real_from_digits(ints({1, 0, 0}), two).contains(Rational(1, 2)));
  const auto q23 = BasicSequence::from_spec("blocks:[2]^1,[3]^1");
  CHECK(real_from_digits(ints({1, 2}), q23).lower == Rational(5, 6));
  const auto empty = real_from_digits({}, two);
  CHECK(empty.lower == 0);
  CHECK(empty.width == 1);
}

TEST_CASE("digit expansion round trip") {
  gen::Source src(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto q = BasicSequence::from_values(src.base(12, 50), true);
    const Rational x = src.rational(1000000, 1000003, false) / 2;
    if (x >= 1) continue;
    const auto digits = digits_from_real(x, q, 12);
    for (std::size_t i = 0; i < digits.size(); ++i) {
      CHECK(digits[i] >= 0);
      CHECK(digits[i] < q.value(i + 1));
    }
    const auto enc = real_from_digits(digits, q);
    CHECK(enc.contains(x));
    CHECK(real_from_digits_approx(digits, q).contains(enc.lower));
  }
}

TEST_CASE("shift map") {
  const auto two = BasicSequence::constant(2);
  CHECK(tqn(Rational(1, 2), two, 1) == 0);
  CHECK(tqn(Rational(5, 6), BasicSequence::from_spec("blocks:[2]^1,[3]^1"), 1) == Rational(2, 3));
  CHECK(tqn(Rational(3, 7), two, 0) == Rational(3, 7));
}

TEST_CASE("digit transfer") {
  const auto ten = BasicSequence::constant(10), five = BasicSequence::constant(5);
  const auto x = DigitStream::explicit_digits(ints({7, 3, 9}), ten);
  CHECK(prefix(psi_map(ten, five, x), 3) == ints({4, 3, 4}));
  const auto three = BasicSequence::constant(3), hundred = BasicSequence::constant(100);
  const auto z = DigitStream::explicit_digits(ints({2, 2, 2}), three);
  CHECK(prefix(psi_map(three, hundred, z), 3) == ints({2, 2, 2}));
  const auto q = BasicSequence::from_spec("pow:1/2:1");
  const auto u = DigitStream::uniform(q, 4);
  const auto same = psi_map(q, q, u);
  for (std::uint64_t n = 1; n <= 500; ++n) {
    if (u.value(n) < q.value(n) - 1) CHECK(same.value(n) == u.value(n));
  }
}

TEST_CASE("extracted bases and digits") {
  const auto lin = BasicSequence::from_spec("pow:1:1");
  const auto lambda = subsequence_lambda(lin, ProgressionIndex(2, 1));
  CHECK(lambda.value(1) == 3);
  CHECK(lambda.value(2) == 5);
  CHECK(lambda.value(3) == 7);
  const auto id = subsequence_lambda(lin, ProgressionIndex::identity());
  for (std::uint64_t n = 1; n < 50; ++n) CHECK(id.value(n) == lin.value(n));
  CHECK(subsequence_lambda(BasicSequence::constant(7), ProgressionIndex(5, 3)).value(9) == 7);
  const auto x = DigitStream::explicit_digits(ints({0, 1, 2, 3, 4}), BasicSequence::constant(5));
  const auto ups = upsilon(x, ProgressionIndex(2, 1));
  CHECK(ups.length() == std::optional<std::uint64_t>(3));
  CHECK(prefix(ups, 3) == ints({0, 2, 4}));
  CHECK(prefix(upsilon(x, ProgressionIndex::identity()), 5) == ints({0, 1, 2, 3, 4}));
}

TEST_CASE("digit streams validate and reproduce") {
  const auto q = BasicSequence::from_spec("pow:1/3:1");
  CHECK_THROWS(DigitStream::explicit_digits(ints({0, 1}), q, DigitStream::Tail::Max));
  CHECK_THROWS(DigitStream::explicit_digits(ints({5}), BasicSequence::constant(3)));
  const auto a = DigitStream::uniform(q, 17), b = DigitStream::uniform(q, 17), c = DigitStream::uniform(q, 18);
  bool differ = false;
  for (std::uint64_t n = 1; n <= 2000; ++n) {
    CHECK(a.value(n) == b.value(n));
    CHECK(a.value(n) < q.value(n));
    differ = differ || a.value(n) != c.value(n);
  }
  CHECK(differ);
}

TEST_CASE("huge digits stay lazy and deterministic") {
  const auto huge = BasicSequence::from_values({BigInt(1) << 200});
  const auto x = DigitStream::uniform(huge, 3), y = DigitStream::uniform(huge, 3);
  CHECK(std::holds_alternative<HugeMarker>(x.digit(5)));
  CHECK(x.value(5) == y.value(5));
  CHECK(x.value(5) < (BigInt(1) << 200));
  // a marker is never reported as a small symbol
  CHECK(x.symbol(5) == kLargeSymbol);
}

TEST_CASE("digit files round trip") {
  const auto q = BasicSequence::from_spec("pow:1/2:1");
  const auto x = DigitStream::uniform(q, 8);
  const auto path = (std::filesystem::temp_directory_path() / "cantor_digits_test.txt").string();
  write_digit_file(path, x, 100);
  const auto back = read_digit_file(path);
  REQUIRE(back.size() == 100);
  for (std::uint64_t n = 1; n <= 100; ++n) CHECK(std::get<BigInt>(back[n - 1]) == x.value(n));
  std::remove(path.c_str());
  CHECK_THROWS(read_digit_file(path));
}
