#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include <mpfr.h>

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace cantor {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;
// Variable-precision binary float; default precision follows default_precision().
using Float = boost::multiprecision::mpfr_float;

/// Significand bits used for HighPrecReal and Float values created from now on.
unsigned default_precision();
void set_default_precision(unsigned bits);

/// Values whose bit length exceeds this cap stay in shifted form and refuse
/// materialization (see QValue::to_bigint).
std::uint64_t value_cap_bits();
void set_value_cap_bits(std::uint64_t bits);

BigInt parse_bigint(std::string_view text);     // decimal or 0x-prefixed hex
Rational parse_rational(std::string_view text);  // "p/q" or "p"
/// Rational to Float at the default precision (direct construction would take an unbounded precision).
Float to_float(const Rational& v);
std::string to_string(const BigInt& v);
std::string to_string(const Rational& v);        // "p/q", or "p" when integral

BigInt floor_root(const BigInt& x, unsigned long degree);
BigInt floor(const Rational& x);
bool fits_u64(const BigInt& v);
std::uint64_t to_u64(const BigInt& v);

/// A real number held at finite precision together with a rigorous bound on
/// the distance to the exact value it stands for.
class HighPrecReal {
 public:
  HighPrecReal();
  explicit HighPrecReal(long value);
  explicit HighPrecReal(const BigInt& value);
  explicit HighPrecReal(const Rational& value);
  HighPrecReal(const HighPrecReal& other);
  HighPrecReal(HighPrecReal&& other) noexcept;
  HighPrecReal& operator=(const HighPrecReal& other);
  HighPrecReal& operator=(HighPrecReal&& other) noexcept;
  ~HighPrecReal();

  /// 1 / (mantissa * 2^shift).
  static HighPrecReal reciprocal(const BigInt& mantissa, std::uint64_t shift = 0);

  HighPrecReal& operator+=(const HighPrecReal& rhs);
  HighPrecReal& operator-=(const HighPrecReal& rhs);
  HighPrecReal& operator*=(const HighPrecReal& rhs);
  HighPrecReal& operator/=(const HighPrecReal& rhs);

  friend HighPrecReal operator+(HighPrecReal a, const HighPrecReal& b) { return a += b; }
  friend HighPrecReal operator-(HighPrecReal a, const HighPrecReal& b) { return a -= b; }
  friend HighPrecReal operator*(HighPrecReal a, const HighPrecReal& b) { return a *= b; }
  friend HighPrecReal operator/(HighPrecReal a, const HighPrecReal& b) { return a /= b; }

  unsigned precision() const;
  double to_double() const;
  double err_double() const;  // error bound rounded up to double
  Float value() const;
  Rational exact_value() const;
  Rational exact_err() const;

  bool contains(const Rational& x) const;
  bool excludes_zero() const;
  bool is_zero() const;
  std::string str(int digits = 12) const;

 private:
  explicit HighPrecReal(unsigned bits);
  void add_rounding_error(int ternary);

  mpfr_t value_;
  mpfr_t err_;
};

/// A basic-sequence value mantissa * 2^shift. Kept in this form so that
/// values like 2^n q_n never need materializing to be compared or inverted.
struct QValue {
  BigInt mantissa{2};
  std::uint64_t shift = 0;

  QValue() = default;
  QValue(BigInt m, std::uint64_t s = 0);  // NOLINT(google-explicit-constructor)
  QValue(std::uint64_t v);                // NOLINT(google-explicit-constructor)

  std::uint64_t bit_length() const;
  bool is_huge() const { return bit_length() > value_cap_bits(); }
  bool fits_u64() const;
  std::uint64_t to_u64() const;
  BigInt to_bigint() const;  // throws OverflowPolicyError above the cap
  Float log() const;         // natural log
  double log2() const;
  HighPrecReal reciprocal() const { return HighPrecReal::reciprocal(mantissa, shift); }

  std::strong_ordering operator<=>(const QValue& other) const;
  bool operator==(const QValue& other) const { return (*this <=> other) == 0; }
  std::strong_ordering operator<=>(const BigInt& other) const;
  bool operator==(const BigInt& other) const { return (*this <=> other) == 0; }

  std::string str() const;
};

}  // namespace cantor
