#include "cantor/numeric.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "cantor/errors.hpp"

namespace cantor {

namespace {

std::atomic<unsigned> g_precision{128};
std::atomic<std::uint64_t> g_value_cap{1u << 20};

constexpr mpfr_prec_t kErrBits = 64;

unsigned digits10_for(unsigned bits) { return static_cast<unsigned>(std::ceil(bits * 0.30103)) + 2; }

struct PrecisionInit {
  PrecisionInit() {
    Float::default_precision(digits10_for(g_precision));
  }
};
const PrecisionInit precision_init;

// Upper bound on one rounding error of a result r held at the precision of r.
void ulp_bound(mpfr_t out, const mpfr_t r) {
  if (mpfr_zero_p(r) || !mpfr_number_p(r)) {
    mpfr_set_zero(out, 1);
    return;
  }
  mpfr_set_ui_2exp(out, 1, mpfr_get_exp(r) - mpfr_get_prec(r), MPFR_RNDU);
}

}  // namespace

Float to_float(const Rational& v) {
  return Float(boost::multiprecision::numerator(v)) / Float(boost::multiprecision::denominator(v));
}

unsigned default_precision() { return g_precision; }

void set_default_precision(unsigned bits) {
  if (bits < 64) throw ValueError("precision must be at least 64 bits");
  g_precision = bits;
  Float::default_precision(digits10_for(bits));
}

std::uint64_t value_cap_bits() { return g_value_cap; }
void set_value_cap_bits(std::uint64_t bits) { g_value_cap = bits; }

BigInt parse_bigint(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw ValueError("empty integer");
  bool neg = false;
  std::size_t i = 0;
  if (s[0] == '-') {
    neg = true;
    i = 1;
  }
  int base = 10;
  if (s.size() > i + 1 && s[i] == '0' && (s[i + 1] == 'x' || s[i + 1] == 'X')) {
    base = 16;
    i += 2;
  }
  if (i >= s.size()) throw ValueError("malformed integer '" + s + "'");
  for (std::size_t j = i; j < s.size(); ++j) {
    const char ch = s[j];
    const bool ok = base == 10 ? (ch >= '0' && ch <= '9') : std::isxdigit(static_cast<unsigned char>(ch));
    if (!ok) throw ValueError("malformed integer '" + s + "'");
  }
  BigInt v;
  mpz_set_str(v.backend().data(), s.c_str() + i, base);
  return neg ? BigInt(-v) : v;
}

Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_bigint(text));
  const BigInt num = parse_bigint(text.substr(0, slash));
  const BigInt den = parse_bigint(text.substr(slash + 1));
  if (den == 0) throw ValueError("zero denominator in '" + std::string(text) + "'");
  return Rational(num, den);
}

std::string to_string(const BigInt& v) { return v.str(); }

std::string to_string(const Rational& v) {
  const BigInt num = boost::multiprecision::numerator(v);
  const BigInt den = boost::multiprecision::denominator(v);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

BigInt floor_root(const BigInt& x, unsigned long degree) {
  if (x < 0) throw DomainError("root of negative integer");
  BigInt r;
  mpz_root(r.backend().data(), x.backend().data(), degree);
  return r;
}

BigInt floor(const Rational& x) {
  BigInt r;
  mpz_fdiv_q(r.backend().data(), mpq_numref(x.backend().data()), mpq_denref(x.backend().data()));
  return r;
}

bool fits_u64(const BigInt& v) { return v == 0 || (v > 0 && msb(v) < 64); }

std::uint64_t to_u64(const BigInt& v) {
  if (!fits_u64(v)) throw OverflowPolicyError("value does not fit in 64 bits");
  return v.convert_to<std::uint64_t>();
}

// ---------------------------------------------------------------------------
// HighPrecReal

HighPrecReal::HighPrecReal(unsigned bits) {
  mpfr_init2(value_, bits);
  mpfr_init2(err_, kErrBits);
  mpfr_set_zero(value_, 1);
  mpfr_set_zero(err_, 1);
}

HighPrecReal::HighPrecReal() : HighPrecReal(default_precision()) {}

HighPrecReal::HighPrecReal(long value) : HighPrecReal(default_precision()) {
  add_rounding_error(mpfr_set_si(value_, value, MPFR_RNDN));
}

HighPrecReal::HighPrecReal(const BigInt& value) : HighPrecReal(default_precision()) {
  add_rounding_error(mpfr_set_z(value_, value.backend().data(), MPFR_RNDN));
}

HighPrecReal::HighPrecReal(const Rational& value) : HighPrecReal(default_precision()) {
  add_rounding_error(mpfr_set_q(value_, value.backend().data(), MPFR_RNDN));
}

HighPrecReal::HighPrecReal(const HighPrecReal& other) : HighPrecReal(other.precision()) {
  mpfr_set(value_, other.value_, MPFR_RNDN);
  mpfr_set(err_, other.err_, MPFR_RNDU);
}

HighPrecReal::HighPrecReal(HighPrecReal&& other) noexcept : HighPrecReal(static_cast<unsigned>(MPFR_PREC_MIN)) {
  mpfr_swap(value_, other.value_);
  mpfr_swap(err_, other.err_);
}

HighPrecReal& HighPrecReal::operator=(const HighPrecReal& other) {
  if (this != &other) {
    mpfr_set_prec(value_, other.precision());
    mpfr_set(value_, other.value_, MPFR_RNDN);
    mpfr_set(err_, other.err_, MPFR_RNDU);
  }
  return *this;
}

HighPrecReal& HighPrecReal::operator=(HighPrecReal&& other) noexcept {
  mpfr_swap(value_, other.value_);
  mpfr_swap(err_, other.err_);
  return *this;
}

HighPrecReal::~HighPrecReal() {
  mpfr_clear(value_);
  mpfr_clear(err_);
}

void HighPrecReal::add_rounding_error(int ternary) {
  if (ternary == 0) return;
  mpfr_t u;
  mpfr_init2(u, kErrBits);
  ulp_bound(u, value_);
  mpfr_add(err_, err_, u, MPFR_RNDU);
  mpfr_clear(u);
}

HighPrecReal HighPrecReal::reciprocal(const BigInt& mantissa, std::uint64_t shift) {
  if (mantissa == 0) throw DomainError("reciprocal of zero");
  HighPrecReal r;
  mpfr_set_ui(r.value_, 1, MPFR_RNDN);
  const int t = mpfr_div_z(r.value_, r.value_, mantissa.backend().data(), MPFR_RNDN);
  mpfr_div_2ui(r.value_, r.value_, static_cast<unsigned long>(shift), MPFR_RNDN);
  r.add_rounding_error(t);
  return r;
}

HighPrecReal& HighPrecReal::operator+=(const HighPrecReal& rhs) {
  const int t = mpfr_add(value_, value_, rhs.value_, MPFR_RNDN);
  mpfr_add(err_, err_, rhs.err_, MPFR_RNDU);
  add_rounding_error(t);
  return *this;
}

HighPrecReal& HighPrecReal::operator-=(const HighPrecReal& rhs) {
  const int t = mpfr_sub(value_, value_, rhs.value_, MPFR_RNDN);
  mpfr_add(err_, err_, rhs.err_, MPFR_RNDU);
  add_rounding_error(t);
  return *this;
}

HighPrecReal& HighPrecReal::operator*=(const HighPrecReal& rhs) {
  // |ab - a'b'| <= |a| eb + |b| ea + ea eb
  mpfr_t e, tmp;
  mpfr_init2(e, kErrBits);
  mpfr_init2(tmp, kErrBits);
  mpfr_abs(tmp, value_, MPFR_RNDU);
  mpfr_mul(e, tmp, rhs.err_, MPFR_RNDU);
  mpfr_abs(tmp, rhs.value_, MPFR_RNDU);
  mpfr_add(tmp, tmp, rhs.err_, MPFR_RNDU);
  mpfr_mul(tmp, tmp, err_, MPFR_RNDU);
  mpfr_add(e, e, tmp, MPFR_RNDU);
  const int t = mpfr_mul(value_, value_, rhs.value_, MPFR_RNDN);
  mpfr_set(err_, e, MPFR_RNDU);
  add_rounding_error(t);
  mpfr_clear(e);
  mpfr_clear(tmp);
  return *this;
}

HighPrecReal& HighPrecReal::operator/=(const HighPrecReal& rhs) {
  // |a/b - a'/b'| <= (|b| ea + |a| eb) / (|b| (|b| - eb))
  mpfr_t num, den, tmp;
  mpfr_init2(num, kErrBits);
  mpfr_init2(den, kErrBits);
  mpfr_init2(tmp, kErrBits);
  mpfr_abs(den, rhs.value_, MPFR_RNDD);
  mpfr_sub(den, den, rhs.err_, MPFR_RNDD);
  if (mpfr_sgn(den) <= 0) {
    mpfr_clear(num);
    mpfr_clear(den);
    mpfr_clear(tmp);
    throw DomainError("division by an enclosure containing zero");
  }
  mpfr_abs(tmp, rhs.value_, MPFR_RNDD);
  mpfr_mul(den, den, tmp, MPFR_RNDD);
  mpfr_abs(tmp, rhs.value_, MPFR_RNDU);
  mpfr_mul(num, tmp, err_, MPFR_RNDU);
  mpfr_abs(tmp, value_, MPFR_RNDU);
  mpfr_mul(tmp, tmp, rhs.err_, MPFR_RNDU);
  mpfr_add(num, num, tmp, MPFR_RNDU);
  mpfr_div(num, num, den, MPFR_RNDU);
  const int t = mpfr_div(value_, value_, rhs.value_, MPFR_RNDN);
  mpfr_set(err_, num, MPFR_RNDU);
  add_rounding_error(t);
  mpfr_clear(num);
  mpfr_clear(den);
  mpfr_clear(tmp);
  return *this;
}

unsigned HighPrecReal::precision() const { return static_cast<unsigned>(mpfr_get_prec(value_)); }
double HighPrecReal::to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }
double HighPrecReal::err_double() const { return mpfr_get_d(err_, MPFR_RNDU); }

Float HighPrecReal::value() const {
  Float f;
  f.precision(digits10_for(precision()));
  mpfr_set(f.backend().data(), value_, MPFR_RNDN);
  return f;
}

Rational HighPrecReal::exact_value() const {
  Rational q;
  mpfr_get_q(q.backend().data(), value_);
  return q;
}

Rational HighPrecReal::exact_err() const {
  Rational q;
  mpfr_get_q(q.backend().data(), err_);
  return q;
}

bool HighPrecReal::contains(const Rational& x) const {
  const Rational d = x - exact_value();
  return abs(d) <= exact_err();
}

bool HighPrecReal::excludes_zero() const { return mpfr_cmpabs(value_, err_) > 0; }
bool HighPrecReal::is_zero() const { return mpfr_zero_p(value_) && mpfr_zero_p(err_); }

std::string HighPrecReal::str(int digits) const {
  std::ostringstream os;
  os.precision(digits);
  os << value();
  return os.str();
}

// ---------------------------------------------------------------------------
// QValue

QValue::QValue(BigInt m, std::uint64_t s) : mantissa(std::move(m)), shift(s) {
  if (mantissa <= 0) throw ValueError("sequence values must be positive");
}

QValue::QValue(std::uint64_t v) : mantissa(v), shift(0) {}

std::uint64_t QValue::bit_length() const { return msb(mantissa) + 1 + shift; }

bool QValue::fits_u64() const { return bit_length() <= 64; }

std::uint64_t QValue::to_u64() const {
  if (!fits_u64()) throw OverflowPolicyError("value does not fit in 64 bits");
  return mantissa.convert_to<std::uint64_t>() << shift;
}

BigInt QValue::to_bigint() const {
  if (bit_length() > value_cap_bits())
    throw OverflowPolicyError("value of " + std::to_string(bit_length()) +
                              " bits exceeds the digit-size cap of " + std::to_string(value_cap_bits()));
  return BigInt(mantissa << static_cast<unsigned>(shift));
}

Float QValue::log() const {
  Float m(mantissa);
  return boost::multiprecision::log(m) + Float(shift) * boost::multiprecision::log(Float(2));
}

double QValue::log2() const {
  const std::uint64_t bits = msb(mantissa) + 1;
  if (bits <= 1000) return std::log2(mantissa.convert_to<double>()) + static_cast<double>(shift);
  signed long exp = 0;
  const double d = mpz_get_d_2exp(&exp, mantissa.backend().data());
  return std::log2(d) + static_cast<double>(exp) + static_cast<double>(shift);
}

std::strong_ordering QValue::operator<=>(const QValue& other) const {
  const auto la = bit_length();
  const auto lb = other.bit_length();
  if (la != lb) return la <=> lb;
  const std::uint64_t lo = std::min(shift, other.shift);
  const BigInt a = mantissa << static_cast<unsigned>(shift - lo);
  const BigInt b = other.mantissa << static_cast<unsigned>(other.shift - lo);
  const int c = a.compare(b);
  return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
}

std::strong_ordering QValue::operator<=>(const BigInt& other) const {
  if (other <= 0) return std::strong_ordering::greater;
  return *this <=> QValue(other);
}

std::string QValue::str() const {
  if (shift == 0) return mantissa.str();
  if (!is_huge()) return to_bigint().str();
  return mantissa.str() + "*2^" + std::to_string(shift);
}

}  // namespace cantor
