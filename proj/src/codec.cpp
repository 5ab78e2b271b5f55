#include "cantor/codec.hpp"

#include <fstream>
#include <sstream>

#include "cantor/errors.hpp"
#include "cantor/random.hpp"

namespace cantor {

// ---------------------------------------------------------------------------
// ProgressionIndex

ProgressionIndex::ProgressionIndex(std::uint64_t m, std::uint64_t r) : m_(m), r_(r) {
  if (m == 0) throw ValueError("progression modulus must be >= 1");
  if (r >= m) throw ValueError("progression residue must satisfy 0 <= r <= m-1");
}

ProgressionIndex ProgressionIndex::explicit_list(std::vector<std::uint64_t> positions) {
  if (positions.empty()) throw ValueError("empty index list");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (positions[i] == 0) throw ValueError("index list entries must be positive");
    if (i && positions[i] <= positions[i - 1]) throw ValueError("index list must be strictly increasing");
  }
  ProgressionIndex p;
  p.list_ = std::make_shared<const std::vector<std::uint64_t>>(std::move(positions));
  return p;
}

std::uint64_t ProgressionIndex::at(std::uint64_t t) const {
  if (t == 0) throw RangeError("progression indices start at 1");
  if (list_) {
    if (t > list_->size()) throw RangeError("index list exhausted");
    return (*list_)[t - 1];
  }
  // First element is r when r >= 1, else m.
  return r_ >= 1 ? m_ * (t - 1) + r_ : m_ * t;
}

std::uint64_t ProgressionIndex::count_le(std::uint64_t n) const {
  if (list_) return static_cast<std::uint64_t>(std::upper_bound(list_->begin(), list_->end(), n) - list_->begin());
  if (r_ >= 1) return n >= r_ ? (n - r_) / m_ + 1 : 0;
  return n / m_;
}

bool ProgressionIndex::contains(std::uint64_t n) const {
  if (n == 0) return false;
  if (list_) return std::binary_search(list_->begin(), list_->end(), n);
  return n % m_ == r_;
}

std::optional<std::uint64_t> ProgressionIndex::size() const {
  if (list_) return list_->size();
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Marker digits

namespace {

BigInt marker_fraction(const HugeMarker& marker) {
  PositionRng rng(marker.seed ^ 0x6A09E667F3BCC909ULL, marker.position);
  BigInt u = rng();
  u <<= 64;
  u += rng();
  return u;  // fraction u / 2^128
}

}  // namespace

std::optional<std::uint64_t> marker_small_value(const HugeMarker& marker, const QValue& p) {
  const BigInt u = marker_fraction(marker);
  if (u == 0) return 0;
  if (p.shift >= 128) {
    const std::uint64_t bits = msb(u) + 1 + msb(p.mantissa) + 1 + (p.shift - 128);
    if (bits > 65) return std::nullopt;
    const BigInt v = (u * p.mantissa) << static_cast<unsigned>(p.shift - 128);
    if (!fits_u64(v) || v == BigInt(kLargeSymbol)) return std::nullopt;
    return to_u64(v);
  }
  const BigInt v = BigInt(u * p.mantissa) >> static_cast<unsigned>(128 - p.shift);
  if (!fits_u64(v) || v == BigInt(kLargeSymbol)) return std::nullopt;
  return to_u64(v);
}

BigInt marker_value(const HugeMarker& marker, const QValue& p) {
  const BigInt u = marker_fraction(marker);
  if (p.shift >= 128) {
    if (u == 0) return 0;
    return BigInt((u * p.mantissa) << static_cast<unsigned>(p.shift - 128));
  }
  return BigInt(BigInt(u * p.mantissa) >> static_cast<unsigned>(128 - p.shift));
}

// ---------------------------------------------------------------------------
// DigitStream

struct DigitStream::Impl {
  explicit Impl(BasicSequence b) : base(std::move(b)) {}
  BasicSequence base;
  std::optional<std::uint64_t> length;
  std::function<Digit(std::uint64_t)> digit;
  std::function<std::uint64_t(std::uint64_t)> symbol;
  std::string kind;
};

namespace {

std::uint64_t symbol_of(const Digit& d, const QValue& base) {
  if (const auto* v = std::get_if<BigInt>(&d)) {
    if (fits_u64(*v) && *v != BigInt(kLargeSymbol)) return to_u64(*v);
    return kLargeSymbol;
  }
  const auto small = marker_small_value(std::get<HugeMarker>(d), base);
  return small ? *small : kLargeSymbol;
}

BigInt value_of(const Digit& d, const QValue& base) {
  if (const auto* v = std::get_if<BigInt>(&d)) return *v;
  if (base.is_huge()) throw OverflowPolicyError("marker digit over a base beyond the digit-size cap");
  return marker_value(std::get<HugeMarker>(d), base);
}

}  // namespace

DigitStream DigitStream::explicit_digits(std::vector<Digit> digits, BasicSequence base, Tail tail) {
  if (tail == Tail::Max) throw ValueError("an all-(q_n - 1) tail is not a valid expansion");
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (const auto* v = std::get_if<BigInt>(&digits[i])) {
      if (*v < 0 || !(base.at(i + 1) > *v))
        throw DomainError("digit at position " + std::to_string(i + 1) + " is outside [0, q_n)");
    }
  }
  auto data = std::make_shared<const std::vector<Digit>>(std::move(digits));
  auto impl = std::make_shared<Impl>(base);
  if (tail == Tail::None) impl->length = data->size();
  impl->digit = [data](std::uint64_t n) -> Digit {
    if (n <= data->size()) return (*data)[n - 1];
    return BigInt(0);
  };
  impl->symbol = [data, base](std::uint64_t n) -> std::uint64_t {
    if (n > data->size()) return 0;
    return symbol_of((*data)[n - 1], base.at(n));
  };
  impl->kind = "explicit";
  return DigitStream(impl);
}

DigitStream DigitStream::explicit_digits(const std::vector<BigInt>& digits, BasicSequence base, Tail tail) {
  return explicit_digits(std::vector<Digit>(digits.begin(), digits.end()), std::move(base), tail);
}

DigitStream DigitStream::uniform(BasicSequence base, std::uint64_t seed) {
  auto impl = std::make_shared<Impl>(base);
  impl->length = base.meta().length;
  impl->digit = [base, seed](std::uint64_t n) -> Digit {
    const QValue& q = base.at(n);
    if (q.fits_u64()) {
      PositionRng rng(seed, n);
      return BigInt(uniform_below(rng, q.to_u64()));
    }
    return HugeMarker{seed, n};
  };
  impl->symbol = [base, seed](std::uint64_t n) -> std::uint64_t {
    const QValue& q = base.at(n);
    if (q.fits_u64()) {
      PositionRng rng(seed, n);
      const std::uint64_t v = uniform_below(rng, q.to_u64());
      return v == kLargeSymbol ? kLargeSymbol : v;
    }
    const auto small = marker_small_value(HugeMarker{seed, n}, q);
    return small ? *small : kLargeSymbol;
  };
  impl->kind = "uniform";
  return DigitStream(impl);
}

DigitStream DigitStream::from_function(std::function<Digit(std::uint64_t)> fn, BasicSequence base,
                                       std::optional<std::uint64_t> length) {
  auto impl = std::make_shared<Impl>(base);
  impl->length = length;
  impl->digit = fn;
  impl->symbol = [fn, base](std::uint64_t n) { return symbol_of(fn(n), base.at(n)); };
  impl->kind = "function";
  return DigitStream(impl);
}

std::uint64_t DigitStream::symbol(std::uint64_t n) const {
  if (n == 0) throw RangeError("positions start at 1");
  if (impl_->length && n > *impl_->length) throw RangeError("digit position beyond stream length");
  return impl_->symbol(n);
}

Digit DigitStream::digit(std::uint64_t n) const {
  if (n == 0) throw RangeError("positions start at 1");
  if (impl_->length && n > *impl_->length) throw RangeError("digit position beyond stream length");
  return impl_->digit(n);
}

BigInt DigitStream::value(std::uint64_t n) const { return value_of(digit(n), impl_->base.at(n)); }
const BasicSequence& DigitStream::base() const { return impl_->base; }
std::optional<std::uint64_t> DigitStream::length() const { return impl_->length; }

// ---------------------------------------------------------------------------
// Exact conversions

std::vector<BigInt> digits_from_real(const Rational& x, const BasicSequence& q, std::uint64_t n) {
  if (x < 0 || x >= 1) throw DomainError("digits_from_real needs 0 <= x < 1");
  std::vector<BigInt> out;
  out.reserve(n);
  Rational rem = x;
  for (std::uint64_t j = 1; j <= n; ++j) {
    const Rational scaled = rem * Rational(q.value(j));
    BigInt e = floor(scaled);
    rem = scaled - Rational(e);
    out.push_back(std::move(e));
  }
  return out;
}

RealEnclosure real_from_digits(const std::vector<BigInt>& digits, const BasicSequence& q) {
  Rational sum = 0;
  BigInt denom = 1;
  for (std::size_t j = 0; j < digits.size(); ++j) {
    denom *= q.value(j + 1);
    sum += Rational(digits[j], denom);
  }
  return {sum, Rational(BigInt(1), denom)};
}

HighPrecReal real_from_digits_approx(const std::vector<BigInt>& digits, const BasicSequence& q) {
  HighPrecReal sum;
  BigInt denom = 1;
  for (std::size_t j = 0; j < digits.size(); ++j) {
    denom *= q.value(j + 1);
    sum += HighPrecReal(digits[j]) * HighPrecReal::reciprocal(denom);
  }
  return sum;
}

Rational tqn(const Rational& x, const BasicSequence& q, std::uint64_t n) {
  BigInt prod = 1;
  for (std::uint64_t j = 1; j <= n; ++j) prod *= q.value(j);
  const Rational y = x * Rational(prod);
  return y - Rational(floor(y));
}

// ---------------------------------------------------------------------------
// Views

DigitStream psi_map(const BasicSequence& p, const BasicSequence& q, const DigitStream& x) {
  (void)p;  // x is read with respect to its own base, which is P
  auto src = x.impl_;
  auto impl = std::make_shared<DigitStream::Impl>(q);
  impl->length = x.length();
  impl->digit = [src, q](std::uint64_t n) -> Digit {
    const Digit d = src->digit(n);
    const QValue& qn = q.at(n);
    const QValue& pn = src->base.at(n);
    if (std::holds_alternative<HugeMarker>(d)) {
      if (!(qn < pn)) return value_of(d, pn);  // E_n < p_n <= q_n
      const auto small = marker_small_value(std::get<HugeMarker>(d), pn);
      if (small && qn > BigInt(*small)) return BigInt(*small);
      return BigInt(qn.to_bigint() - 1);
    }
    const BigInt& e = std::get<BigInt>(d);
    if (qn > e) return e;
    return BigInt(qn.to_bigint() - 1);
  };
  impl->symbol = [src, q](std::uint64_t n) -> std::uint64_t {
    const std::uint64_t s = src->symbol(n);
    const QValue& qn = q.at(n);
    if (qn.fits_u64()) {
      const std::uint64_t qm1 = qn.to_u64() - 1;
      if (s == kLargeSymbol) return qm1 == kLargeSymbol ? kLargeSymbol : qm1;
      return std::min(s, qm1);
    }
    return s;
  };
  impl->kind = "psi";
  return DigitStream(impl);
}

BasicSequence subsequence_lambda(const BasicSequence& q, const ProgressionIndex& m) {
  BasicSequence::Meta meta;
  meta.nondecreasing = q.meta().nondecreasing;
  meta.infinite_in_limit = q.meta().infinite_in_limit;
  meta.length = m.size();
  return BasicSequence([q, m](std::uint64_t t) { return q.at(m.at(t)); }, meta,
                       "lambda(" + q.label() + ")");
}

DigitStream upsilon(const DigitStream& x, const ProgressionIndex& m) {
  auto src = x.impl_;
  auto impl = std::make_shared<DigitStream::Impl>(subsequence_lambda(x.base(), m));
  if (x.length()) {
    impl->length = m.count_le(*x.length());
  } else if (m.size()) {
    impl->length = m.size();
  }
  impl->digit = [src, m](std::uint64_t t) { return src->digit(m.at(t)); };
  impl->symbol = [src, m](std::uint64_t t) { return src->symbol(m.at(t)); };
  impl->kind = "upsilon";
  return DigitStream(impl);
}

// ---------------------------------------------------------------------------
// File format

void write_digit_file(const std::string& path, const DigitStream& x, std::uint64_t n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValueError("cannot write '" + path + "'");
  out << "CANTORDIGITS 1\n";
  for (std::uint64_t j = 1; j <= n; ++j) {
    const Digit d = x.digit(j);
    out << j << '\t';
    if (const auto* v = std::get_if<BigInt>(&d)) {
      out << v->str();
    } else {
      const auto& mk = std::get<HugeMarker>(d);
      if (mk.position != j) throw ValueError("marker position does not match its file position");
      out << '*' << mk.seed;
    }
    out << '\n';
  }
}

std::vector<Digit> read_digit_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValueError("cannot open digit file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "CANTORDIGITS 1") throw ValueError(path + ": missing CANTORDIGITS 1 header");
  std::vector<Digit> digits;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ValueError(path + ":" + std::to_string(lineno) + ": expected n<TAB>value");
    const BigInt pos = parse_bigint(line.substr(0, tab));
    if (pos != BigInt(digits.size() + 1))
      throw ValueError(path + ":" + std::to_string(lineno) + ": positions must increase by one without gaps");
    const std::string value = line.substr(tab + 1);
    if (!value.empty() && value[0] == '*') {
      const BigInt seed = parse_bigint(value.substr(1));
      digits.emplace_back(HugeMarker{to_u64(seed), digits.size() + 1});
    } else {
      BigInt v = parse_bigint(value);
      if (v < 0) throw ValueError(path + ":" + std::to_string(lineno) + ": negative digit");
      digits.emplace_back(std::move(v));
    }
  }
  return digits;
}

}  // namespace cantor
