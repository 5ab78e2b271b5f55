#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cantor/numeric.hpp"
#include "cantor/progression.hpp"
#include "cantor/sequences.hpp"

namespace cantor {

/// Symbol reported for digits that do not fit below this value; never matches a block.
inline constexpr std::uint64_t kLargeSymbol = std::numeric_limits<std::uint64_t>::max();

/// A digit uniform on [0, p) drawn lazily from (seed, position); used when p exceeds 64 bits.
struct HugeMarker {
  std::uint64_t seed = 0;
  std::uint64_t position = 0;
  bool operator==(const HugeMarker&) const = default;
};

using Digit = std::variant<BigInt, HugeMarker>;

/// Value of a marker digit for base p if it is below 2^64.
std::optional<std::uint64_t> marker_small_value(const HugeMarker& marker, const QValue& p);
BigInt marker_value(const HugeMarker& marker, const QValue& p);  // may throw OverflowPolicyError

/// Digits E_1, E_2, ... of an expansion with respect to a basic sequence.
class DigitStream {
 public:
  enum class Tail { None, Zeros, Max };

  struct Impl;

  /// Explicit finite digits. Tail::Zeros pads with zeros; Tail::Max is rejected.
  static DigitStream explicit_digits(std::vector<Digit> digits, BasicSequence base, Tail tail = Tail::None);
  static DigitStream explicit_digits(const std::vector<BigInt>& digits, BasicSequence base,
                                     Tail tail = Tail::None);
  /// Independent uniform digits on [0, q_n), deterministic in the seed.
  static DigitStream uniform(BasicSequence base, std::uint64_t seed);
  static DigitStream from_function(std::function<Digit(std::uint64_t)> fn, BasicSequence base,
                                   std::optional<std::uint64_t> length = std::nullopt);

  std::uint64_t symbol(std::uint64_t n) const;  // digit, or kLargeSymbol
  Digit digit(std::uint64_t n) const;
  BigInt value(std::uint64_t n) const;
  const BasicSequence& base() const;
  std::optional<std::uint64_t> length() const;

 private:
  explicit DigitStream(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
  friend DigitStream psi_map(const BasicSequence&, const BasicSequence&, const DigitStream&);
  friend DigitStream upsilon(const DigitStream&, const ProgressionIndex&);
};

std::vector<BigInt> digits_from_real(const Rational& x, const BasicSequence& q, std::uint64_t n);

/// Enclosure [lower, lower + width] of the real with the given leading digits.
struct RealEnclosure {
  Rational lower;
  Rational width;
  bool contains(const Rational& x) const { return lower <= x && x <= lower + width; }
};

RealEnclosure real_from_digits(const std::vector<BigInt>& digits, const BasicSequence& q);
HighPrecReal real_from_digits_approx(const std::vector<BigInt>& digits, const BasicSequence& q);

Rational tqn(const Rational& x, const BasicSequence& q, std::uint64_t n);

/// Digits min(E_n, q_n - 1) of psi_{P,Q}(x) for x given with respect to P.
DigitStream psi_map(const BasicSequence& p, const BasicSequence& q, const DigitStream& x);

/// The sequence (q_{m_t})_{t >= 1}.
BasicSequence subsequence_lambda(const BasicSequence& q, const ProgressionIndex& m);

/// The digits E_{m_1}, E_{m_2}, ... as a stream with respect to subsequence_lambda(Q, M).
DigitStream upsilon(const DigitStream& x, const ProgressionIndex& m);

void write_digit_file(const std::string& path, const DigitStream& x, std::uint64_t n);
std::vector<Digit> read_digit_file(const std::string& path);

}  // namespace cantor
