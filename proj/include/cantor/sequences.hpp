#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cantor/numeric.hpp"
#include "cantor/sset.hpp"

namespace cantor {

/// Parsed form of the sequence mini-language.
struct SequenceSpec {
  enum class Kind { Const, Pow, Log, Blocks, File, Xi };

  Kind kind = Kind::Const;
  BigInt value{2};                                // Const
  Rational exponent{0}, scale{0};                 // Pow: floor(scale * n^exponent) + 2
  std::vector<std::pair<BigInt, BigInt>> blocks;  // Blocks: (value, count)
  bool terminated = false;                        // Blocks followed by '!'
  std::string path;                               // File
  std::shared_ptr<const SequenceSpec> inner;      // Xi
  std::uint64_t t = 1;
  Rational eps{0};
  SSet sset;

  bool operator==(const SequenceSpec& other) const;
};

SequenceSpec parse_sequence_spec(std::string_view text);
std::string print(const SequenceSpec& spec);

/// A lazily evaluated, memoized basic sequence (q_n)_{n >= 1}, q_n >= 2.
class BasicSequence {
 public:
  using Generator = std::function<QValue(std::uint64_t)>;

  struct Meta {
    bool nondecreasing = false;
    bool infinite_in_limit = false;
    bool fully_divergent = false;
    std::optional<std::uint64_t> length;  // finite sequences only
  };

  BasicSequence(Generator gen, Meta meta, std::string label);

  static BasicSequence from_spec(const SequenceSpec& spec);
  static BasicSequence from_spec(std::string_view text) { return from_spec(parse_sequence_spec(text)); }
  static BasicSequence constant(std::uint64_t value);
  static BasicSequence from_values(std::vector<BigInt> values, bool repeat_last = true);

  /// q_n with n >= 1; thread-safe, memoized.
  const QValue& at(std::uint64_t n) const;
  BigInt value(std::uint64_t n) const { return at(n).to_bigint(); }
  /// q_n without storing it; used by sparse probes such as threshold searches.
  QValue peek(std::uint64_t n) const;

  const Meta& meta() const;
  const std::string& label() const;
  const std::optional<SequenceSpec>& spec() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

BigInt eval_sequence(const SequenceSpec& spec, std::uint64_t n);

/// q at an arbitrary big position for a block layout, without materializing blocks.
BigInt blocks_value_at(const std::vector<std::pair<BigInt, BigInt>>& blocks, const BigInt& position,
                       bool terminated);

struct PartialSumRow {
  std::uint64_t k;
  HighPrecReal value;
  std::string trend;  // "diverging" or "converging"
};

struct ClassificationReport {
  std::uint64_t horizon = 0;
  bool monotone = true;
  std::optional<std::uint64_t> first_decrease;
  std::vector<std::pair<std::uint64_t, QValue>> tail_minima;  // (window start, min over window to horizon)
  bool tail_minima_growing = false;
  std::vector<PartialSumRow> sums;
  std::string note = "finite-horizon evidence, not proof";
};

ClassificationReport classify(const BasicSequence& seq, std::uint64_t horizon, std::uint64_t max_k = 1);

}  // namespace cantor
