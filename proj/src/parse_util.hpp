#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "cantor/errors.hpp"
#include "cantor/numeric.hpp"
#include "cantor/sset.hpp"

namespace cantor::detail {

class Cursor {
 public:
  explicit Cursor(std::string_view text, std::size_t offset = 0) : text_(text), pos_(offset) {}

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  std::string_view rest() const { return text_.substr(pos_); }

  bool accept(std::string_view lit) {
    if (text_.substr(pos_, lit.size()) == lit) {
      pos_ += lit.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view lit) {
    if (!accept(lit)) throw SyntaxError(pos_, "'" + std::string(lit) + "'");
  }

  void expect_end() {
    if (!done()) throw SyntaxError(pos_, "end of input");
  }

  BigInt integer() {
    const std::size_t start = pos_;
    while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (start == pos_) throw SyntaxError(pos_, "INT");
    return parse_bigint(text_.substr(start, pos_ - start));
  }

  std::uint64_t small_integer() {
    const std::size_t start = pos_;
    const BigInt v = integer();
    if (!fits_u64(v)) throw SyntaxError(start, "INT below 2^64");
    return to_u64(v);
  }

  Rational rational() {
    const std::size_t start = pos_;
    bool neg = accept("-");
    if (done() || !std::isdigit(static_cast<unsigned char>(peek()))) throw SyntaxError(pos_, "RAT");
    BigInt num = integer();
    BigInt den = 1;
    if (accept("/")) {
      const std::size_t dpos = pos_;
      den = integer();
      if (den == 0) throw SyntaxError(dpos, "nonzero denominator");
    }
    (void)start;
    if (neg) num = -num;
    return Rational(num, den);
  }

  std::string until(char stop) {
    const std::size_t start = pos_;
    while (!done() && peek() != stop) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

 private:
  std::string_view text_;
  std::size_t pos_;
};

SSet parse_sset_at(Cursor& cur);

}  // namespace cantor::detail
