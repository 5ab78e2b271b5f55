#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cantor {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, std::string expected)
      : Error("syntax error at " + std::to_string(position) + ": expected " + expected),
        position_(position),
        expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

class ValueError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class OverflowPolicyError : public Error {
 public:
  using Error::Error;
};

class PrecisionError : public Error {
 public:
  using Error::Error;
};

class DegenerateChain : public Error {
 public:
  using Error::Error;
};

// Raised by the kappa search when no admissible window count exists below the cap.
class SearchExhausted : public Error {
 public:
  SearchExhausted(std::uint64_t stage, std::uint64_t cap)
      : Error("kappa search exhausted at stage " + std::to_string(stage) + " (cap " +
              std::to_string(cap) + ")"),
        stage_(stage),
        cap_(cap) {}

  std::uint64_t stage() const noexcept { return stage_; }
  std::uint64_t cap() const noexcept { return cap_; }

 private:
  std::uint64_t stage_;
  std::uint64_t cap_;
};

}  // namespace cantor
