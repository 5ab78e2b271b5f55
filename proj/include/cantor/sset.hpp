#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cantor {

/// A computable subset S of the positive integers.
class SSet {
 public:
  enum class Kind { Even, Odd, Primes, All, None, SquareIntervals, Finite, Mod };

  SSet() = default;
  explicit SSet(Kind kind) : kind_(kind) {}
  static SSet finite(std::vector<std::uint64_t> members);
  static SSet mod(std::uint64_t modulus, std::uint64_t residue);

  bool contains(std::uint64_t n) const;
  int indicator(std::uint64_t n) const { return contains(n) ? 1 : 0; }
  Kind kind() const { return kind_; }
  std::string label() const;  // printable in the S-set grammar

  bool operator==(const SSet&) const = default;

 private:
  Kind kind_ = Kind::All;
  std::vector<std::uint64_t> members_;  // sorted, unique
  std::uint64_t modulus_ = 1;
  std::uint64_t residue_ = 0;
};

SSet parse_sset(std::string_view text);

bool is_prime(std::uint64_t n);
std::uint64_t isqrt(std::uint64_t n);

struct DensityRow {
  std::uint64_t k;
  std::uint64_t count;
  double density;
};

/// For each k in S with k <= max_k, the density of {n <= horizon : n + k in S, n not in S}.
struct AlmostClosedReport {
  std::string set;
  std::uint64_t horizon;
  std::vector<DensityRow> rows;
  std::string note = "finite-horizon evidence, not proof";
};

AlmostClosedReport almost_closed_report(const SSet& s, std::uint64_t max_k, std::uint64_t horizon);

}  // namespace cantor
