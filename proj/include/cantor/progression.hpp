#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace cantor {

/// Positions m t + r (t >= 0) that are >= 1, or an explicit increasing index list.
class ProgressionIndex {
 public:
  ProgressionIndex() = default;
  ProgressionIndex(std::uint64_t m, std::uint64_t r);
  static ProgressionIndex identity() { return {1, 0}; }
  static ProgressionIndex explicit_list(std::vector<std::uint64_t> positions);

  std::uint64_t first() const { return at(1); }
  /// The t-th position, t >= 1.
  std::uint64_t at(std::uint64_t t) const;
  /// Number of positions <= n.
  std::uint64_t count_le(std::uint64_t n) const;
  bool contains(std::uint64_t n) const;
  bool is_explicit() const { return list_ != nullptr; }
  std::optional<std::uint64_t> size() const;

  std::uint64_t modulus() const { return m_; }
  std::uint64_t residue() const { return r_; }

 private:
  std::uint64_t m_ = 1;
  std::uint64_t r_ = 0;
  std::shared_ptr<const std::vector<std::uint64_t>> list_;
};

}  // namespace cantor
