#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cantor/codec.hpp"
#include "cantor/numeric.hpp"
#include "cantor/progression.hpp"
#include "cantor/sequences.hpp"

namespace cantor {

using Block = std::vector<std::uint64_t>;

std::string block_label(const Block& b);  // "0-1-3"
Block parse_block(std::string_view text);
/// All blocks of length k over {0, ..., max_digit}, in lexicographic order.
std::vector<Block> all_blocks(std::uint64_t k, std::uint64_t max_digit);

/// Streaming sum over starts i of 1 / (q_i q_{i+d} ... q_{i+(k-1)d}).
class ProductSumStream {
 public:
  ProductSumStream(BasicSequence q, std::uint64_t k, ProgressionIndex starts = ProgressionIndex::identity(),
                   std::uint64_t stride = 1);

  /// Include every start position <= n.
  void advance_to(std::uint64_t n);
  const HighPrecReal& value() const { return sum_; }
  std::uint64_t position() const { return position_; }

 private:
  BasicSequence q_;
  std::uint64_t k_, stride_;
  ProgressionIndex starts_;
  std::uint64_t next_index_ = 1;  // next start index within starts_
  std::uint64_t position_ = 0;
  HighPrecReal sum_;
};

/// Q_n^{(k)}.
HighPrecReal qnk(const BasicSequence& q, std::uint64_t k, std::uint64_t n);
/// Q_n^{(m,r)}: windows of length m starting at m j + r >= 1, m j + r <= n.
HighPrecReal qnmr(const BasicSequence& q, std::uint64_t m, std::uint64_t r, std::uint64_t n);
/// Sum over i = r (mod m), 1 <= i <= n of 1 / (q_i q_{i+m} ... q_{i+(k-1)m}).
HighPrecReal ap2_sum(const BasicSequence& q, std::uint64_t k, std::uint64_t m, std::uint64_t r, std::uint64_t n);
/// Exact rational form of the same sums, for small instances.
Rational product_sum_exact(const BasicSequence& q, std::uint64_t k, const ProgressionIndex& starts,
                           std::uint64_t stride, std::uint64_t n);

/// Streaming occurrence counter; an occurrence is indexed by its start and counted
/// once it lies entirely inside the prefix read so far.
class BlockCounter {
 public:
  explicit BlockCounter(std::vector<Block> blocks, std::vector<ProgressionIndex> progressions = {});

  void push(std::uint64_t symbol);
  void feed(const DigitStream& x, std::uint64_t n);  // read positions position()+1 .. n

  std::uint64_t position() const { return position_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  std::uint64_t count(std::size_t block) const { return counts_[block]; }
  std::uint64_t count_along(std::size_t progression, std::size_t block) const {
    return along_[progression][block];
  }

 private:
  std::vector<Block> blocks_;
  std::vector<ProgressionIndex> progressions_;
  std::uint64_t max_len_ = 0;
  std::uint64_t radix_ = 1;
  std::vector<std::uint64_t> lengths_;
  std::vector<std::unordered_map<std::uint64_t, std::vector<std::size_t>>> by_length_;
  std::vector<std::uint64_t> ring_;
  std::uint64_t position_ = 0;
  std::vector<std::uint64_t> counts_;
  std::vector<std::vector<std::uint64_t>> along_;
};

std::vector<std::uint64_t> count_blocks(const DigitStream& x, const std::vector<Block>& blocks, std::uint64_t n);
std::vector<std::uint64_t> count_blocks_along(const DigitStream& x, const ProgressionIndex& m,
                                              const std::vector<Block>& blocks, std::uint64_t n);

/// One row of the CSV/JSON report schema.
struct ReportRow {
  std::uint64_t checkpoint = 0;
  std::string kind;  // N, API, APII, RN, DISC, DXN
  std::uint64_t k = 0, m = 1, r = 0;
  std::string block;
  double count = 0;
  double expected = 0;
  std::optional<double> ratio;  // absent when the denominator enclosure meets zero
  double err_bound = 0;
};

struct NormalityCurve {
  std::vector<ReportRow> rows;
  std::vector<std::uint64_t> skipped_checkpoints;
  double min_ratio = 0, max_ratio = 0;  // over rows at the last checkpoint
};

/// N_n(B, x) / Q_n^{(k)} for each tracked block of length k.
NormalityCurve normality_ratio_curve(const DigitStream& x, std::uint64_t k, const std::vector<Block>& blocks,
                                     const std::vector<std::uint64_t>& checkpoints);

/// Type I rows (kind API, blocks of length m against Q_n^{(m,r)}, checkpoints are positions) and
/// type II rows (kind APII, blocks of length k in Upsilon(x) against Lambda(Q)^{(k)}, checkpoints are
/// indices into the extracted sequence).
NormalityCurve ap_ratio_curves(const DigitStream& x, std::uint64_t m, std::uint64_t r,
                               const std::vector<std::uint64_t>& orders, std::uint64_t max_digit,
                               const std::vector<std::uint64_t>& checkpoints);

/// Ratio-normality rows N_n(B1)/N_n(B2) for all ordered pairs of tracked blocks of length k.
std::vector<ReportRow> ratio_normality_rows(const DigitStream& x, const std::vector<Block>& blocks,
                                            const std::vector<std::uint64_t>& checkpoints);

double star_discrepancy(std::vector<double> points);
Rational star_discrepancy_exact(std::vector<Rational> points);

std::vector<double> van_der_corput(std::uint64_t count, std::uint64_t base = 2);

struct DistributionReport {
  std::vector<std::uint64_t> checkpoints;
  std::vector<double> grid;
  std::vector<std::vector<double>> cdf;  // cdf[c][g] = #{n <= N_c : x_n < grid[g]} / N_c
  std::vector<double> sup_distance;      // max over grid of |cdf - identity|
};

DistributionReport distribution_function_report(const std::vector<double>& values,
                                                const std::vector<std::uint64_t>& checkpoints,
                                                const std::vector<double>& grid);

struct DxnReport {
  double delta = 0;
  std::uint64_t start = 1;
  std::vector<std::uint64_t> checkpoints;
  std::vector<std::uint64_t> exceedances;
  std::vector<double> density;
  std::string note = "finite-horizon evidence, not proof";
};

/// Number of digits read past position n to evaluate T_{Q,n}(y) within delta / 16.
std::uint64_t dxn_lookahead(double delta);
/// T_{Q,n}(y) from the next dxn_lookahead(delta) digits.
double tqn_approx(const DigitStream& y, std::uint64_t n, std::uint64_t lookahead);

/// Density over start <= n <= N of {|T_{Q,n}(y) - x_n| > delta}, both values taken in [0, 1).
DxnReport dxn_density_report(const DigitStream& y, const std::function<double(std::uint64_t)>& xs, double delta,
                             const std::vector<std::uint64_t>& checkpoints, std::uint64_t start = 1);

}  // namespace cantor
