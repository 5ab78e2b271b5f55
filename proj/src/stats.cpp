#include "cantor/stats.hpp"

#include <algorithm>
#include <cmath>

#include "cantor/errors.hpp"

namespace cantor {

std::string block_label(const Block& b) {
  std::string s;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (i) s += "-";
    s += std::to_string(b[i]);
  }
  return s;
}

Block parse_block(std::string_view text) {
  Block b;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find_first_of("-,", start), text.size());
    const BigInt v = parse_bigint(text.substr(start, end - start));
    if (!fits_u64(v) || v == BigInt(kLargeSymbol)) throw ValueError("block digit too large");
    b.push_back(to_u64(v));
    start = end + 1;
  }
  if (b.empty()) throw ValueError("empty block");
  return b;
}

std::vector<Block> all_blocks(std::uint64_t k, std::uint64_t max_digit) {
  if (k == 0) throw ValueError("block length must be positive");
  std::vector<Block> out;
  Block b(k, 0);
  while (true) {
    out.push_back(b);
    std::size_t i = k;
    while (i > 0) {
      if (b[i - 1] < max_digit) {
        ++b[i - 1];
        break;
      }
      b[i - 1] = 0;
      --i;
    }
    if (i == 0) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Divergence sums

ProductSumStream::ProductSumStream(BasicSequence q, std::uint64_t k, ProgressionIndex starts, std::uint64_t stride)
    : q_(std::move(q)), k_(k), stride_(stride), starts_(std::move(starts)) {
  if (k == 0) throw ValueError("window length must be positive");
  if (stride == 0) throw ValueError("stride must be positive");
}

void ProductSumStream::advance_to(std::uint64_t n) {
  while (true) {
    if (starts_.size() && next_index_ > *starts_.size()) break;
    const std::uint64_t i = starts_.at(next_index_);
    if (i > n) break;
    BigInt mant = 1;
    std::uint64_t shift = 0;
    for (std::uint64_t j = 0; j < k_; ++j) {
      const QValue& v = q_.at(i + j * stride_);
      mant *= v.mantissa;
      shift += v.shift;
    }
    sum_ += HighPrecReal::reciprocal(mant, shift);
    ++next_index_;
  }
  position_ = std::max(position_, n);
}

HighPrecReal qnk(const BasicSequence& q, std::uint64_t k, std::uint64_t n) {
  ProductSumStream s(q, k);
  s.advance_to(n);
  return s.value();
}

HighPrecReal qnmr(const BasicSequence& q, std::uint64_t m, std::uint64_t r, std::uint64_t n) {
  ProductSumStream s(q, m, ProgressionIndex(m, r), 1);
  s.advance_to(n);
  return s.value();
}

HighPrecReal ap2_sum(const BasicSequence& q, std::uint64_t k, std::uint64_t m, std::uint64_t r, std::uint64_t n) {
  ProductSumStream s(q, k, ProgressionIndex(m, r), m);
  s.advance_to(n);
  return s.value();
}

Rational product_sum_exact(const BasicSequence& q, std::uint64_t k, const ProgressionIndex& starts,
                           std::uint64_t stride, std::uint64_t n) {
  Rational sum = 0;
  for (std::uint64_t t = 1;; ++t) {
    if (starts.size() && t > *starts.size()) break;
    const std::uint64_t i = starts.at(t);
    if (i > n) break;
    BigInt prod = 1;
    for (std::uint64_t j = 0; j < k; ++j) prod *= q.value(i + j * stride);
    sum += Rational(BigInt(1), prod);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Block counting

BlockCounter::BlockCounter(std::vector<Block> blocks, std::vector<ProgressionIndex> progressions)
    : blocks_(std::move(blocks)), progressions_(std::move(progressions)) {
  if (blocks_.empty()) throw ValueError("no blocks to track");
  std::uint64_t max_digit = 0;
  for (const auto& b : blocks_) {
    if (b.empty()) throw ValueError("blocks must be nonempty");
    for (auto d : b) {
      if (d == kLargeSymbol) throw ValueError("block digit too large");
      max_digit = std::max(max_digit, d);
    }
    max_len_ = std::max<std::uint64_t>(max_len_, b.size());
  }
  radix_ = max_digit + 1;
  // Keys are base-radix encodings; they must fit in 64 bits.
  long double capacity = std::pow(static_cast<long double>(radix_), static_cast<long double>(max_len_));
  if (capacity >= 1.8e19L) throw ValueError("tracked blocks too long for the counter key");
  for (const auto& b : blocks_) {
    if (std::find(lengths_.begin(), lengths_.end(), b.size()) == lengths_.end()) lengths_.push_back(b.size());
  }
  std::sort(lengths_.begin(), lengths_.end());
  by_length_.resize(lengths_.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    std::uint64_t key = 0;
    for (auto d : blocks_[i]) key = key * radix_ + d;
    const auto li = std::lower_bound(lengths_.begin(), lengths_.end(), blocks_[i].size()) - lengths_.begin();
    by_length_[li][key].push_back(i);
  }
  ring_.assign(max_len_, kLargeSymbol);
  counts_.assign(blocks_.size(), 0);
  along_.assign(progressions_.size(), std::vector<std::uint64_t>(blocks_.size(), 0));
}

void BlockCounter::push(std::uint64_t symbol) {
  ++position_;
  ring_[position_ % max_len_] = symbol;
  for (std::size_t li = 0; li < lengths_.size(); ++li) {
    const std::uint64_t len = lengths_[li];
    if (len > position_) break;
    const std::uint64_t start = position_ - len + 1;
    std::uint64_t key = 0;
    bool valid = true;
    for (std::uint64_t p = start; p <= position_; ++p) {
      const std::uint64_t s = ring_[p % max_len_];
      if (s >= radix_) {
        valid = false;
        break;
      }
      key = key * radix_ + s;
    }
    if (!valid) continue;
    auto it = by_length_[li].find(key);
    if (it == by_length_[li].end()) continue;
    for (std::size_t bi : it->second) {
      ++counts_[bi];
      for (std::size_t pi = 0; pi < progressions_.size(); ++pi) {
        if (progressions_[pi].contains(start)) ++along_[pi][bi];
      }
    }
  }
}

void BlockCounter::feed(const DigitStream& x, std::uint64_t n) {
  for (std::uint64_t j = position_ + 1; j <= n; ++j) push(x.symbol(j));
}

std::vector<std::uint64_t> count_blocks(const DigitStream& x, const std::vector<Block>& blocks, std::uint64_t n) {
  BlockCounter c(blocks);
  c.feed(x, n);
  std::vector<std::uint64_t> out(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) out[i] = c.count(i);
  return out;
}

std::vector<std::uint64_t> count_blocks_along(const DigitStream& x, const ProgressionIndex& m,
                                              const std::vector<Block>& blocks, std::uint64_t n) {
  BlockCounter c(blocks, {m});
  c.feed(x, n);
  std::vector<std::uint64_t> out(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) out[i] = c.count_along(0, i);
  return out;
}

// ---------------------------------------------------------------------------
// Ratio curves

namespace {

double relative_ratio_err(double count, const HighPrecReal& expected) {
  const double e = expected.to_double();
  const double de = expected.err_double();
  if (e - de <= 0) return INFINITY;
  // |c/e' - c/e| <= c de / (e (e - de))
  return count * de / (e * (e - de));
}

void fill_ratio(ReportRow& row, const HighPrecReal& expected) {
  row.expected = expected.to_double();
  if (expected.excludes_zero()) {
    row.ratio = row.count / row.expected;
    row.err_bound = relative_ratio_err(row.count, expected);
  } else {
    row.ratio.reset();
    row.err_bound = expected.err_double();
  }
}

void finish_curve(NormalityCurve& curve) {
  if (curve.rows.empty()) return;
  const std::uint64_t last = curve.rows.back().checkpoint;
  bool first = true;
  for (const auto& row : curve.rows) {
    if (row.checkpoint != last || !row.ratio) continue;
    if (first) {
      curve.min_ratio = curve.max_ratio = *row.ratio;
      first = false;
    } else {
      curve.min_ratio = std::min(curve.min_ratio, *row.ratio);
      curve.max_ratio = std::max(curve.max_ratio, *row.ratio);
    }
  }
}

std::vector<std::uint64_t> sorted_checkpoints(std::vector<std::uint64_t> cps) {
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  if (!cps.empty() && cps.front() == 0) throw ValueError("checkpoints must be positive");
  return cps;
}

}  // namespace

NormalityCurve normality_ratio_curve(const DigitStream& x, std::uint64_t k, const std::vector<Block>& blocks,
                                     const std::vector<std::uint64_t>& checkpoints) {
  for (const auto& b : blocks) {
    if (b.size() != k) throw ValueError("tracked block length differs from k");
  }
  NormalityCurve curve;
  BlockCounter counter(blocks);
  ProductSumStream expected(x.base(), k);
  for (std::uint64_t cp : sorted_checkpoints(checkpoints)) {
    counter.feed(x, cp);
    expected.advance_to(cp);
    if (!expected.value().excludes_zero()) curve.skipped_checkpoints.push_back(cp);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      ReportRow row;
      row.checkpoint = cp;
      row.kind = "N";
      row.k = k;
      row.block = block_label(blocks[i]);
      row.count = static_cast<double>(counter.count(i));
      fill_ratio(row, expected.value());
      curve.rows.push_back(row);
    }
  }
  finish_curve(curve);
  return curve;
}

NormalityCurve ap_ratio_curves(const DigitStream& x, std::uint64_t m, std::uint64_t r,
                               const std::vector<std::uint64_t>& orders, std::uint64_t max_digit,
                               const std::vector<std::uint64_t>& checkpoints) {
  const ProgressionIndex prog(m, r);
  const auto cps = sorted_checkpoints(checkpoints);
  NormalityCurve curve;

  // Type I: blocks of length m read contiguously from progression positions.
  {
    const auto blocks = all_blocks(m, max_digit);
    BlockCounter counter(blocks, {prog});
    ProductSumStream expected(x.base(), m, prog, 1);
    for (std::uint64_t cp : cps) {
      counter.feed(x, cp);
      expected.advance_to(cp);
      if (!expected.value().excludes_zero()) curve.skipped_checkpoints.push_back(cp);
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        ReportRow row;
        row.checkpoint = cp;
        row.kind = "API";
        row.k = m;
        row.m = m;
        row.r = r;
        row.block = block_label(blocks[i]);
        row.count = static_cast<double>(counter.count_along(0, i));
        fill_ratio(row, expected.value());
        curve.rows.push_back(row);
      }
    }
  }

  // Type II: re-expand the extracted digits against the extracted base.
  const DigitStream ups = upsilon(x, prog);
  for (std::uint64_t k : orders) {
    const auto blocks = all_blocks(k, max_digit);
    BlockCounter counter(blocks);
    ProductSumStream expected(ups.base(), k);
    for (std::uint64_t cp : cps) {
      counter.feed(ups, cp);
      expected.advance_to(cp);
      if (!expected.value().excludes_zero()) curve.skipped_checkpoints.push_back(cp);
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        ReportRow row;
        row.checkpoint = cp;
        row.kind = "APII";
        row.k = k;
        row.m = m;
        row.r = r;
        row.block = block_label(blocks[i]);
        row.count = static_cast<double>(counter.count(i));
        fill_ratio(row, expected.value());
        curve.rows.push_back(row);
      }
    }
  }
  finish_curve(curve);
  return curve;
}

std::vector<ReportRow> ratio_normality_rows(const DigitStream& x, const std::vector<Block>& blocks,
                                            const std::vector<std::uint64_t>& checkpoints) {
  std::vector<ReportRow> rows;
  BlockCounter counter(blocks);
  for (std::uint64_t cp : sorted_checkpoints(checkpoints)) {
    counter.feed(x, cp);
    for (std::size_t a = 0; a < blocks.size(); ++a) {
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (a == b || blocks[a].size() != blocks[b].size()) continue;
        ReportRow row;
        row.checkpoint = cp;
        row.kind = "RN";
        row.k = blocks[a].size();
        row.block = block_label(blocks[a]) + "|" + block_label(blocks[b]);
        row.count = static_cast<double>(counter.count(a));
        row.expected = static_cast<double>(counter.count(b));
        if (counter.count(b) > 0) row.ratio = row.count / row.expected;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Discrepancy and distribution functions

double star_discrepancy(std::vector<double> points) {
  if (points.empty()) throw ValueError("star discrepancy of an empty set");
  std::sort(points.begin(), points.end());
  const double n = static_cast<double>(points.size());
  double d = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double hi = static_cast<double>(i + 1) / n - points[i];
    const double lo = points[i] - static_cast<double>(i) / n;
    d = std::max({d, hi, lo});
  }
  return d;
}

Rational star_discrepancy_exact(std::vector<Rational> points) {
  if (points.empty()) throw ValueError("star discrepancy of an empty set");
  std::sort(points.begin(), points.end());
  const Rational n(static_cast<unsigned long>(points.size()));
  Rational d = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Rational hi = Rational(static_cast<unsigned long>(i + 1)) / n - points[i];
    const Rational lo = points[i] - Rational(static_cast<unsigned long>(i)) / n;
    if (hi > d) d = hi;
    if (lo > d) d = lo;
  }
  return d;
}

std::vector<double> van_der_corput(std::uint64_t count, std::uint64_t base) {
  if (base < 2) throw ValueError("van der Corput base must be >= 2");
  std::vector<double> out;
  out.reserve(count);
  for (std::uint64_t i = 1; i <= count; ++i) {
    double v = 0, f = 1.0 / static_cast<double>(base);
    for (std::uint64_t n = i; n > 0; n /= base, f /= static_cast<double>(base)) v += f * static_cast<double>(n % base);
    out.push_back(v);
  }
  return out;
}

DistributionReport distribution_function_report(const std::vector<double>& values,
                                                const std::vector<std::uint64_t>& checkpoints,
                                                const std::vector<double>& grid) {
  for (double g : grid) {
    if (g < 0 || g > 1) throw ValueError("grid points must lie in [0, 1]");
  }
  DistributionReport rep;
  rep.checkpoints = sorted_checkpoints(checkpoints);
  rep.grid = grid;
  std::sort(rep.grid.begin(), rep.grid.end());
  std::vector<double> prefix;
  for (std::uint64_t cp : rep.checkpoints) {
    if (cp > values.size()) throw RangeError("checkpoint beyond the supplied values");
    prefix.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(cp));
    std::sort(prefix.begin(), prefix.end());
    std::vector<double> row;
    double sup = 0;
    for (double g : rep.grid) {
      const auto below = std::lower_bound(prefix.begin(), prefix.end(), g) - prefix.begin();
      const double f = static_cast<double>(below) / static_cast<double>(cp);
      row.push_back(f);
      sup = std::max(sup, std::abs(f - g));
    }
    rep.cdf.push_back(std::move(row));
    rep.sup_distance.push_back(sup);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Orbit density

std::uint64_t dxn_lookahead(double delta) {
  if (!(delta > 0 && delta < 0.5)) throw ValueError("delta must lie in (0, 1/2)");
  return static_cast<std::uint64_t>(std::ceil(std::log2(1.0 / delta))) + 4;
}

namespace {

double log2_of(const BigInt& v) {
  long exp = 0;
  const double d = mpz_get_d_2exp(&exp, v.backend().data());
  return std::log2(d) + static_cast<double>(exp);
}

// E_n / q_n as a double; markers use their uniform fraction.
double digit_fraction(const DigitStream& y, std::uint64_t n) {
  const QValue& q = y.base().at(n);
  const Digit d = y.digit(n);
  if (const auto* v = std::get_if<BigInt>(&d)) {
    if (v->is_zero()) return 0.0;
    if (q.bit_length() > 1000) return std::exp2(log2_of(*v) - q.log2());
    const Rational f(*v, q.to_bigint());
    return f.convert_to<double>();
  }
  // marker digit = floor(U * q / 2^128); its fraction is within 1/q of U / 2^128
  const BigInt u = marker_value(std::get<HugeMarker>(d), QValue(BigInt(1), 128));
  return std::ldexp(u.convert_to<double>(), -128);
}

}  // namespace

double tqn_approx(const DigitStream& y, std::uint64_t n, std::uint64_t lookahead) {
  if (y.length() && n + lookahead > *y.length())
    throw PrecisionError("digit stream ends before position " + std::to_string(n + lookahead));
  // Horner from the innermost digit: v = (E + v) / q.
  double v = 0;
  for (std::uint64_t j = n + lookahead; j > n; --j) {
    v = digit_fraction(y, j) + v * std::exp2(-y.base().at(j).log2());
  }
  return v - std::floor(v);
}

DxnReport dxn_density_report(const DigitStream& y, const std::function<double(std::uint64_t)>& xs, double delta,
                             const std::vector<std::uint64_t>& checkpoints, std::uint64_t start) {
  DxnReport rep;
  rep.delta = delta;
  rep.start = start;
  rep.checkpoints = sorted_checkpoints(checkpoints);
  const std::uint64_t look = dxn_lookahead(delta);
  std::uint64_t exceed = 0;
  std::uint64_t n = start;
  for (std::uint64_t cp : rep.checkpoints) {
    for (; n <= cp; ++n) {
      const double t = tqn_approx(y, n, look);
      // Both values are representatives in [0, 1); the difference is not wrapped.
      const double d = std::abs(t - xs(n));
      if (d > delta) ++exceed;
    }
    rep.exceedances.push_back(exceed);
    const double span = cp >= start ? static_cast<double>(cp - start + 1) : 1.0;
    rep.density.push_back(static_cast<double>(exceed) / span);
  }
  return rep;
}

}  // namespace cantor
