#include "cantor/sequences.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "cantor/coeffs.hpp"
#include "cantor/errors.hpp"
#include "cantor/pipeline.hpp"
#include "cantor/stats.hpp"
#include "parse_util.hpp"

namespace cantor {

// ---------------------------------------------------------------------------
// Spec parsing and printing

bool SequenceSpec::operator==(const SequenceSpec& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Const: return value == o.value;
    case Kind::Pow: return exponent == o.exponent && scale == o.scale;
    case Kind::Log: return true;
    case Kind::Blocks: return blocks == o.blocks && terminated == o.terminated;
    case Kind::File: return path == o.path;
    case Kind::Xi:
      return t == o.t && eps == o.eps && sset == o.sset && inner && o.inner && *inner == *o.inner;
  }
  return false;
}

namespace {

using detail::Cursor;

SequenceSpec parse_spec_at(Cursor& cur, bool nested) {
  SequenceSpec spec;
  const std::size_t start = cur.pos();
  if (cur.accept("const:")) {
    spec.kind = SequenceSpec::Kind::Const;
    spec.value = cur.integer();
    if (spec.value < 2) throw ValueError("const: basic sequences need values >= 2");
  } else if (cur.accept("pow:")) {
    spec.kind = SequenceSpec::Kind::Pow;
    spec.exponent = cur.rational();
    cur.expect(":");
    const std::size_t at = cur.pos();
    spec.scale = cur.rational();
    if (spec.scale < 0) throw ValueError("pow: scale at " + std::to_string(at) + " must be nonnegative");
  } else if (cur.accept("log")) {
    spec.kind = SequenceSpec::Kind::Log;
  } else if (cur.accept("blocks:")) {
    spec.kind = SequenceSpec::Kind::Blocks;
    do {
      cur.expect("[");
      BigInt v = cur.integer();
      cur.expect("]");
      cur.expect("^");
      const std::size_t at = cur.pos();
      BigInt count = cur.integer();
      if (v < 2) throw ValueError("blocks: values must be >= 2");
      if (count < 1) throw SyntaxError(at, "block count >= 1");
      spec.blocks.emplace_back(std::move(v), std::move(count));
    } while (cur.accept(","));
    spec.terminated = cur.accept("!");
  } else if (cur.accept("file:")) {
    spec.kind = SequenceSpec::Kind::File;
    spec.path = nested ? cur.until(':') : std::string(cur.rest());
    if (!nested) cur.accept(cur.rest());
    if (spec.path.empty()) throw SyntaxError(cur.pos(), "PATH");
  } else if (cur.accept("xi:")) {
    spec.kind = SequenceSpec::Kind::Xi;
    spec.inner = std::make_shared<SequenceSpec>(parse_spec_at(cur, true));
    cur.expect(":");
    const std::size_t at = cur.pos();
    spec.t = cur.small_integer();
    if (spec.t < 1) throw SyntaxError(at, "t >= 1");
    cur.expect(":");
    const std::size_t eat = cur.pos();
    spec.eps = cur.rational();
    if (spec.eps <= 0) throw SyntaxError(eat, "eps > 0");
    cur.expect(":");
    spec.sset = detail::parse_sset_at(cur);
  } else {
    throw SyntaxError(start, "sequence spec (const:|pow:|log|blocks:|file:|xi:)");
  }
  return spec;
}

}  // namespace

SequenceSpec parse_sequence_spec(std::string_view text) {
  Cursor cur(text);
  SequenceSpec spec = parse_spec_at(cur, false);
  cur.expect_end();
  return spec;
}

std::string print(const SequenceSpec& spec) {
  switch (spec.kind) {
    case SequenceSpec::Kind::Const: return "const:" + spec.value.str();
    case SequenceSpec::Kind::Pow: return "pow:" + to_string(spec.exponent) + ":" + to_string(spec.scale);
    case SequenceSpec::Kind::Log: return "log";
    case SequenceSpec::Kind::Blocks: {
      std::string s = "blocks:";
      for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
        if (i) s += ",";
        s += "[" + spec.blocks[i].first.str() + "]^" + spec.blocks[i].second.str();
      }
      if (spec.terminated) s += "!";
      return s;
    }
    case SequenceSpec::Kind::File: return "file:" + spec.path;
    case SequenceSpec::Kind::Xi:
      return "xi:" + print(*spec.inner) + ":" + std::to_string(spec.t) + ":" + to_string(spec.eps) + ":" +
             spec.sset.label();
  }
  return "";
}

// ---------------------------------------------------------------------------
// Evaluation rules

namespace {

BigInt pow_value(const Rational& a, const Rational& b, std::uint64_t n) {
  if (b == 0) return 2;
  const BigInt p = boost::multiprecision::numerator(a);
  const BigInt q = boost::multiprecision::denominator(a);
  const BigInt u = boost::multiprecision::numerator(b);
  const BigInt v = boost::multiprecision::denominator(b);
  const auto qd = q.convert_to<unsigned long>();
  // floor(b n^a) = floor((b^q n^p)^(1/q)) = floor_root(floor(b^q n^p), q)
  const BigInt bq_num = boost::multiprecision::pow(u, qd);
  const BigInt bq_den = boost::multiprecision::pow(v, qd);
  const BigInt np = boost::multiprecision::pow(BigInt(n), abs(p).convert_to<unsigned>());
  const Rational x = p >= 0 ? Rational(bq_num * np, bq_den) : Rational(bq_num, bq_den * np);
  return floor_root(floor(x), qd) + 2;
}

BigInt log_value(std::uint64_t n) { return BigInt(msb(BigInt(n) + 2) + 2); }

std::vector<BigInt> read_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValueError("cannot open sequence file '" + path + "'");
  std::vector<BigInt> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    BigInt v;
    try {
      v = parse_bigint(line);
    } catch (const ValueError&) {
      throw ValueError(path + ":" + std::to_string(lineno) + ": malformed integer");
    }
    if (v < 2) throw ValueError(path + ":" + std::to_string(lineno) + ": value below 2");
    values.push_back(std::move(v));
  }
  if (values.empty()) throw ValueError("sequence file '" + path + "' is empty");
  return values;
}

}  // namespace

BigInt blocks_value_at(const std::vector<std::pair<BigInt, BigInt>>& blocks, const BigInt& position,
                       bool terminated) {
  if (position < 1) throw RangeError("positions start at 1");
  BigInt end = 0;
  for (const auto& [value, count] : blocks) {
    end += count;
    if (position <= end) return value;
  }
  if (terminated || blocks.empty()) throw RangeError("position beyond a terminated block sequence");
  return blocks.back().first;
}

// ---------------------------------------------------------------------------
// BasicSequence

namespace {

constexpr std::uint64_t kChunkBits = 12;
constexpr std::uint64_t kChunkSize = std::uint64_t{1} << kChunkBits;
using Chunk = std::array<std::optional<QValue>, kChunkSize>;

}  // namespace

struct BasicSequence::Impl {
  Generator gen;
  Meta meta;
  std::string label;
  std::optional<SequenceSpec> spec;
  mutable std::shared_mutex mutex;
  mutable std::unordered_map<std::uint64_t, std::unique_ptr<Chunk>> chunks;
};

BasicSequence::BasicSequence(Generator gen, Meta meta, std::string label) : impl_(std::make_shared<Impl>()) {
  impl_->gen = std::move(gen);
  impl_->meta = meta;
  impl_->label = std::move(label);
}

const QValue& BasicSequence::at(std::uint64_t n) const {
  if (n == 0) throw RangeError("positions start at 1");
  if (impl_->meta.length && n > *impl_->meta.length)
    throw RangeError("position " + std::to_string(n) + " beyond finite sequence '" + impl_->label + "'");
  const std::uint64_t ci = n >> kChunkBits;
  const std::uint64_t off = n & (kChunkSize - 1);
  {
    std::shared_lock lock(impl_->mutex);
    auto it = impl_->chunks.find(ci);
    if (it != impl_->chunks.end() && (*it->second)[off]) return *(*it->second)[off];
  }
  QValue v = impl_->gen(n);
  if (v < BigInt(2))
    throw ValueError("sequence '" + impl_->label + "' produced a value below 2 at position " + std::to_string(n));
  std::unique_lock lock(impl_->mutex);
  auto& chunk = impl_->chunks[ci];
  if (!chunk) chunk = std::make_unique<Chunk>();
  if (!(*chunk)[off]) (*chunk)[off] = std::move(v);
  return *(*chunk)[off];
}

QValue BasicSequence::peek(std::uint64_t n) const {
  if (n == 0) throw RangeError("positions start at 1");
  if (impl_->meta.length && n > *impl_->meta.length)
    throw RangeError("position " + std::to_string(n) + " beyond finite sequence '" + impl_->label + "'");
  {
    std::shared_lock lock(impl_->mutex);
    auto it = impl_->chunks.find(n >> kChunkBits);
    if (it != impl_->chunks.end() && (*it->second)[n & (kChunkSize - 1)]) return *(*it->second)[n & (kChunkSize - 1)];
  }
  return impl_->gen(n);
}

const BasicSequence::Meta& BasicSequence::meta() const { return impl_->meta; }
const std::string& BasicSequence::label() const { return impl_->label; }
const std::optional<SequenceSpec>& BasicSequence::spec() const { return impl_->spec; }

BasicSequence BasicSequence::constant(std::uint64_t value) {
  if (value < 2) throw ValueError("basic sequences need values >= 2");
  return from_spec("const:" + std::to_string(value));
}

BasicSequence BasicSequence::from_values(std::vector<BigInt> values, bool repeat_last) {
  if (values.empty()) throw ValueError("empty value list");
  for (const auto& v : values) {
    if (v < 2) throw ValueError("basic sequences need values >= 2");
  }
  Meta meta;
  meta.nondecreasing = std::is_sorted(values.begin(), values.end());
  if (!repeat_last) meta.length = values.size();
  auto shared = std::make_shared<const std::vector<BigInt>>(std::move(values));
  return BasicSequence(
      [shared](std::uint64_t n) {
        const auto i = std::min<std::uint64_t>(n, shared->size()) - 1;
        return QValue((*shared)[i]);
      },
      meta, "values");
}

BasicSequence BasicSequence::from_spec(const SequenceSpec& spec) {
  Meta meta;
  Generator gen;
  switch (spec.kind) {
    case SequenceSpec::Kind::Const: {
      const BigInt v = spec.value;
      gen = [v](std::uint64_t) { return QValue(v); };
      meta.nondecreasing = true;
      meta.fully_divergent = true;
      break;
    }
    case SequenceSpec::Kind::Pow: {
      const Rational a = spec.exponent, b = spec.scale;
      gen = [a, b](std::uint64_t n) { return QValue(pow_value(a, b, n)); };
      meta.nondecreasing = a >= 0;
      meta.infinite_in_limit = a > 0 && b > 0;
      meta.fully_divergent = a <= 0 || b == 0;
      break;
    }
    case SequenceSpec::Kind::Log:
      gen = [](std::uint64_t n) { return QValue(log_value(n)); };
      meta.nondecreasing = true;
      meta.infinite_in_limit = true;
      meta.fully_divergent = true;
      break;
    case SequenceSpec::Kind::Blocks: {
      auto blocks = std::make_shared<const std::vector<std::pair<BigInt, BigInt>>>(spec.blocks);
      // Precompute cumulative ends for binary search.
      auto ends = std::make_shared<std::vector<BigInt>>();
      BigInt acc = 0;
      for (const auto& b : *blocks) ends->push_back(acc += b.second);
      const bool terminated = spec.terminated;
      gen = [blocks, ends, terminated](std::uint64_t n) {
        const BigInt pos(n);
        auto it = std::lower_bound(ends->begin(), ends->end(), pos);
        if (it == ends->end()) {
          if (terminated) throw RangeError("position beyond a terminated block sequence");
          return QValue(blocks->back().first);
        }
        return QValue((*blocks)[static_cast<std::size_t>(it - ends->begin())].first);
      };
      meta.nondecreasing = std::is_sorted(blocks->begin(), blocks->end(),
                                          [](const auto& x, const auto& y) { return x.first < y.first; });
      if (spec.terminated && fits_u64(acc)) meta.length = to_u64(acc);
      break;
    }
    case SequenceSpec::Kind::File: {
      auto values = std::make_shared<const std::vector<BigInt>>(read_value_file(spec.path));
      gen = [values](std::uint64_t n) { return QValue((*values)[n - 1]); };
      meta.nondecreasing = std::is_sorted(values->begin(), values->end());
      meta.length = values->size();
      break;
    }
    case SequenceSpec::Kind::Xi: {
      const BasicSequence inner = from_spec(*spec.inner);
      const auto coeffs = std::make_shared<const WindowCoefficients>(coefficients(spec.t, spec.eps, spec.sset));
      gen = [inner, coeffs](std::uint64_t n) { return xi_transform(inner.at(n), n, *coeffs); };
      meta.infinite_in_limit = inner.meta().infinite_in_limit;
      meta.length = inner.meta().length;
      break;
    }
  }
  BasicSequence seq(std::move(gen), meta, print(spec));
  seq.impl_->spec = spec;
  return seq;
}

BigInt eval_sequence(const SequenceSpec& spec, std::uint64_t n) {
  return BasicSequence::from_spec(spec).value(n);
}

// ---------------------------------------------------------------------------
// Classification

ClassificationReport classify(const BasicSequence& seq, std::uint64_t horizon, std::uint64_t max_k) {
  if (horizon == 0) throw ValueError("horizon must be positive");
  ClassificationReport rep;
  rep.horizon = horizon;
  for (std::uint64_t n = 1; n < horizon; ++n) {
    if (seq.at(n + 1) < seq.at(n)) {
      rep.monotone = false;
      rep.first_decrease = n;
      break;
    }
  }

  // Minimum of q over [start, horizon] for geometrically spaced starts.
  std::vector<std::uint64_t> starts;
  for (std::uint64_t s = 1; s <= horizon; s *= 2) starts.push_back(s);
  std::optional<QValue> running;
  std::vector<std::pair<std::uint64_t, QValue>> minima;
  std::size_t idx = starts.size();
  for (std::uint64_t n = horizon; n >= 1; --n) {
    if (!running || seq.at(n) < *running) running = seq.at(n);
    while (idx > 0 && starts[idx - 1] == n) {
      minima.emplace_back(n, *running);
      --idx;
    }
  }
  std::reverse(minima.begin(), minima.end());
  rep.tail_minima = minima;
  rep.tail_minima_growing = minima.size() >= 2 && minima.back().second > minima.front().second;
  for (std::size_t i = 1; i < minima.size(); ++i) {
    if (minima[i].second < minima[i - 1].second) rep.tail_minima_growing = false;
  }

  // Divergence trend: compare increments over [h/4, h/2] and [h/2, h].
  for (std::uint64_t k = 1; k <= max_k; ++k) {
    ProductSumStream stream(seq, k);
    const std::uint64_t h4 = std::max<std::uint64_t>(1, horizon / 4);
    const std::uint64_t h2 = std::max<std::uint64_t>(1, horizon / 2);
    stream.advance_to(h4);
    const double s4 = stream.value().to_double();
    stream.advance_to(h2);
    const double s2 = stream.value().to_double();
    stream.advance_to(horizon);
    const double s1 = stream.value().to_double();
    const double d1 = s2 - s4;
    const double d2 = s1 - s2;
    const bool diverging = d1 > 0 ? d2 / d1 >= 0.9 : d2 > 0;
    rep.sums.push_back({k, stream.value(), diverging ? "diverging" : "converging"});
  }
  return rep;
}

}  // namespace cantor
