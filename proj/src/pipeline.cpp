#include "cantor/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include <mpfr.h>

#include "cantor/random.hpp"
#include "parse_util.hpp"

namespace cantor {

namespace {

constexpr std::uint64_t kPositionLimit = std::uint64_t{1} << 62;

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return a > kPositionLimit - std::min(b, kPositionLimit) ? kPositionLimit : a + b;
}

BigInt ceil_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if (q * b < a) ++q;
  return q;
}

BigInt ceil_rational(const Rational& x) {
  BigInt f = floor(x);
  if (Rational(f) < x) ++f;
  return f;
}

// First position in [lo, limit] where a false-then-true predicate holds.
template <class Pred>
std::optional<std::uint64_t> first_true(std::uint64_t lo, std::uint64_t limit, Pred pred) {
  if (lo > limit) return std::nullopt;
  if (pred(lo)) return lo;
  std::uint64_t bad = lo, step = 1, good = 0;
  for (;;) {
    const std::uint64_t probe = std::min(limit, sat_add(bad, step));
    if (pred(probe)) {
      good = probe;
      break;
    }
    if (probe >= limit) return std::nullopt;
    bad = probe;
    step = step > kPositionLimit / 2 ? kPositionLimit : step * 2;
  }
  while (good - bad > 1) {
    const std::uint64_t mid = bad + (good - bad) / 2;
    (pred(mid) ? good : bad) = mid;
  }
  return good;
}

// q_n^e < n; values above 2^64 fail immediately since n < 2^64.
bool power_below(const QValue& q, unsigned long e, std::uint64_t n) {
  if (q.bit_length() * e > 64 + e) return false;
  BigInt v = pow(q.to_bigint(), static_cast<unsigned>(e));
  return v < BigInt(n);
}

// Growth condition q_n < n^{1/e} for all n > N: returns the least such N.
struct GrowthBound {
  std::optional<std::uint64_t> last_failure;  // nullopt: never satisfied within the search range
  bool certified = true;
  std::string note;
};

Float pow_float(const Float& x, const Rational& a) {
  return boost::multiprecision::pow(x, to_float(a));
}

GrowthBound growth_bound(const BasicSequence& q, unsigned long e) {
  GrowthBound g;
  const auto& spec = q.spec();
  auto exact = [&](std::uint64_t n) { return power_below(q.peek(n), e, n); };
  const bool pow_spec = spec && spec->kind == SequenceSpec::Kind::Pow;
  const bool const_spec = spec && spec->kind == SequenceSpec::Kind::Const;
  if (const_spec || (pow_spec && (spec->exponent == 0 || spec->scale == 0))) {
    const BigInt c = const_spec ? spec->value : floor(spec->scale) + 2;
    const BigInt bound = pow(c, static_cast<unsigned>(e));
    if (bound >= BigInt(kPositionLimit)) return g;
    g.last_failure = to_u64(bound);
    g.note = "constant sequence: q^e >= n exactly for n <= q^e";
    return g;
  }
  if (pow_spec && spec->exponent > 0 && spec->exponent * e < 1) {
    // h(x) = x^{1/e} - b x^a - 2 is increasing for x >= x*, and h > 0 implies the condition.
    const Rational a = spec->exponent;
    const Rational b = spec->scale;
    const Rational gap = Rational(1, e) - a;
    const Float xstar = pow_float(to_float(a * b * e), Rational(1) / gap);
    auto h = [&](std::uint64_t x) {
      const Float fx(x);
      return pow_float(fx, Rational(1, e)) - to_float(b) * pow_float(fx, a) - 2;
    };
    std::uint64_t lo = 1;
    if (xstar > 1) {
      if (xstar > Float(kPositionLimit)) return g;
      lo = boost::multiprecision::ceil(xstar).convert_to<std::uint64_t>();
    }
    const auto cross = first_true(lo, kPositionLimit, [&](std::uint64_t x) { return h(x) > 0; });
    if (!cross) return g;
    constexpr std::uint64_t kExactScan = 20'000'000;
    if (*cross <= kExactScan) {
      std::uint64_t n = *cross;
      while (n >= 1 && exact(n)) --n;
      g.last_failure = n;
      g.note = "certified from the power growth rule with an exact scan below the crossing";
    } else {
      g.last_failure = *cross - 1;
      g.note = "certified sufficient bound from the power growth rule (not minimized below the crossing)";
    }
    return g;
  }
  if (pow_spec && spec->exponent * e >= 1 && spec->scale >= 1) {
    g.note = "power growth rule violates q_n < n^{1/e} everywhere";
    return g;
  }
  // No growth rule available: assume eventual monotonicity and spot-check beyond the crossing.
  g.certified = false;
  const auto cross = first_true(1, kPositionLimit, exact);
  if (!cross) return g;
  g.last_failure = *cross - 1;
  g.note = "spot-checked (no growth certificate for this sequence)";
  for (std::uint64_t n = *cross, s = 0; s < 40 && n < kPositionLimit / 2; ++s) {
    n = n * 2 + 1;
    if (!exact(n)) {
      g.note += "; spot check failed at n=" + std::to_string(n);
      break;
    }
  }
  return g;
}

std::uint64_t u64_or_limit(const BigInt& v) {
  return v >= BigInt(kPositionLimit) ? kPositionLimit : to_u64(v);
}

}  // namespace

QValue xi_transform(const QValue& q, std::uint64_t n, const WindowCoefficients& c) {
  const std::uint64_t t = c.t;
  const std::uint64_t r = ((n - 1) % (2 * t)) + 1;
  if (r > t) return QValue(q.mantissa, q.shift + n);
  const Rational& cr = c[r];
  BigInt v = q.to_bigint() * denominator(cr) / numerator(cr);
  if (v < 2) v = 2;
  return QValue(std::move(v));
}

std::uint64_t TRule::at(std::uint64_t i) const {
  if (i == 0) throw RangeError("stages start at 1");
  switch (kind) {
    case Kind::Factorial: {
      std::uint64_t f = 1;
      for (std::uint64_t m = 2; m <= i; ++m) {
        if (f > std::numeric_limits<std::uint64_t>::max() / m) throw RangeError("t_i = i! overflows at i=" + std::to_string(i));
        f *= m;
      }
      return f;
    }
    case Kind::Linear:
      if (a != 0 && i > std::numeric_limits<std::uint64_t>::max() / a) throw RangeError("t_i overflows");
      return a * i;
    case Kind::Constant:
      return a;
  }
  return 1;
}

std::string TRule::label() const {
  switch (kind) {
    case Kind::Factorial: return "fact";
    case Kind::Linear: return a == 1 ? "i" : std::to_string(a) + "i";
    case Kind::Constant: return "const:" + std::to_string(a);
  }
  return "?";
}

TRule parse_t_rule(std::string_view text) {
  detail::Cursor cur(text);
  TRule rule;
  if (cur.accept("fact")) {
    rule.kind = TRule::Kind::Factorial;
    rule.a = 1;
  } else if (cur.accept("const:")) {
    rule.kind = TRule::Kind::Constant;
    rule.a = cur.small_integer();
  } else if (cur.accept("i")) {
    rule.kind = TRule::Kind::Linear;
    rule.a = 1;
  } else {
    rule.kind = TRule::Kind::Linear;
    rule.a = cur.small_integer();
    cur.expect("i");
  }
  cur.expect_end();
  if (rule.a == 0) throw ValueError("t-rule must give t_i >= 1");
  return rule;
}

std::string to_string(ScheduleMode mode) { return mode == ScheduleMode::Paper ? "paper" : "toy"; }

ScheduleMode parse_schedule_mode(std::string_view text) {
  if (text == "paper") return ScheduleMode::Paper;
  if (text == "toy") return ScheduleMode::Toy;
  throw ValueError("mode must be paper or toy");
}

std::uint64_t ScheduleParams::t(std::uint64_t i) const {
  if (mode == ScheduleMode::Paper) return TRule{TRule::Kind::Factorial, 1}.at(i);
  return t_rule.at(i);
}

KappaResult find_kappa(const BasicSequence& q, const ScheduleParams& params, std::uint64_t i, const BigInt& k_prev) {
  if (!(params.eps > 0)) throw ValueError("eps must be positive");
  const std::uint64_t ti = params.t(i);
  const std::uint64_t tn = params.t(i + 1);
  const BigInt step = BigInt(2) * ti;
  KappaResult res;
  if (!q.meta().nondecreasing) res.note = "Q is not declared nondecreasing; threshold search assumes it; ";

  // (1) q_n >= (1 + eps) t_{i+1}^2 for all n > N, i.e. N >= first crossing - 1.
  const BigInt threshold = ceil_rational((1 + params.eps) * Rational(BigInt(tn) * tn));
  const std::uint64_t limit = u64_or_limit(k_prev + step * params.search_cap + 1);
  const auto n1 = first_true(1, limit, [&](std::uint64_t n) { return q.peek(n) >= threshold; });
  if (!n1) throw SearchExhausted(i, params.search_cap);
  res.threshold_position = *n1;
  BigInt lower = BigInt(*n1) - 1;

  // (3) q_n < n^{1/(i+1)} for all n > N: paper mode only.
  if (params.mode == ScheduleMode::Paper) {
    const GrowthBound g = growth_bound(q, i + 1);
    res.growth_certified = g.certified;
    res.note += g.note;
    if (!g.last_failure) throw SearchExhausted(i, params.search_cap);
    res.growth_position = *g.last_failure;
    lower = std::max(lower, BigInt(*g.last_failure));
  } else {
    res.growth_certified = q.meta().infinite_in_limit;
    res.note += q.meta().infinite_in_limit
                    ? "toy mode: growth condition replaced by the declared infinite-in-limit flag"
                    : "toy mode: Q is not declared infinite in limit";
  }

  // (4) N^{i+1} > i^{i+1} * 2 t_{i+1}.
  const BigInt rhs = pow(BigInt(i), static_cast<unsigned>(i + 1)) * 2 * tn;
  lower = std::max(lower, floor_root(rhs, i + 1) + 1);

  BigInt j_min = lower > k_prev ? ceil_div(lower - k_prev, step) : BigInt(0);
  if (j_min < 1) j_min = 1;

  // (2) 2 t_{i+1} | K_{i-1} + 2 t_i j.
  const BigInt mod = BigInt(2) * tn;
  BigInt rhs_mod = (mod - k_prev % mod) % mod;
  const BigInt g = gcd(step, mod);
  BigInt j = j_min;
  if (rhs_mod % g != 0) {
    res.note += "; divisibility unsolvable for this K, relaxed";
    if (params.mode == ScheduleMode::Paper) throw SearchExhausted(i, params.search_cap);
  } else {
    const BigInt period = mod / g;
    BigInt j0 = 0;
    if (period > 1) {
      BigInt inv;
      const BigInt a = (step / g) % period;
      mpz_invert(inv.backend().data(), a.backend().data(), period.backend().data());
      j0 = (rhs_mod / g) % period * inv % period;
    }
    BigInt rem = (j0 - j_min % period + period) % period;
    j = j_min + rem;
  }
  if (j > params.search_cap) throw SearchExhausted(i, params.search_cap);
  res.kappa = j;
  return res;
}

BigInt ScheduleState::defined_limit() const {
  if (next_K) return *next_K;
  const std::uint64_t i = kappa.size() + 1;
  return std::max<BigInt>(BigInt(horizon), K.back() + BigInt(2) * t(i) * params.search_cap);
}

std::uint64_t ScheduleState::stage_of(std::uint64_t n) const {
  if (n == 0) throw RangeError("positions start at 1");
  const BigInt bn(n);
  auto it = std::lower_bound(K.begin() + 1, K.end(), bn);
  if (it != K.end()) return static_cast<std::uint64_t>(it - K.begin());
  if (bn > defined_limit()) throw RangeError("position " + std::to_string(n) + " beyond the built schedule");
  return K.size();
}

std::uint64_t ScheduleState::window_of(std::uint64_t n) const {
  const std::uint64_t i = stage_of(n);
  const BigInt off = BigInt(n) - stage_start(i) - 1;
  return to_u64(off / (BigInt(2) * t(i)));
}

const BigInt& ScheduleState::stage_start(std::uint64_t i) const {
  if (i == 0 || i > K.size()) throw RangeError("stage " + std::to_string(i) + " has no start");
  return K[i - 1];
}

std::optional<BigInt> ScheduleState::stage_windows(std::uint64_t i) const {
  if (i >= 1 && i <= kappa.size()) return kappa[i - 1];
  if (i == kappa.size() + 1) return next_kappa;
  return std::nullopt;
}

ScheduleState build_schedule(const BasicSequence& q, const ScheduleParams& params, std::uint64_t horizon) {
  ScheduleState st;
  st.params = params;
  st.q_label = q.label();
  st.horizon = horizon;
  if (!q.meta().nondecreasing) st.warnings.push_back("Q is not declared nondecreasing");
  if (!q.meta().infinite_in_limit) st.warnings.push_back("Q is not declared infinite in limit");
  if (params.mode == ScheduleMode::Toy)
    st.warnings.push_back("toy mode: growth condition replaced by the declared infinite-in-limit flag");
  for (std::uint64_t i = 1;; ++i) {
    const BigInt& prev = st.K.back();
    if (prev >= horizon) break;
    const std::uint64_t ti = params.t(i);
    if (prev % (2 * ti) != 0)
      st.warnings.push_back("stage " + std::to_string(i) + " start is not a multiple of 2 t_i");
    KappaResult kr;
    try {
      kr = find_kappa(q, params, i, prev);
    } catch (const SearchExhausted& e) {
      if (prev + BigInt(2) * ti * params.search_cap >= horizon) {
        st.warnings.push_back("stage " + std::to_string(i) + " unresolved: no admissible window count below the cap");
        break;
      }
      throw ScheduleExhausted(e, st);
    }
    if (params.mode == ScheduleMode::Paper ? !kr.growth_certified : !q.meta().infinite_in_limit)
      st.warnings.push_back("stage " + std::to_string(i) + ": " + kr.note);
    const std::uint64_t tn = params.t(i + 1);
    const BigInt k_new = std::max<BigInt>(prev + BigInt(2) * ti * kr.kappa, BigInt(tn) * tn);
    if (k_new <= horizon) {
      st.K.push_back(k_new);
      st.kappa.push_back(kr.kappa);
    } else {
      st.next_kappa = kr.kappa;
      st.next_K = k_new;
      break;
    }
  }
  return st;
}

BasicSequence derive_p(const BasicSequence& q, const ScheduleState& state) {
  auto coeffs = std::make_shared<std::vector<WindowCoefficients>>();
  const std::uint64_t stages = state.K.size();
  for (std::uint64_t i = 1; i <= stages; ++i) coeffs->push_back(coefficients(state.t(i), state.params.eps, state.params.s));
  auto st = std::make_shared<const ScheduleState>(state);
  BasicSequence::Meta meta;
  meta.infinite_in_limit = q.meta().infinite_in_limit;
  meta.fully_divergent = q.meta().fully_divergent;
  return BasicSequence(
      [q, coeffs, st](std::uint64_t n) {
        const std::uint64_t i = st->stage_of(n);
        return xi_transform(q.at(n), n, (*coeffs)[i - 1]);
      },
      meta, "derived(" + q.label() + ")");
}

DigitStream generate_normal_digits(const BasicSequence& p, std::uint64_t seed) { return DigitStream::uniform(p, seed); }

Construction construct_y(const BasicSequence& q, const ScheduleParams& params, std::uint64_t seed,
                         std::uint64_t horizon) {
  ScheduleState st = build_schedule(q, params, horizon);
  BasicSequence p = derive_p(q, st);
  DigitStream x = generate_normal_digits(p, seed);
  DigitStream y = psi_map(p, q, x);
  return Construction{std::move(st), std::move(p), std::move(x), std::move(y)};
}

namespace {

HighPrecReal window_sum_of(const BasicSequence& seq, std::uint64_t first, std::uint64_t count, std::uint64_t k) {
  HighPrecReal sum;
  for (std::uint64_t v = 0; v < count; ++v) {
    BigInt mant(1);
    std::uint64_t shift = 0;
    for (std::uint64_t u = 0; u < k; ++u) {
      const QValue& x = seq.at(first + v + u);
      mant *= x.mantissa;
      shift += x.shift;
    }
    sum += HighPrecReal::reciprocal(mant, shift);
  }
  return sum;
}

}  // namespace

WindowReport window_ratio_report(const BasicSequence& p, const BasicSequence& q, const ScheduleState& state,
                                 const std::vector<std::uint64_t>& ks, std::uint64_t horizon,
                                 std::uint64_t min_first) {
  if (ks.empty()) throw ValueError("no window orders requested");
  const std::uint64_t kmax = *std::max_element(ks.begin(), ks.end());
  if (*std::min_element(ks.begin(), ks.end()) == 0) throw ValueError("window orders start at 1");
  WindowReport rep;
  for (std::uint64_t i = 1; i <= state.K.size(); ++i) {
    const BigInt& start_big = state.stage_start(i);
    if (start_big >= horizon) break;
    const std::uint64_t start = to_u64(start_big);
    const std::uint64_t t = state.t(i);
    const auto windows = state.stage_windows(i);
    const WindowCoefficients c = coefficients(t, state.params.eps, state.params.s);
    std::vector<std::optional<double>> predictions;
    for (std::uint64_t k : ks) {
      if (k <= t) {
        predictions.push_back((Rational(2 * t) / window_sum(c, k)).convert_to<double>());
      } else {
        predictions.emplace_back();
      }
    }
    std::uint64_t j = 0;
    if (min_first > start + 1) j = (min_first - start - 1 + 2 * t - 1) / (2 * t);
    for (;; ++j) {
      if (windows && BigInt(j) >= *windows) break;
      const std::uint64_t first = start + 2 * t * j + 1;
      const std::uint64_t last_ext = first + 2 * t - 1 + kmax - 1;
      if (last_ext > horizon) break;
      WindowRow row;
      row.i = i;
      row.t = t;
      row.j = j;
      row.first = first;
      row.alpha = q.at(first).to_bigint();
      std::uint64_t const_run = 0;  // positions from first with q equal to alpha
      while (first + const_run <= last_ext && q.at(first + const_run) == row.alpha) ++const_run;
      for (std::size_t idx = 0; idx < ks.size(); ++idx) {
        const std::uint64_t k = ks[idx];
        WindowTerm term;
        term.k = k;
        term.p_sum = window_sum_of(p, first, 2 * t, k);
        term.q_sum = window_sum_of(q, first, 2 * t, k);
        term.constant_q = const_run >= 2 * t + k - 1;
        if (term.p_sum.excludes_zero()) term.ratio = (term.q_sum / term.p_sum).to_double();
        term.prediction = predictions[idx];
        row.terms.push_back(std::move(term));
      }
      rep.last_position = last_ext;
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

AggregatedRatio aggregate_windows(const WindowReport& report, std::uint64_t k, std::uint64_t min_first) {
  AggregatedRatio agg;
  agg.k = k;
  for (const auto& row : report.rows) {
    if (row.first < min_first) continue;
    for (const auto& term : row.terms) {
      if (term.k != k) continue;
      agg.p_total += term.p_sum;
      agg.q_total += term.q_sum;
      ++agg.windows;
    }
  }
  if (agg.q_total.excludes_zero()) agg.ratio = (agg.p_total / agg.q_total).to_double();
  return agg;
}

BigInt comp_block_length(std::uint64_t i) {
  BigInt fact(1);
  for (std::uint64_t m = 2; m <= i; ++m) fact *= m;
  const double bits = fact.convert_to<double>() * (std::log2(3.0) + static_cast<double>(i) * std::log2(i + 1.0));
  if (bits > static_cast<double>(value_cap_bits()))
    throw OverflowPolicyError("block length for i=" + std::to_string(i) + " exceeds the value cap");
  const auto f = to_u64(fact);
  return pow(BigInt(3), static_cast<unsigned>(f)) * pow(BigInt(i + 1), static_cast<unsigned>(f * i));
}

SequenceSpec comp_schedule(std::uint64_t i_max) {
  if (i_max < 6) throw ValueError("the computable schedule starts at i = 6");
  SequenceSpec spec;
  spec.kind = SequenceSpec::Kind::Blocks;
  for (std::uint64_t i = 6; i <= i_max; ++i) spec.blocks.emplace_back(BigInt(i), comp_block_length(i));
  return spec;
}

namespace {

std::uint64_t pow2(std::uint64_t j) {
  if (j >= 63) throw RangeError("block index too large");
  return std::uint64_t{1} << j;
}

BigInt uniform_bigint_below(PositionRng& rng, const BigInt& bound) {
  if (bound <= 0) throw DomainError("empty digit interval");
  if (fits_u64(bound)) return BigInt(uniform_below(rng, to_u64(bound)));
  const std::size_t bits = msb(bound) + 1;
  for (;;) {
    BigInt v(0);
    for (std::size_t got = 0; got < bits; got += 64) v = (v << 64) | BigInt(rng());
    v >>= (bits + 63) / 64 * 64 - bits;
    if (v < bound) return v;
  }
}

}  // namespace

HdmainBuild::HdmainBuild(std::vector<std::uint64_t> lengths)
    : lengths_(std::move(lengths)),
      q_(BasicSequence::constant(2)),
      p_(BasicSequence::constant(2)) {
  if (lengths_.empty()) throw ValueError("hdmain needs at least one block length");
  l_.push_back(0);
  m_.push_back(0);
  for (std::size_t idx = 0; idx < lengths_.size(); ++idx) {
    const std::uint64_t j = idx + 2;
    const std::uint64_t len = lengths_[idx];
    if (len == 0) throw ValueError("hdmain block lengths must be >= 1");
    l_.push_back(l_.back() + len);
    m_.push_back(m_.back() + (pow2(j) + 1) * len);
  }
  const auto l = std::make_shared<const std::vector<std::uint64_t>>(l_);
  const auto m = std::make_shared<const std::vector<std::uint64_t>>(m_);
  const auto lens = std::make_shared<const std::vector<std::uint64_t>>(lengths_);
  BasicSequence::Meta qmeta;
  qmeta.length = m_.back();
  q_ = BasicSequence(
      [m, lens](std::uint64_t n) {
        const auto it = std::lower_bound(m->begin() + 1, m->end(), n);
        const auto idx = static_cast<std::uint64_t>(it - m->begin()) - 1;
        const std::uint64_t j = idx + 2;
        if (n - (*m)[idx] <= (*lens)[idx]) return QValue(j);
        return QValue(BigInt(j), pow2(j));
      },
      qmeta, "hdmain");
  BasicSequence::Meta pmeta;
  pmeta.nondecreasing = true;
  pmeta.length = l_.back();
  p_ = BasicSequence(
      [l](std::uint64_t g) {
        const auto it = std::lower_bound(l->begin() + 1, l->end(), g);
        return QValue(static_cast<std::uint64_t>(it - l->begin()) + 1);
      },
      pmeta, "hdmain-slow");
  log_prefix_.reserve(m_.back() + 1);
  log_prefix_.emplace_back(0);
  for (std::uint64_t n = 1; n <= m_.back(); ++n) log_prefix_.push_back(log_prefix_.back() + q_.at(n).log());
}

std::uint64_t HdmainBuild::alpha_literal(std::uint64_t n) const {
  for (std::uint64_t j = 0; j < m_.size(); ++j) {
    if (m_[j] < n) return j;
  }
  return m_.size();
}

HdmainBuild::Position HdmainBuild::locate(std::uint64_t n) const {
  if (n == 0 || n > length()) throw RangeError("position outside the hdmain build");
  const auto it = std::lower_bound(m_.begin() + 1, m_.end(), n);
  const auto idx = static_cast<std::uint64_t>(it - m_.begin()) - 1;
  Position pos;
  pos.block = idx + 2;
  pos.offset = n - m_[idx];
  pos.copy = pos.offset <= lengths_[idx];
  if (pos.copy) pos.p_position = l_[idx] + pos.offset;
  return pos;
}

Float HdmainBuild::log_prefix(std::uint64_t n) const { return log_prefix_.at(n); }

Float HdmainBuild::eps(std::uint64_t n) const {
  const Float b = q_.at(n).log();
  const Float a = log_prefix(n - 1);
  return boost::multiprecision::sqrt(a < b ? a : b) / b;
}

Float HdmainBuild::omega(std::uint64_t n) const { return boost::multiprecision::exp((1 - eps(n)) * q_.at(n).log()); }

BigInt HdmainBuild::omega_floor(std::uint64_t n) const {
  // Evaluate with enough bits to make the floor meaningful for large q_n.
  const QValue& q = q_.at(n);
  const auto bits = static_cast<mpfr_prec_t>(q.bit_length() + 64 + default_precision());
  mpfr_t e, lq, w;
  mpfr_inits2(bits, e, lq, w, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_z(lq, q.mantissa.backend().data(), MPFR_RNDN);
  mpfr_log(lq, lq, MPFR_RNDN);
  mpfr_t ln2;
  mpfr_init2(ln2, bits);
  mpfr_const_log2(ln2, MPFR_RNDN);
  mpfr_mul_ui(ln2, ln2, q.shift, MPFR_RNDN);
  mpfr_add(lq, lq, ln2, MPFR_RNDN);  // log q
  const Float ef = eps(n);
  mpfr_set(e, ef.backend().data(), MPFR_RNDN);
  mpfr_ui_sub(e, 1, e, MPFR_RNDN);
  mpfr_mul(w, e, lq, MPFR_RNDN);
  mpfr_exp(w, w, MPFR_RNDN);
  BigInt out;
  mpfr_get_z(out.backend().data(), w, MPFR_RNDD);
  mpfr_clears(e, lq, w, ln2, static_cast<mpfr_ptr>(nullptr));
  return out;
}

Float HdmainBuild::bound_expression(std::uint64_t n) const {
  if (n == 0 || n >= length()) throw RangeError("bound expression needs 1 <= n < length");
  const Float lp = log_prefix(n);
  if (lp <= 0) throw DomainError("log(q_1 ... q_n) must be positive");
  return 1 / (1 + eps(n + 1) * q_.at(n + 1).log() / lp);
}

DigitInterval hdmain_interval(const HdmainBuild& build, std::uint64_t n, double target) {
  if (!(target >= 0 && target < 1)) throw DomainError("targets must lie in [0, 1)");
  const auto pos = build.locate(n);
  const BigInt q = build.q().at(n).to_bigint();
  DigitInterval iv;
  const Rational x(target);
  const BigInt scaled = floor(Rational(q) * x);
  const auto log_block = static_cast<std::uint64_t>(std::ceil(std::log(static_cast<double>(pos.block))));
  iv.center = std::max(scaled, BigInt(log_block));
  const BigInt w = build.omega_floor(n);
  iv.lo = iv.center > w ? BigInt(iv.center - w) : BigInt(0);
  iv.hi = std::min<BigInt>(iv.center + w, q - 1);
  return iv;
}

DigitStream hdmain_sample_omega(const HdmainBuild& build, const DigitStream& xi,
                                std::function<double(std::uint64_t)> xs, std::uint64_t seed) {
  auto shared = std::make_shared<const HdmainBuild>(build);
  return DigitStream::from_function(
      [shared, xi, xs = std::move(xs), seed](std::uint64_t n) -> Digit {
        const auto pos = shared->locate(n);
        if (pos.copy) return xi.value(pos.p_position);
        const DigitInterval iv = hdmain_interval(*shared, n, xs(n - 1));
        PositionRng rng(seed, n);
        return BigInt(iv.lo + uniform_bigint_below(rng, iv.hi - iv.lo + 1));
      },
      build.q(), build.length());
}

MoranSpec moran_params_from_omega(const HdmainBuild& build, std::uint64_t horizon) {
  if (horizon == 0 || horizon > build.length()) throw RangeError("horizon outside the hdmain build");
  MoranSpec spec;
  for (std::uint64_t k = 1; k <= horizon; ++k) {
    const auto pos = build.locate(k);
    spec.n.push_back(pos.copy ? BigInt(1) : BigInt(2 * build.omega_floor(k) + 1));
    spec.c.push_back(Rational(BigInt(1), build.q().at(k).to_bigint()));
  }
  return spec;
}

}  // namespace cantor
