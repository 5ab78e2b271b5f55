#include "cantor/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cantor/errors.hpp"

namespace cantor {

namespace {

std::uint64_t ipow(std::uint64_t b, std::uint64_t k) {
  std::uint64_t v = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    if (v > (std::uint64_t{1} << 40) / b) throw RangeError("too many Markov states");
    v *= b;
  }
  return v;
}

Float log_of(const BigInt& v) { return boost::multiprecision::log(Float(v)); }

Float log_of(const Rational& v) { return log_of(numerator(v)) - log_of(denominator(v)); }

}  // namespace

std::uint64_t block_index(const std::vector<std::uint64_t>& block, std::uint64_t b) {
  std::uint64_t idx = 0;
  for (std::uint64_t d : block) {
    if (d >= b) throw DomainError("digit " + std::to_string(d) + " is not a base-" + std::to_string(b) + " digit");
    idx = idx * b + d;
  }
  return idx;
}

std::vector<std::uint64_t> index_block(std::uint64_t index, std::uint64_t b, std::uint64_t k) {
  std::vector<std::uint64_t> block(k);
  for (std::uint64_t i = k; i-- > 0;) {
    block[i] = index % b;
    index /= b;
  }
  return block;
}

MarkovSpec markov_matrix(std::uint64_t b, std::uint64_t k, std::uint64_t n) {
  if (b < 2) throw ValueError("base must be >= 2");
  if (k < 1) throw ValueError("order must be >= 1");
  if (n < 1) throw ValueError("perturbation index must be >= 1");
  if (b == 2 && n == 1) throw DegenerateChain("b = 2, n = 1 makes the all-zero state absorbing");
  MarkovSpec spec;
  spec.b = b;
  spec.k = k;
  spec.n = n;
  const std::uint64_t states = ipow(b, k);
  const auto s = static_cast<Eigen::Index>(states);
  spec.P = RationalMatrix::Constant(s, s, Rational(0));
  const Rational base(1, b);
  const Rational up = (1 + Rational(1, n)) / b;
  const Rational down = (1 - Rational(1, n)) / b;
  const std::uint64_t high = states / b;  // b^{k-1}: index of 1 0^{k-1}
  for (std::uint64_t from = 0; from < states; ++from) {
    for (std::uint64_t d = 0; d < b; ++d) {
      const std::uint64_t to = (from % high) * b + d;
      Rational v = base;
      if (from == 0 && to == 0) v = up;
      if (from == 0 && to == 1) v = down;
      if (from == high && to == 0) v = down;
      if (from == high && to == 1) v = up;
      spec.P(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to)) = v;
    }
  }
  spec.initial = RationalRow::Constant(s, Rational(1, states));
  return spec;
}

bool rows_sum_to_one(const MarkovSpec& spec) {
  for (Eigen::Index r = 0; r < spec.P.rows(); ++r) {
    Rational sum(0);
    for (Eigen::Index c = 0; c < spec.P.cols(); ++c) sum += spec.P(r, c);
    if (sum != 1) return false;
  }
  return true;
}

bool uniform_is_stationary(const MarkovSpec& spec) {
  const RationalRow next = spec.initial * spec.P;
  for (Eigen::Index c = 0; c < next.cols(); ++c) {
    if (next(c) != spec.initial(c)) return false;
  }
  return true;
}

bool supported_on_overlaps(const MarkovSpec& spec) {
  const std::uint64_t high = spec.states() / spec.b;
  for (std::uint64_t from = 0; from < spec.states(); ++from) {
    for (std::uint64_t to = 0; to < spec.states(); ++to) {
      const bool overlap = to / spec.b == from % high;
      if (!overlap && spec.P(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to)) != 0) return false;
    }
  }
  return true;
}

EntropyResult entropy(const MarkovSpec& spec) {
  EntropyResult res;
  Float h(0);
  std::uint64_t terms = 0;
  for (Eigen::Index r = 0; r < spec.P.rows(); ++r) {
    for (Eigen::Index c = 0; c < spec.P.cols(); ++c) {
      const Rational& p = spec.P(r, c);
      if (p == 0) continue;
      h -= to_float(spec.initial(r) * p) * log_of(p);
      ++terms;
    }
  }
  res.h = h;
  res.h_over_log_b = h / log_of(BigInt(spec.b));
  // a few roundings per term, each below one ulp of a quantity bounded by log b
  res.err_bound = std::ldexp(8.0 * static_cast<double>(terms + 1), -static_cast<int>(default_precision()));
  return res;
}

Rational cylinder_measure(const MarkovSpec& spec, const std::vector<std::uint64_t>& block) {
  if (block.size() < spec.k) throw ValueError("cylinder blocks need length >= k");
  std::vector<std::uint64_t> head(block.begin(), block.begin() + static_cast<std::ptrdiff_t>(spec.k));
  std::uint64_t state = block_index(head, spec.b);
  Rational v = spec.initial(static_cast<Eigen::Index>(state));
  const std::uint64_t high = spec.states() / spec.b;
  for (std::size_t i = spec.k; i < block.size(); ++i) {
    if (block[i] >= spec.b) throw DomainError("digit outside the base");
    const std::uint64_t next = (state % high) * spec.b + block[i];
    v *= spec.P(static_cast<Eigen::Index>(state), static_cast<Eigen::Index>(next));
    state = next;
  }
  return v;
}

std::vector<std::uint8_t> sample_markov(const MarkovSpec& spec, std::uint64_t seed, std::uint64_t length) {
  if (length < spec.k) throw ValueError("sample length must be >= k");
  if (spec.b > 256) throw RangeError("sampled digits are bytes; base must be <= 256");
  const std::uint64_t states = spec.states();
  const std::uint64_t high = states / spec.b;
  // thresholds[s * b + d] = floor(2^64 * P(s, successor <= d)), last successor open-ended
  std::vector<std::uint64_t> thresholds(states * spec.b);
  const BigInt two64 = BigInt(1) << 64;
  for (std::uint64_t s = 0; s < states; ++s) {
    Rational cum(0);
    for (std::uint64_t d = 0; d < spec.b; ++d) {
      cum += spec.P(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>((s % high) * spec.b + d));
      const BigInt th = floor(cum * Rational(two64));
      thresholds[s * spec.b + d] = th >= two64 ? std::numeric_limits<std::uint64_t>::max() : to_u64(th);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> pick(0, states - 1);
  std::uint64_t state = pick(rng);
  std::vector<std::uint8_t> out;
  out.reserve(length);
  for (std::uint64_t step = 0; step < length; ++step) {
    out.push_back(static_cast<std::uint8_t>(state / high));
    const std::uint64_t r = rng();
    std::uint64_t d = 0;
    while (d + 1 < spec.b && r >= thresholds[state * spec.b + d]) ++d;
    state = (state % high) * spec.b + d;
  }
  return out;
}

std::vector<std::uint8_t> balanced_walk(const MarkovSpec& spec, std::uint64_t length) {
  if (length < spec.k) throw ValueError("walk length must be >= k");
  const std::uint64_t states = spec.states();
  const std::uint64_t high = states / spec.b;
  std::vector<double> prob(states * spec.b);
  for (std::uint64_t s = 0; s < states; ++s) {
    for (std::uint64_t d = 0; d < spec.b; ++d) {
      prob[s * spec.b + d] =
          spec.P(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>((s % high) * spec.b + d)).convert_to<double>();
    }
  }
  std::vector<std::uint64_t> visits(states, 0), taken(states * spec.b, 0);
  std::uint64_t state = 0;
  std::vector<std::uint8_t> out;
  out.reserve(length);
  for (std::uint64_t step = 0; step < length; ++step) {
    out.push_back(static_cast<std::uint8_t>(state / high));
    const double v = static_cast<double>(++visits[state]);
    std::uint64_t best = 0;
    double best_gap = -1e300;
    for (std::uint64_t d = 0; d < spec.b; ++d) {
      const double gap = v * prob[state * spec.b + d] - static_cast<double>(taken[state * spec.b + d]);
      if (gap > best_gap + 1e-12) {
        best_gap = gap;
        best = d;
      }
    }
    ++taken[state * spec.b + best];
    state = (state % high) * spec.b + best;
  }
  return out;
}

MoranBounds moran_bounds(const MoranSpec& spec, std::uint64_t truncation) {
  if (truncation < 2) throw ValueError("truncation must be >= 2");
  if (spec.n.size() < truncation + 1 || spec.c.size() < truncation + 1)
    throw RangeError("Moran parameters must cover levels 1..T+1");
  MoranBounds out;
  Float log_n(0), log_c(0);
  for (std::uint64_t k = 1; k <= truncation + 1; ++k) {
    const BigInt& nk = spec.n[k - 1];
    const Rational& ck = spec.c[k - 1];
    if (nk < 1) throw DomainError("branch counts must be >= 1");
    if (!(ck > 0 && ck < 1)) throw DomainError("contraction ratios must lie in (0, 1)");
    if (nk < 2) out.branch_hypothesis = false;
    if (k == 1 ? Rational(nk) * ck > spec.delta : Rational(nk) * ck > 1) out.size_hypothesis = false;
  }
  for (std::uint64_t k = 1; k <= truncation; ++k) {
    log_n += log_of(spec.n[k - 1]);
    log_c += log_of(spec.c[k - 1]);
    const Float lower_den = -(log_c + log_of(spec.c[k]) + log_of(spec.n[k]));
    if (lower_den <= 0) throw DomainError("c_1...c_{k+1} n_{k+1} >= 1 at level " + std::to_string(k));
    const Float upper_den = -log_c;
    out.lower.push_back(Float(log_n / lower_den).convert_to<double>());
    out.upper.push_back(Float(log_n / upper_den).convert_to<double>());
    const double lo = out.lower.back(), up = out.upper.back();
    out.lower_running_min.push_back(out.lower_running_min.empty() ? lo : std::min(out.lower_running_min.back(), lo));
    out.upper_running_min.push_back(out.upper_running_min.empty() ? up : std::min(out.upper_running_min.back(), up));
  }
  out.tail_start = std::max<std::uint64_t>(1, truncation / 2);
  out.lower_liminf = *std::min_element(out.lower.begin() + static_cast<std::ptrdiff_t>(out.tail_start - 1), out.lower.end());
  out.upper_liminf = *std::min_element(out.upper.begin() + static_cast<std::ptrdiff_t>(out.tail_start - 1), out.upper.end());
  return out;
}

}  // namespace cantor
