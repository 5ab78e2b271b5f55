#include <cmath>

#include "cantor/errors.hpp"
#include "cantor/pipeline.hpp"
#include "cantor/stats.hpp"
#include "doctest.h"
#include "gen.hpp"

using namespace cantor;

namespace {

ScheduleParams toy(Rational eps = Rational(1, 10)) {
  ScheduleParams p;
  p.mode = ScheduleMode::Toy;
  p.t_rule = parse_t_rule("2i");
  p.eps = eps;
  p.s = parse_sset("even");
  return p;
}

BigInt ipow(const BigInt& b, std::uint64_t e) {
  BigInt v = 1;
  for (std::uint64_t i = 0; i < e; ++i) v *= b;
  return v;
}

// Smallest j >= 1 for which N = K + 2 t_i j meets the threshold, divisibility and size conditions,
// with an optional growth cutoff; scanned one j at a time.
std::uint64_t brute_kappa(const BasicSequence& q, const ScheduleParams& p, std::uint64_t i, const BigInt& k_prev,
                          const BigInt& growth_last, std::uint64_t j_max) {
  const std::uint64_t ti = p.t(i), tn = p.t(i + 1);
  const Rational threshold = (1 + p.eps) * Rational(BigInt(tn) * tn);
  for (std::uint64_t j = 1; j <= j_max; ++j) {
    const BigInt n = k_prev + BigInt(2 * ti) * j;
    if (Rational(q.peek(to_u64(n) + 1).to_bigint()) < threshold) continue;
    if (n % (2 * tn) != 0) continue;
    if (ipow(n, i + 1) <= ipow(BigInt(i), i + 1) * 2 * tn) continue;
    if (n < growth_last) continue;
    return j;
  }
  return 0;
}

}  // namespace

TEST_CASE("t rules") {
  CHECK(parse_t_rule("2i").at(3) == 6);
  CHECK(parse_t_rule("i").at(5) == 5);
  CHECK(parse_t_rule("fact").at(5) == 120);
  CHECK(parse_t_rule("const:4").at(9) == 4);
  CHECK_THROWS(parse_t_rule("squared"));
  CHECK_THROWS_AS(parse_t_rule("fact").at(30), RangeError);
  for (const char* text : {"2i", "i", "fact", "const:4"}) CHECK(parse_t_rule(parse_t_rule(text).label()) == parse_t_rule(text));
}

TEST_CASE("Xi transform") {
  const auto c = coefficients_from_values({Rational(329663, 100000), Rational(126795, 100000), Rational(143542, 100000)});
  CHECK(xi_transform(QValue(100), 1, c) == BigInt(30));
  CHECK(xi_transform(QValue(100), 4, c) == BigInt(1600));
  CHECK(xi_transform(QValue(100), 4, c).shift == 4);
  CHECK(xi_transform(QValue(3), 1, c) == BigInt(2));
  CHECK(xi_transform(QValue(100), 7, c) == BigInt(30));
}

TEST_CASE("kappa search matches a direct scan in toy mode") {
  const auto q = BasicSequence::from_spec("pow:1/4:1");
  const auto params = toy();
  const auto st = build_schedule(q, params, 30'000'000);
  REQUIRE(st.resolved_stages() >= 3);
  for (std::uint64_t i = 1; i <= 3; ++i) {
    const auto kr = find_kappa(q, params, i, st.K[i - 1]);
    CHECK(kr.kappa == st.kappa[i - 1]);
    CHECK(kr.kappa == brute_kappa(q, params, i, st.K[i - 1], BigInt(0), 10'000'000));
  }
}

TEST_CASE("kappa search in paper mode") {
  const auto q = BasicSequence::from_spec("pow:1/4:1");
  ScheduleParams p;
  p.mode = ScheduleMode::Paper;
  p.eps = Rational(1, 100);
  const auto k1 = find_kappa(q, p, 1, BigInt(0));
  CHECK(k1.kappa == 40);
  CHECK(k1.growth_certified);
  // last n <= 10^6 with q_n^2 >= n, found by a full scan
  std::uint64_t last = 0;
  for (std::uint64_t n = 1; n <= 1'000'000; ++n) {
    const BigInt v = q.value(n);
    if (v * v >= n) last = n;
  }
  CHECK(k1.kappa == brute_kappa(q, p, 1, BigInt(0), BigInt(last), 100000));
  const BigInt k1_end = std::max<BigInt>(BigInt(80), BigInt(p.t(2) * p.t(2)));
  const auto k2 = find_kappa(q, p, 2, k1_end);
  CHECK(k2.threshold_position == 1500625);
  CHECK(k2.kappa == 375136);
  CHECK((k1_end + BigInt(4) * k2.kappa) % 12 == 0);
}

TEST_CASE("constant bases never reach the threshold") {
  auto p = toy();
  p.search_cap = 1000;
  CHECK_THROWS_AS(find_kappa(BasicSequence::constant(2), p, 1, BigInt(0)), SearchExhausted);
  CHECK_THROWS_AS(build_schedule(BasicSequence::constant(2), p, 1'000'000), ScheduleExhausted);
  try {
    build_schedule(BasicSequence::constant(2), p, 1'000'000);
  } catch (const ScheduleExhausted& e) {
    CHECK(e.partial().resolved_stages() == 0);
    CHECK(e.stage() == 1);
  }
}

TEST_CASE("schedule indices agree with the definition") {
  const auto q = BasicSequence::from_spec("pow:1/4:1");
  const auto st = build_schedule(q, toy(), 10000);
  for (std::size_t i = 1; i < st.K.size(); ++i) {
    CHECK(st.K[i] > st.K[i - 1]);
    const BigInt tn(st.t(i + 1));
    CHECK(st.K[i] == std::max<BigInt>(st.K[i - 1] + BigInt(2 * st.t(i)) * st.kappa[i - 1], tn * tn));
  }
  for (std::uint64_t n = 1; n <= 10000; ++n) {
    std::uint64_t i = 1;
    while (i < st.K.size() && st.K[i] < n) ++i;
    const std::uint64_t ti = st.t(i);
    const BigInt off = BigInt(n) - st.K[i - 1];
    std::uint64_t j = 0;
    while (!(BigInt(2 * ti * j) < off && off <= BigInt(2 * ti * (j + 1)))) ++j;
    CHECK(st.stage_of(n) == i);
    CHECK(st.window_of(n) == j);
  }
}

TEST_CASE("short horizons leave only the open first stage") {
  const auto st = build_schedule(BasicSequence::from_spec("pow:1/4:1"), toy(), 10);
  CHECK(st.K.size() == 1);
  CHECK(st.resolved_stages() == 0);
  REQUIRE(st.next_K.has_value());
  CHECK(*st.next_K > 10);
  CHECK(st.stage_of(10) == 1);
}

TEST_CASE("paper schedules grow past t_{i+1}^2") {
  ScheduleParams p;
  p.mode = ScheduleMode::Paper;
  p.eps = Rational(1, 100);
  const auto st = build_schedule(BasicSequence::from_spec("pow:1/4:1"), p, 1'000'000);
  REQUIRE(st.resolved_stages() >= 1);
  for (std::size_t i = 1; i < st.K.size(); ++i) CHECK(st.K[i] >= BigInt(st.t(i + 1)) * st.t(i + 1));
  CHECK(st.K[1] == 80);
}

TEST_CASE("derived P follows the floor rule") {
  const auto q = BasicSequence::from_spec("pow:1/4:1");
  const auto params = toy();
  const auto st = build_schedule(q, params, 100000);
  const auto p = derive_p(q, st);
  for (std::uint64_t n = 1; n <= 100000; n += 7) {
    const std::uint64_t i = st.stage_of(n), t = st.t(i);
    const auto c = coefficients(t, params.eps, params.s);
    const std::uint64_t r = (to_u64(BigInt(n) - st.K[i - 1]) - 1) % (2 * t) + 1;
    const BigInt qn = q.value(n);
    if (r <= t) {
      const Rational scaled = Rational(qn) / c[r];
      CHECK(p.at(n) == std::max<BigInt>(floor(scaled), BigInt(2)));
      const Rational alpha_min = (1 + params.eps) * Rational(BigInt(t) * t);
      if (Rational(qn) >= alpha_min) {
        const Rational frac = Rational(p.value(n)) / scaled;
        CHECK(frac > 1 - Rational(1, t));
        CHECK(frac <= 1);
      }
    } else {
      CHECK(p.at(n).shift == n);
      CHECK(p.at(n).mantissa == qn);
    }
  }
}

TEST_CASE("window sums match their constant-q identities") {
  const auto q = BasicSequence::from_spec("pow:1/4:1");
  const auto params = toy();
  const auto st = build_schedule(q, params, 100000);
  const auto p = derive_p(q, st);
  const auto rep = window_ratio_report(p, q, st, {1, 2, 3}, 100000, 21);
  REQUIRE(rep.rows.size() > 100);
  std::size_t constant = 0;
  for (const auto& row : rep.rows) {
    const auto c = coefficients(row.t, params.eps, params.s);
    for (const auto& term : row.terms) {
      if (!term.constant_q) continue;
      ++constant;
      const Rational ak(ipow(row.alpha, term.k));
      CHECK(term.q_sum.contains(Rational(2 * row.t) / ak));
      if (term.k > row.t) continue;
      const Rational w = window_sum(c, term.k);
      const double lo_env = std::pow(1.0 - 1.0 / static_cast<double>(row.t), static_cast<double>(term.k));
      REQUIRE(term.prediction.has_value());
      const double rp = *term.ratio / *term.prediction;
      CHECK(rp >= lo_env * (1 - std::ldexp(1.0, -10)));
      CHECK(rp <= (1 + std::ldexp(1.0, -10)) / lo_env);
      if (Rational(row.alpha) >= (1 + params.eps) * Rational(BigInt(row.t) * row.t)) {
        const double scaled = term.p_sum.to_double() * ak.convert_to<double>();
        const double wd = w.convert_to<double>();
        CHECK(scaled >= wd * (1 - 1e-12));
        CHECK(scaled <= wd / lo_env * (1 + 1e-9));
      }
    }
  }
  CHECK(constant > 100);
}

TEST_CASE("aggregated windows") {
  const auto q = BasicSequence::from_spec("pow:1/4:1");
  const auto st = build_schedule(q, toy(), 20000);
  const auto rep = window_ratio_report(derive_p(q, st), q, st, {1}, 20000);
  const auto agg = aggregate_windows(rep, 1, 1);
  HighPrecReal pt(0L), qt(0L);
  std::uint64_t n = 0;
  for (const auto& row : rep.rows) {
    pt += row.terms[0].p_sum;
    qt += row.terms[0].q_sum;
    ++n;
  }
  CHECK(agg.windows == n);
  CHECK(agg.ratio.value() == doctest::Approx(pt.to_double() / qt.to_double()));
}

TEST_CASE("constructed digits follow the transfer rule") {
  const auto q = BasicSequence::from_spec("pow:1/4:1");
  const auto a = construct_y(q, toy(), 99, 20000), b = construct_y(q, toy(), 99, 20000);
  for (std::uint64_t n = 1; n <= 20000; ++n) {
    const BigInt xn = a.x.value(n);
    CHECK(xn < a.p.value(n));
    CHECK(a.y.value(n) == std::min<BigInt>(xn, q.value(n) - 1));
    CHECK(a.y.value(n) == b.y.value(n));
  }
}

TEST_CASE("transfer keeps block count differences bounded") {
  const auto p = BasicSequence::from_spec("pow:1/3:1"), q = BasicSequence::from_spec("pow:1/4:1");
  const auto x = DigitStream::uniform(p, 5);
  const auto y = psi_map(p, q, x);
  const std::vector<Block> blocks{{0}, {1}, {0, 1}, {1, 1}};
  BlockCounter cx(blocks), cy(blocks);
  cx.feed(x, 5000);
  cy.feed(y, 5000);
  std::vector<long long> diff;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    diff.push_back(static_cast<long long>(cy.count(b)) - static_cast<long long>(cx.count(b)));
  for (std::uint64_t n = 5001; n <= 10000; ++n) {
    cx.feed(x, n);
    cy.feed(y, n);
    for (std::size_t b = 0; b < blocks.size(); ++b)
      CHECK(static_cast<long long>(cy.count(b)) - static_cast<long long>(cx.count(b)) == diff[b]);
  }
}

TEST_CASE("computable block schedule") {
  const BigInt l6 = comp_block_length(6);
  CHECK(l6 == ipow(BigInt(3), 720) * ipow(BigInt(7), 4320));
  const auto spec = comp_schedule(7);
  const auto seq = BasicSequence::from_spec(spec);
  CHECK(seq.value(1) == 6);
  CHECK(blocks_value_at(spec.blocks, l6, false) == 6);
  CHECK(blocks_value_at(spec.blocks, l6 + 1, false) == 7);
  CHECK_THROWS_AS(comp_block_length(9), OverflowPolicyError);
  CHECK_THROWS_AS(comp_schedule(5), ValueError);
}

TEST_CASE("hdmain layout") {
  const HdmainBuild b({1, 1, 1});
  CHECK(b.q().value(1) == 2);
  for (std::uint64_t n = 2; n <= 5; ++n) CHECK(b.q().value(n) == 32);
  CHECK(b.M(1) == 5);
  CHECK(b.q().value(6) == 3);
  CHECK(b.q().value(7) == 3 * 256);
  CHECK(b.length() == 5 + 9 + 17);
  CHECK(b.alpha_literal(7) == 0);
  const auto pos = b.locate(6);
  CHECK(pos.copy);
  CHECK(pos.block == 3);
  CHECK(pos.p_position == 2);
  CHECK_FALSE(b.locate(7).copy);
  CHECK(b.p().value(1) == 2);
  CHECK(b.p().value(2) == 3);
  CHECK_THROWS_AS(HdmainBuild({1, 0}), ValueError);
}

TEST_CASE("hdmain exponents and moran parameters") {
  const HdmainBuild b({2, 3, 4, 5});
  for (std::uint64_t n = 2; n <= b.length(); ++n) {
    const double qn = b.q().value(n).convert_to<double>();
    const double pre = std::log(qn), prefix = b.log_prefix(n - 1).convert_to<double>();
    const double eps = std::sqrt(std::min(prefix, pre)) / pre;
    CHECK(b.eps(n).convert_to<double>() == doctest::Approx(eps).epsilon(1e-12));
    CHECK(b.omega(n).convert_to<double>() == doctest::Approx(std::pow(qn, 1 - eps)).epsilon(1e-12));
    CHECK(b.omega_floor(n) == BigInt(static_cast<long long>(std::floor(b.omega(n).convert_to<double>()))));
  }
  const auto m = moran_params_from_omega(b, b.length());
  for (std::uint64_t k = 1; k <= b.length(); ++k) {
    if (b.locate(k).copy) {
      CHECK(m.n[k - 1] == 1);
    } else {
      CHECK(m.n[k - 1] == 2 * b.omega_floor(k) + 1);
    }
    CHECK(m.c[k - 1] == Rational(BigInt(1), b.q().value(k)));
  }
}

TEST_CASE("hdmain sampled digits") {
  const HdmainBuild b({2, 3, 4, 5, 6});
  const auto xi = DigitStream::uniform(b.p(), 12);
  const auto xs = [](std::uint64_t n) { return std::fmod(0.37 * static_cast<double>(n), 1.0); };
  const auto y = hdmain_sample_omega(b, xi, xs, 4), again = hdmain_sample_omega(b, xi, xs, 4);
  for (std::uint64_t n = 1; n <= b.length(); ++n) {
    const auto pos = b.locate(n);
    const BigInt e = y.value(n);
    CHECK(e == again.value(n));
    CHECK(e < b.q().value(n));
    if (pos.copy) {
      CHECK(e == xi.value(pos.p_position));
      continue;
    }
    const auto iv = hdmain_interval(b, n, xs(n - 1));
    CHECK(iv.lo <= e);
    CHECK(e <= iv.hi);
    const BigInt target = floor(Rational(b.q().value(n)) * Rational(xs(n - 1)));
    const BigInt dist = e > target ? BigInt(e - target) : BigInt(target - e);
    const auto log_block = static_cast<long long>(std::ceil(std::log(static_cast<double>(pos.block))));
    CHECK(dist <= b.omega_floor(n) + log_block);
  }
}
