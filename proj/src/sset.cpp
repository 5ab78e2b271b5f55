#include "cantor/sset.hpp"

#include <algorithm>
#include <cmath>

#include "cantor/errors.hpp"
#include "parse_util.hpp"

namespace cantor {

namespace {

using u128 = unsigned __int128;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These witnesses are deterministic for all 64-bit n.
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && static_cast<u128>(r) * r > n) --r;
  while (static_cast<u128>(r + 1) * (r + 1) <= n) ++r;
  return r;
}

SSet SSet::finite(std::vector<std::uint64_t> members) {
  SSet s(Kind::Finite);
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  s.members_ = std::move(members);
  return s;
}

SSet SSet::mod(std::uint64_t modulus, std::uint64_t residue) {
  if (modulus == 0) throw ValueError("mod: modulus must be positive");
  if (residue >= modulus) throw ValueError("mod: residue must be below the modulus");
  SSet s(Kind::Mod);
  s.modulus_ = modulus;
  s.residue_ = residue;
  return s;
}

bool SSet::contains(std::uint64_t n) const {
  if (n == 0) return false;
  switch (kind_) {
    case Kind::Even: return n % 2 == 0;
    case Kind::Odd: return n % 2 == 1;
    case Kind::Primes: return is_prime(n);
    case Kind::All: return true;
    case Kind::None: return false;
    case Kind::SquareIntervals: {
      const std::uint64_t k = isqrt(n);
      return n - k * k <= k;
    }
    case Kind::Finite: return std::binary_search(members_.begin(), members_.end(), n);
    case Kind::Mod: return n % modulus_ == residue_;
  }
  return false;
}

std::string SSet::label() const {
  switch (kind_) {
    case Kind::Even: return "even";
    case Kind::Odd: return "odd";
    case Kind::Primes: return "primes";
    case Kind::All: return "all";
    case Kind::None: return "none";
    case Kind::SquareIntervals: return "sqint";
    case Kind::Finite: {
      std::string s = "finite:";
      for (std::size_t i = 0; i < members_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(members_[i]);
      }
      return s;
    }
    case Kind::Mod: return "mod:" + std::to_string(modulus_) + ":" + std::to_string(residue_);
  }
  return "?";
}

namespace detail {

SSet parse_sset_at(Cursor& cur) {
  if (cur.accept("even")) return SSet(SSet::Kind::Even);
  if (cur.accept("odd")) return SSet(SSet::Kind::Odd);
  if (cur.accept("primes")) return SSet(SSet::Kind::Primes);
  if (cur.accept("all")) return SSet(SSet::Kind::All);
  if (cur.accept("none")) return SSet(SSet::Kind::None);
  if (cur.accept("sqint")) return SSet(SSet::Kind::SquareIntervals);
  if (cur.accept("finite:")) {
    std::vector<std::uint64_t> members{cur.small_integer()};
    while (cur.accept(",")) members.push_back(cur.small_integer());
    return SSet::finite(std::move(members));
  }
  if (cur.accept("mod:")) {
    const std::size_t at = cur.pos();
    const std::uint64_t m = cur.small_integer();
    cur.expect(":");
    const std::uint64_t r = cur.small_integer();
    if (m == 0 || r >= m) throw SyntaxError(at, "modulus >= 1 and residue below it");
    return SSet::mod(m, r);
  }
  throw SyntaxError(cur.pos(), "S-set (even|odd|primes|all|none|sqint|finite:|mod:)");
}

}  // namespace detail

SSet parse_sset(std::string_view text) {
  detail::Cursor cur(text);
  SSet s = detail::parse_sset_at(cur);
  cur.expect_end();
  return s;
}

AlmostClosedReport almost_closed_report(const SSet& s, std::uint64_t max_k, std::uint64_t horizon) {
  if (max_k == 0 || horizon == 0) throw ValueError("max_k and horizon must be positive");
  AlmostClosedReport rep{s.label(), horizon, {}};
  for (std::uint64_t k = 1; k <= max_k; ++k) {
    if (!s.contains(k)) continue;
    std::uint64_t count = 0;
    for (std::uint64_t n = 1; n <= horizon; ++n) {
      if (!s.contains(n) && s.contains(n + k)) ++count;
    }
    rep.rows.push_back({k, count, static_cast<double>(count) / static_cast<double>(horizon)});
  }
  return rep;
}

}  // namespace cantor
