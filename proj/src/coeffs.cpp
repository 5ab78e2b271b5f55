#include "cantor/coeffs.hpp"

#include "cantor/errors.hpp"

namespace cantor {

WindowCoefficients coefficients(std::uint64_t t, const Rational& eps, const SSet& s) {
  if (t == 0) throw ValueError("t must be at least 1");
  if (eps <= 0) throw ValueError("eps must be positive");
  const Rational up = 1 + eps;
  const Rational down = 1 / up;
  WindowCoefficients c{t, eps, s, {}};
  c.values.reserve(t);
  c.values.push_back(s.contains(1) ? Rational(t) : Rational(t) * up);
  for (std::uint64_t i = 2; i <= t; ++i) {
    const int d = s.indicator(i - 1) - s.indicator(i);
    c.values.push_back(d == 0 ? Rational(1) : d > 0 ? up : down);
  }
  return c;
}

WindowCoefficients coefficients_from_values(std::vector<Rational> values) {
  if (values.empty()) throw ValueError("coefficient vector is empty");
  for (const auto& v : values) {
    if (v <= 0) throw ValueError("coefficients must be positive");
  }
  WindowCoefficients c;
  c.t = values.size();
  c.values = std::move(values);
  return c;
}

Rational window_sum(const WindowCoefficients& c, std::uint64_t k) {
  if (k == 0 || k > c.t) throw RangeError("window length must satisfy 1 <= k <= t");
  // Running product over the first window, then slide by dividing out the left end.
  Rational prod = 1;
  for (std::uint64_t j = 1; j <= k; ++j) prod *= c[j];
  Rational sum = prod;
  for (std::uint64_t i = 2; i + k - 1 <= c.t; ++i) {
    prod = prod / c[i - 1] * c[i + k - 1];
    sum += prod;
  }
  return sum;
}

ClosedFormTerms closed_form_terms(std::uint64_t t, std::uint64_t k, const SSet& s) {
  if (k == 0 || k > t) throw RangeError("window length must satisfy 1 <= k <= t");
  ClosedFormTerms out;
  for (std::uint64_t i = 2; i + k - 1 <= t; ++i) {
    const int d = s.indicator(i - 1) - s.indicator(i + k - 1);
    out.a += d;
    if (d == -1) ++out.b;
  }
  return out;
}

Rational closed_form(std::uint64_t t, std::uint64_t k, const Rational& eps, const SSet& s) {
  const ClosedFormTerms terms = closed_form_terms(t, k, s);
  const Rational tt(t);
  const Rational first = s.contains(k) ? tt : (1 + eps) * tt;
  return first + tt - Rational(k) + Rational(terms.a) * eps + Rational(terms.b) * eps * eps / (1 + eps);
}

Rational ap1_window_sum(const WindowCoefficients& c, std::uint64_t m, std::uint64_t r) {
  if (m == 0 || m > c.t) throw RangeError("progression modulus must satisfy 1 <= m <= t");
  if (r == 0 || r > m) throw RangeError("residue must lie in 1..m");
  Rational sum = 0;
  for (std::uint64_t i = r; i + m - 1 <= c.t; i += m) {
    Rational prod = 1;
    for (std::uint64_t j = 0; j < m; ++j) prod *= c[i + j];
    sum += prod;
  }
  return sum;
}

Rational ap2_window_sum(const WindowCoefficients& c, std::uint64_t k, std::uint64_t m, std::uint64_t r) {
  if (k == 0 || m == 0) throw RangeError("k and m must be positive");
  if (r == 0 || r > m) throw RangeError("residue must lie in 1..m");
  if (r + m * (k - 1) > c.t) throw RangeError("no index tuple fits inside [1, t]");
  Rational sum = 0;
  for (std::uint64_t start = r; start + m * (k - 1) <= c.t; start += m) {
    Rational prod = 1;
    for (std::uint64_t j = 0; j < k; ++j) prod *= c[start + m * j];
    sum += prod;
  }
  return sum;
}

}  // namespace cantor
