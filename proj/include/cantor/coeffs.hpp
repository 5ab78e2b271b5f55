#pragma once

#include <cstdint>
#include <vector>

#include "cantor/numeric.hpp"
#include "cantor/sset.hpp"

namespace cantor {

/// Window coefficients (c_{t,1}, ..., c_{t,t}) as exact rationals.
struct WindowCoefficients {
  std::uint64_t t = 0;
  Rational eps{0};
  SSet s;
  std::vector<Rational> values;  // values[i-1] = c_{t,i}

  const Rational& operator[](std::uint64_t i) const { return values.at(i - 1); }  // 1-based
};

WindowCoefficients coefficients(std::uint64_t t, const Rational& eps, const SSet& s);

/// Wraps an explicit coefficient vector (e.g. the (3,2,1) example); eps and s are unset.
WindowCoefficients coefficients_from_values(std::vector<Rational> values);

/// Sum over i of c_i c_{i+1} ... c_{i+k-1}, 1 <= i <= t-k+1.
Rational window_sum(const WindowCoefficients& c, std::uint64_t k);

struct ClosedFormTerms {
  long long a = 0;     // sum of indicator differences
  std::uint64_t b = 0;  // number of differences equal to -1
};

ClosedFormTerms closed_form_terms(std::uint64_t t, std::uint64_t k, const SSet& s);

/// (1 + 1_{N\S}(k) eps) t + t - k + a eps + b eps^2 / (1 + eps).
Rational closed_form(std::uint64_t t, std::uint64_t k, const Rational& eps, const SSet& s);

/// Sum over 1 <= i <= t-m+1 with i = r (mod m) of c_i ... c_{i+m-1}; r in 1..m.
Rational ap1_window_sum(const WindowCoefficients& c, std::uint64_t m, std::uint64_t r);

/// Sum over i >= 0 of c_{r+mi} c_{r+m(i+1)} ... c_{r+m(i+k-1)} over tuples inside [1, t]; r in 1..m.
Rational ap2_window_sum(const WindowCoefficients& c, std::uint64_t k, std::uint64_t m, std::uint64_t r);

}  // namespace cantor
