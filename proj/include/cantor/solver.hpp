#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/eigen.hpp>

#include "cantor/errors.hpp"
#include "cantor/numeric.hpp"

namespace cantor {

template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Right-hand sides (2 + eps_k) t of the consecutive-product system.
struct SystemSpec {
  std::uint64_t t = 2;
  std::vector<Rational> eps;  // length t; empty means all zero

  Rational target(std::uint64_t k) const { return (2 + (eps.empty() ? Rational(0) : eps.at(k - 1))) * t; }
};

enum class SolveStatus { Converged, NoConvergence, SingularJacobian };
std::string to_string(SolveStatus s);

template <class Scalar>
struct Solution {
  Vec<Scalar> c;
  Scalar residual;
  bool in_region = false;
  std::uint64_t iterations = 0;
  SolveStatus status = SolveStatus::NoConvergence;
  std::string diagnostic;
};

/// e_k = sum over windows of length k of the product of consecutive entries, in O(t^2).
template <class Scalar>
Vec<Scalar> evaluate_system(const Vec<Scalar>& c) {
  const Eigen::Index t = c.size();
  Vec<Scalar> e = Vec<Scalar>::Zero(t);
  for (Eigen::Index s = 0; s < t; ++s) {
    Scalar prod(1);
    for (Eigen::Index j = s; j < t; ++j) {
      prod *= c(j);
      e(j - s) += prod;
    }
  }
  return e;
}

/// d e_k / d c_i: for each k, prefix sums of window products give the sum over windows
/// containing i, which is then divided by c_i.
template <class Scalar>
Mat<Scalar> jacobian(const Vec<Scalar>& c) {
  const Eigen::Index t = c.size();
  Mat<Scalar> w = Mat<Scalar>::Zero(t, t);  // w(k-1, s) = product of window starting at s of length k
  for (Eigen::Index s = 0; s < t; ++s) {
    Scalar prod(1);
    for (Eigen::Index j = s; j < t; ++j) {
      prod *= c(j);
      w(j - s, s) = prod;
    }
  }
  Mat<Scalar> jac(t, t);
  Vec<Scalar> prefix(t + 1);
  for (Eigen::Index k = 1; k <= t; ++k) {
    const Eigen::Index windows = t - k + 1;
    prefix(0) = Scalar(0);
    for (Eigen::Index s = 0; s < windows; ++s) prefix(s + 1) = prefix(s) + w(k - 1, s);
    for (Eigen::Index i = 0; i < t; ++i) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, i - k + 1);
      const Eigen::Index hi = std::min<Eigen::Index>(i, windows - 1);
      Scalar sum = hi >= lo ? Scalar(prefix(hi + 1) - prefix(lo)) : Scalar(0);
      jac(k - 1, i) = sum / c(i);
    }
  }
  return jac;
}

/// Membership in [t, t+1] x [1, 1 + 1/(t-1)]^{t-1}, widened by slack.
template <class Scalar>
bool in_region(const Vec<Scalar>& c, double slack = 0) {
  const Eigen::Index t = c.size();
  if (t < 2) throw ValueError("region is defined for t >= 2");
  const Scalar s(slack);
  if (c(0) < Scalar(t) - s || c(0) > Scalar(t + 1) + s) return false;
  const Scalar upper = Scalar(1) + Scalar(1) / Scalar(t - 1);
  for (Eigen::Index i = 1; i < t; ++i) {
    if (c(i) < Scalar(1) - s || c(i) > upper + s) return false;
  }
  return true;
}

template <class Scalar>
Vec<Scalar> auto_guess(std::uint64_t t) {
  Vec<Scalar> c(static_cast<Eigen::Index>(t));
  c(0) = Scalar(t) + Scalar(1) / Scalar(2);
  for (std::uint64_t i = 1; i < t; ++i) c(static_cast<Eigen::Index>(i)) = Scalar(1) + Scalar(1) / Scalar(2 * (t - 1));
  return c;
}

namespace detail {

template <class Scalar>
Scalar max_abs(const Vec<Scalar>& v) {
  using std::abs;
  Scalar m(0);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    Scalar a = abs(v(i));
    if (a > m) m = a;
  }
  return m;
}

template <class Scalar>
Scalar scalar_from_rational(const Rational& q) {
  if constexpr (std::is_same_v<Scalar, Rational>) {
    return q;
  } else if constexpr (std::is_same_v<Scalar, double>) {
    return q.convert_to<double>();
  } else {
    return Scalar(to_float(q));
  }
}

}  // namespace detail

struct NewtonOptions {
  double tol = 1e-10;
  std::uint64_t max_iter = 200;
  double singular_pivot = 1e-30;
  int max_halvings = 60;
};

/// Damped Newton: the step is halved until the residual decreases and all entries stay positive.
template <class Scalar>
Solution<Scalar> newton_solve(const SystemSpec& spec, std::optional<Vec<Scalar>> c0 = std::nullopt,
                              const NewtonOptions& opt = {}) {
  using std::abs;
  if (spec.t < 2) throw ValueError("the window system needs t >= 2");
  if (!spec.eps.empty() && spec.eps.size() != spec.t) throw ValueError("eps list must have length t");
  if (!(opt.tol > 0)) throw ValueError("tol must be positive");
  const auto t = static_cast<Eigen::Index>(spec.t);
  Vec<Scalar> target(t);
  for (Eigen::Index k = 0; k < t; ++k) {
    target(k) = detail::scalar_from_rational<Scalar>(spec.target(static_cast<std::uint64_t>(k + 1)));
  }
  Vec<Scalar> c = c0 ? *c0 : auto_guess<Scalar>(spec.t);
  if (c.size() != t) throw ValueError("initial vector must have length t");
  for (Eigen::Index i = 0; i < t; ++i) {
    if (!(c(i) > Scalar(0))) throw ValueError("initial vector must be positive");
  }

  Solution<Scalar> sol;
  Vec<Scalar> f = evaluate_system<Scalar>(c) - target;
  Scalar res = detail::max_abs<Scalar>(f);
  const Scalar tol(opt.tol);
  std::uint64_t it = 0;
  for (; it < opt.max_iter && res > tol; ++it) {
    const Mat<Scalar> jac = jacobian<Scalar>(c);
    Eigen::PartialPivLU<Mat<Scalar>> lu(jac);
    const Mat<Scalar>& packed = lu.matrixLU();
    Scalar min_pivot = abs(packed(0, 0));
    for (Eigen::Index i = 1; i < t; ++i) {
      Scalar p = abs(packed(i, i));
      if (p < min_pivot) min_pivot = p;
    }
    if (min_pivot < Scalar(opt.singular_pivot)) {
      sol.status = SolveStatus::SingularJacobian;
      sol.diagnostic = "pivot below threshold at iteration " + std::to_string(it);
      break;
    }
    const Vec<Scalar> step = lu.solve(Vec<Scalar>(-f));
    Scalar lambda(1);
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h, lambda /= 2) {
      Vec<Scalar> trial = c + lambda * step;
      bool positive = true;
      for (Eigen::Index i = 0; i < t; ++i) {
        if (!(trial(i) > Scalar(0))) {
          positive = false;
          break;
        }
      }
      if (!positive) continue;
      Vec<Scalar> ft = evaluate_system<Scalar>(trial) - target;
      Scalar rt = detail::max_abs<Scalar>(ft);
      if (rt < res) {
        c = std::move(trial);
        f = std::move(ft);
        res = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      sol.diagnostic = "line search failed at iteration " + std::to_string(it);
      break;
    }
  }
  sol.c = c;
  sol.residual = res;
  sol.iterations = it;
  sol.in_region = in_region<Scalar>(c);
  if (res <= tol) {
    sol.status = SolveStatus::Converged;
  } else if (sol.status != SolveStatus::SingularJacobian) {
    sol.status = SolveStatus::NoConvergence;
    if (sol.diagnostic.empty()) sol.diagnostic = "iteration limit reached";
  }
  return sol;
}

struct ScanRow {
  std::uint64_t t = 0;
  bool converged = false;
  double residual = 0;
  bool in_region = false;
  std::uint64_t iterations = 0;
  std::vector<double> c;
  std::string status;
};

/// Newton from the automatic guess for every t in [t_min, t_max], at default precision.
std::vector<ScanRow> scan_region(std::uint64_t t_min, std::uint64_t t_max, double tol = 1e-10);

/// Solve at the default Float precision and return the solution.
Solution<Float> solve_default(const SystemSpec& spec, std::optional<std::vector<double>> c0 = std::nullopt,
                              const NewtonOptions& opt = {});

/// Coefficients (ascending powers) of the two reference polynomials.
const std::vector<long long>& p3_coefficients();
const std::vector<long long>& p4_coefficients();

template <class Scalar>
Scalar eval_polynomial(const std::vector<long long>& coeffs, const Scalar& x) {
  Scalar acc(0);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + Scalar(*it);
  return acc;
}

template <class Scalar>
std::pair<Scalar, Scalar> eval_reference_polynomials(const Scalar& x) {
  return {eval_polynomial(p3_coefficients(), x), eval_polynomial(p4_coefficients(), x)};
}

}  // namespace cantor
