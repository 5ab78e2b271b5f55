#include <cmath>

#include "cantor/errors.hpp"
#include "cantor/solver.hpp"
#include "doctest.h"
#include "gen.hpp"

using namespace cantor;

namespace {

Vec<Rational> rvec(std::initializer_list<Rational> v) {
  Vec<Rational> out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const auto& x : v) out(i++) = x;
  return out;
}

// Closed forms of c_1, c_3, c_4 as degree-9 polynomials in c_2 for t = 4.
Float closed_poly(const std::vector<Rational>& coeffs, const Float& d) {
  Float acc(0);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * d + to_float(*it);
  return acc;
}

}  // namespace

TEST_CASE("consecutive product system") {
  const Vec<Rational> e = evaluate_system<Rational>(rvec({3, 2, 1}));
  CHECK(e(0) == 6);
  CHECK(e(1) == 8);
  CHECK(e(2) == 6);
  const Vec<Rational> big = evaluate_system<Rational>(rvec({5, 1, 1, 1, 1}));
  for (Eigen::Index k = 0; k < 5; ++k) CHECK(big(k) == 9 - k);
  const Vec<Rational> ones = evaluate_system<Rational>(rvec({1, 1, 1, 1, 1, 1}));
  for (Eigen::Index k = 0; k < 6; ++k) CHECK(ones(k) == 6 - k);
}

TEST_CASE("Jacobian against exact differences") {
  const Mat<Rational> j = jacobian<Rational>(rvec({3, 2, 1}));
  CHECK(j(1, 1) == 4);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(j(0, i) == 1);
  CHECK(jacobian<Rational>(rvec({Rational(5), Rational(7)}))(1, 0) == 7);
  // e_k is multilinear, so a unit forward difference in c_i equals the exact partial
  gen::Source src(81);
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = static_cast<Eigen::Index>(src.between(2, 9));
    Vec<Rational> c(t);
    for (Eigen::Index i = 0; i < t; ++i) c(i) = Rational(BigInt(src.between(1, 20)), BigInt(src.between(1, 7)));
    const Mat<Rational> jac = jacobian<Rational>(c);
    const Vec<Rational> base = evaluate_system<Rational>(c);
    for (Eigen::Index i = 0; i < t; ++i) {
      Vec<Rational> bumped = c;
      bumped(i) += 1;
      const Vec<Rational> diff = evaluate_system<Rational>(bumped) - base;
      for (Eigen::Index k = 0; k < t; ++k) CHECK(jac(k, i) == diff(k));
    }
  }
}

TEST_CASE("Newton solutions") {
  // (2, 2) is a double root, so Newton converges linearly and the error is near sqrt(tol)
  const auto s2 = solve_default(SystemSpec{2, {}});
  CHECK(s2.status == SolveStatus::Converged);
  CHECK(std::abs(s2.c(0).convert_to<double>() - 2) < 1e-4);
  CHECK(std::abs(s2.c(1).convert_to<double>() - 2) < 1e-4);
  const auto s3 = solve_default(SystemSpec{3, {}});
  REQUIRE(s3.status == SolveStatus::Converged);
  CHECK(s3.in_region);
  CHECK(std::abs(s3.c(1).convert_to<double>() - (3 - std::sqrt(3.0))) < 1e-10);
  CHECK(std::abs(eval_polynomial(p3_coefficients(), s3.c(1)).convert_to<double>()) < 1e-10);
  CHECK(eval_polynomial(p3_coefficients(), Float(0)) == 6);
}

TEST_CASE("t = 4 closed forms in c_2") {
  const std::vector<Rational> c1{Rational(-36284, 837),   Rational(-18017, 837),   Rational(494839, 837),
                                 Rational(-1047643, 837), Rational(8278819, 6696), Rational(-4579775, 6696),
                                 Rational(238999, 1116),  Rational(-108529, 2976), Rational(41431, 13392),
                                 Rational(-1345, 13392)};
  const std::vector<Rational> c3{Rational(9352, 837),    Rational(-10469, 837),  Rational(-25058, 837),
                                 Rational(71483, 837),   Rational(-147347, 1674), Rational(39620, 837),
                                 Rational(-31525, 2232), Rational(214, 93),       Rational(-10103, 53568),
                                 Rational(5, 837)};
  const std::vector<Rational> c4{Rational(33628, 837),     Rational(27649, 837),     Rational(-469781, 837),
                                 Rational(976160, 837),    Rational(-7689431, 6696), Rational(4262815, 6696),
                                 Rational(-446473, 2232),  Rational(101681, 2976),   Rational(-155621, 53568),
                                 Rational(1265, 13392)};
  NewtonOptions opt;
  opt.tol = 1e-30;
  const auto s = solve_default(SystemSpec{4, {}}, std::nullopt, opt);
  REQUIRE(s.status == SolveStatus::Converged);
  const Float d = s.c(1);
  CHECK(std::abs(eval_polynomial(p4_coefficients(), d).convert_to<double>()) < 1e-20);
  CHECK(std::abs(Float(closed_poly(c1, d) - s.c(0)).convert_to<double>()) < 1e-15);
  CHECK(std::abs(Float(closed_poly(c3, d) - s.c(2)).convert_to<double>()) < 1e-15);
  CHECK(std::abs(Float(closed_poly(c4, d) - s.c(3)).convert_to<double>()) < 1e-15);
}

TEST_CASE("region membership") {
  Vec<double> c(4);
  c << 6, 1, 1, 1;
  CHECK_FALSE(in_region<double>(c));
  c << 4.30783, 1.15177, 1.23808, 1.30231;
  CHECK(in_region<double>(c));
  Vec<double> two(2);
  two << 2, 2;
  CHECK(in_region<double>(two));
  CHECK_THROWS_AS(in_region<double>(Vec<double>::Ones(1)), ValueError);
}

TEST_CASE("region scan") {
  const auto rows = scan_region(3, 4);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.converged);
    CHECK(r.in_region);
  }
  const auto two = scan_region(2, 2);
  REQUIRE(two.size() == 1);
  CHECK(two[0].in_region);
}

TEST_CASE("solver input validation") {
  CHECK_THROWS_AS(solve_default(SystemSpec{1, {}}), ValueError);
  CHECK_THROWS_AS(solve_default(SystemSpec{3, {Rational(0)}}), ValueError);
  CHECK_THROWS_AS(solve_default(SystemSpec{3, {}}, std::vector<double>{1, -1, 1}), ValueError);
}

TEST_CASE("perturbed right-hand sides") {
  // the solution of the perturbed system reproduces (2 + eps_k) t
  SystemSpec spec{5, {Rational(1, 10), Rational(0), Rational(1, 10), Rational(0), Rational(1, 10)}};
  const auto s = solve_default(spec);
  REQUIRE(s.status == SolveStatus::Converged);
  const Vec<Float> e = evaluate_system<Float>(s.c);
  for (std::uint64_t k = 1; k <= 5; ++k) {
    CHECK(std::abs(Float(e(static_cast<Eigen::Index>(k - 1)) - to_float(spec.target(k))).convert_to<double>()) < 1e-9);
  }
}
