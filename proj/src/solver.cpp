#include "cantor/solver.hpp"

namespace cantor {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::NoConvergence: return "no_convergence";
    case SolveStatus::SingularJacobian: return "singular_jacobian";
  }
  return "?";
}

Solution<Float> solve_default(const SystemSpec& spec, std::optional<std::vector<double>> c0,
                              const NewtonOptions& opt) {
  std::optional<Vec<Float>> start;
  if (c0) {
    Vec<Float> v(static_cast<Eigen::Index>(c0->size()));
    for (std::size_t i = 0; i < c0->size(); ++i) v(static_cast<Eigen::Index>(i)) = Float((*c0)[i]);
    start = v;
  }
  return newton_solve<Float>(spec, start, opt);
}

std::vector<ScanRow> scan_region(std::uint64_t t_min, std::uint64_t t_max, double tol) {
  if (t_min < 2 || t_min > t_max) throw ValueError("scan needs 2 <= t_min <= t_max");
  std::vector<ScanRow> rows;
  NewtonOptions opt;
  opt.tol = tol;
  for (std::uint64_t t = t_min; t <= t_max; ++t) {
    SystemSpec spec;
    spec.t = t;
    const Solution<Float> sol = newton_solve<Float>(spec, std::nullopt, opt);
    ScanRow row;
    row.t = t;
    row.converged = sol.status == SolveStatus::Converged;
    row.residual = sol.residual.convert_to<double>();
    row.in_region = sol.in_region;
    row.iterations = sol.iterations;
    row.status = to_string(sol.status);
    for (Eigen::Index i = 0; i < sol.c.size(); ++i) row.c.push_back(sol.c(i).convert_to<double>());
    rows.push_back(std::move(row));
  }
  return rows;
}

const std::vector<long long>& p3_coefficients() {
  static const std::vector<long long> c{6, -6, 1};
  return c;
}

const std::vector<long long>& p4_coefficients() {
  static const std::vector<long long> c{-512, 0, 7680, -21248, 27456, -20544, 9376, -2568, 400, -32, 1};
  return c;
}

}  // namespace cantor
