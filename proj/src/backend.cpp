#include "errplan/backend.hpp"

#include "errplan/errors.hpp"

#include <cmath>

namespace errplan {

namespace {

constexpr double kFixTol = 1e-12;
constexpr double kConsistencyTol = 1e-9;

struct Builder {
  std::vector<int> column;  // original var -> column, -1 when fixed
  std::vector<int> free_vars;
  Eigen::VectorXd fixed_value;

  std::vector<Eigen::Triplet<double>> a_trip, g_trip;
  std::vector<double> b, h;
  int g_rows = 0;

  // Adds the free part of expr to row `row` of G (scaled) and returns the
  // contribution of fixed variables plus the constant.
  double add_row(std::vector<Eigen::Triplet<double>>& trip, int row, const AffineExpr& e, double scale) const {
    double fixed = e.constant;
    for (const auto& t : e.terms) {
      const int col = column[static_cast<size_t>(t.var)];
      if (col < 0)
        fixed += t.coef * fixed_value(t.var);
      else
        trip.emplace_back(row, col, scale * t.coef);
    }
    return fixed;
  }

  bool has_free(const AffineExpr& e) const {
    for (const auto& t : e.terms)
      if (column[static_cast<size_t>(t.var)] >= 0 && t.coef != 0.0) return true;
    return false;
  }
};

}  // namespace

RelaxResult IpmBackend::solve(const ConicProgram& program, const std::vector<double>& lower,
                              const std::vector<double>& upper, const Eigen::VectorXd* /*hint*/) {
  const int nv = program.num_variables();
  Builder bld;
  bld.column.assign(static_cast<size_t>(nv), -1);
  bld.fixed_value = Eigen::VectorXd::Zero(nv);
  RelaxResult out;
  for (int i = 0; i < nv; ++i) {
    const double lo = lower[static_cast<size_t>(i)];
    const double up = upper[static_cast<size_t>(i)];
    if (lo > up + kConsistencyTol) return out;  // empty box
    if (up - lo <= kFixTol) {
      bld.fixed_value(i) = 0.5 * (lo + up);
    } else {
      bld.column[static_cast<size_t>(i)] = static_cast<int>(bld.free_vars.size());
      bld.free_vars.push_back(i);
    }
  }
  const int n = static_cast<int>(bld.free_vars.size());

  // Orthant rows: linear inequalities then bounds.
  int p = 0;
  for (const auto& row : program.linear()) {
    if (!bld.has_free(row.expr)) {
      const double lhs = row.expr.eval(bld.fixed_value);
      const double tol = kConsistencyTol * (1.0 + std::abs(row.rhs));
      const bool ok = row.sense == Sense::eq   ? std::abs(lhs - row.rhs) <= tol
                      : row.sense == Sense::le ? lhs <= row.rhs + tol
                                               : lhs >= row.rhs - tol;
      if (!ok) return out;
      continue;
    }
    if (row.sense == Sense::eq) {
      const double fixed = bld.add_row(bld.a_trip, p, row.expr, 1.0);
      bld.b.push_back(row.rhs - fixed);
      ++p;
    } else {
      const double sign = row.sense == Sense::le ? 1.0 : -1.0;
      const double fixed = bld.add_row(bld.g_trip, bld.g_rows, row.expr, sign);
      bld.h.push_back(sign * (row.rhs - fixed));
      ++bld.g_rows;
    }
  }
  for (int k = 0; k < n; ++k) {
    const int i = bld.free_vars[static_cast<size_t>(k)];
    const double lo = lower[static_cast<size_t>(i)];
    const double up = upper[static_cast<size_t>(i)];
    if (std::isfinite(lo)) {
      bld.g_trip.emplace_back(bld.g_rows++, k, -1.0);
      bld.h.push_back(-lo);
    }
    if (std::isfinite(up)) {
      bld.g_trip.emplace_back(bld.g_rows++, k, 1.0);
      bld.h.push_back(up);
    }
  }
  ConeLayout layout;
  layout.orthant = bld.g_rows;

  // Cones: s = (radius, rows...) = h - G x.
  for (const auto& cone : program.soc()) {
    bool any_free = bld.has_free(cone.radius);
    for (const auto& r : cone.rows) any_free = any_free || bld.has_free(r);
    if (!any_free) {
      double nrm = 0.0;
      for (const auto& r : cone.rows) nrm += std::pow(r.eval(bld.fixed_value), 2);
      if (std::sqrt(nrm) > cone.radius.eval(bld.fixed_value) + kConsistencyTol) return out;
      continue;
    }
    const int start = bld.g_rows;
    bld.h.push_back(bld.add_row(bld.g_trip, start, cone.radius, -1.0));
    int r_idx = 1;
    for (const auto& r : cone.rows) bld.h.push_back(bld.add_row(bld.g_trip, start + r_idx++, r, -1.0));
    bld.g_rows += 1 + static_cast<int>(cone.rows.size());
    layout.soc.push_back(1 + static_cast<int>(cone.rows.size()));
  }

  const Eigen::VectorXd& c_full = program.objective();
  double offset = program.objective_offset();
  for (int i = 0; i < nv; ++i)
    if (bld.column[static_cast<size_t>(i)] < 0) offset += c_full(i) * bld.fixed_value(i);

  if (n == 0) {
    out.status = RelaxStatus::optimal;
    out.x = bld.fixed_value;
    out.objective = offset;
    return out;
  }
  if (bld.g_rows == 0) {
    // The IPM needs at least one cone; a vacuous row keeps the layout valid.
    bld.h.push_back(1.0);
    bld.g_rows = 1;
    layout.orthant = 1;
  }

  ConeProblem<double> cp;
  cp.c.resize(n);
  for (int k = 0; k < n; ++k) cp.c(k) = c_full(bld.free_vars[static_cast<size_t>(k)]);
  cp.A.resize(p, n);
  cp.A.setFromTriplets(bld.a_trip.begin(), bld.a_trip.end());
  cp.b = Eigen::Map<const Eigen::VectorXd>(bld.b.data(), p);
  cp.G.resize(bld.g_rows, n);
  cp.G.setFromTriplets(bld.g_trip.begin(), bld.g_trip.end());
  cp.h = Eigen::Map<const Eigen::VectorXd>(bld.h.data(), bld.g_rows);
  cp.cones = layout;

  InteriorPointSolver<double> ipm(settings_);
  const ConeSolution<double> sol = ipm.solve(cp);
  out.iterations = sol.iterations;
  switch (sol.status) {
    case ConeStatus::optimal:
    case ConeStatus::inaccurate: {
      out.status = RelaxStatus::optimal;
      out.reduced_accuracy = sol.status == ConeStatus::inaccurate;
      out.x = bld.fixed_value;
      for (int k = 0; k < n; ++k) out.x(bld.free_vars[static_cast<size_t>(k)]) = sol.x(k);
      out.objective = program.evaluate_objective(out.x);
      return out;
    }
    case ConeStatus::primal_infeasible:
      out.status = RelaxStatus::infeasible;
      return out;
    case ConeStatus::dual_infeasible:
      out.status = RelaxStatus::unbounded;
      return out;
    default: {
      ConicProgram sub = program;
      for (int i = 0; i < nv; ++i) {
        sub.variable(i).lower = lower[static_cast<size_t>(i)];
        sub.variable(i).upper = upper[static_cast<size_t>(i)];
      }
      std::string diag = "status: " + std::string(to_string(sol.status)) +
                         "\niterations: " + std::to_string(sol.iterations) +
                         "\nprimal residual: " + std::to_string(sol.primal_residual) +
                         "\ndual residual: " + std::to_string(sol.dual_residual) +
                         "\ngap: " + std::to_string(sol.gap) + "\n" + sol.log;
      throw NumericalFailure("interior-point backend failed: " + std::string(to_string(sol.status)),
                             diag + "\nsubproblem:\n" + sub.to_json().dump());
    }
  }
}

RelaxResult solve_continuous(const ConicProgram& program, ContinuousBackend* backend) {
  IpmBackend fallback;
  ContinuousBackend& be = backend ? *backend : fallback;
  std::vector<double> lo, up;
  lo.reserve(program.variables().size());
  up.reserve(program.variables().size());
  for (const auto& v : program.variables()) {
    lo.push_back(v.lower);
    up.push_back(v.upper);
  }
  return be.solve(program, lo, up);
}

}  // namespace errplan
