#include "evcoord/conic/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hsd_solver.hpp"
#include "standard_form.hpp"

namespace evcoord::conic {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Max violation over all original constraints, each normalized by 1 + |rhs|.
double max_relative_violation(const ConicProgram& prog, const std::vector<double>& x) {
  double worst = 0.0;
  auto note = [&](double v) { worst = std::max(worst, v); };
  for (int j = 0; j < prog.num_variables(); ++j) {
    const auto& v = prog.variables()[static_cast<size_t>(j)];
    const double val = x[static_cast<size_t>(j)];
    if (v.lower != -kInf) note((v.lower - val) / (1.0 + std::abs(v.lower)));
    if (v.upper != kInf) note((val - v.upper) / (1.0 + std::abs(v.upper)));
  }
  auto row_value = [&](const ConicProgram::LinearRow& r) {
    double s = 0.0;
    for (const auto& [var, c] : r.terms) s += c * x[static_cast<size_t>(var)];
    return s;
  };
  for (const auto& r : prog.equalities()) note(std::abs(row_value(r) - r.rhs) / (1.0 + std::abs(r.rhs)));
  for (const auto& r : prog.inequalities()) note((row_value(r) - r.rhs) / (1.0 + std::abs(r.rhs)));
  for (const auto& cone : prog.cones()) {
    const double t = cone.t.evaluate(x);
    const double u = cone.u.evaluate(x);
    double wsq = 0.0;
    for (const auto& e : cone.w) {
      const double v = e.evaluate(x);
      wsq += v * v;
    }
    const double scale = 1.0 + std::abs(t * u) + wsq;
    note(-t / scale);
    note(-u / scale);
    note((wsq - t * u) / scale);
  }
  return worst;
}
}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::iteration_limit: return "iteration-limit";
  }
  return "?";
}

double Solution::value(VariableRef v) const {
  if (status != SolveStatus::optimal) throw std::logic_error("Solution::value: solution is not optimal");
  if (!v.valid() || static_cast<size_t>(v.id) >= values.size())
    throw std::out_of_range("Solution::value: unknown variable ref");
  return values[static_cast<size_t>(v.id)];
}

double Solution::eq_dual(EqRef r) const {
  if (status != SolveStatus::optimal) throw std::logic_error("Solution::eq_dual: solution is not optimal");
  if (!r.valid() || static_cast<size_t>(r.idx) >= eq_duals.size())
    throw std::out_of_range("Solution::eq_dual: unknown equality ref");
  return eq_duals[static_cast<size_t>(r.idx)];
}

std::vector<double> extract(const Solution& solution, std::span<const VariableRef> refs) {
  std::vector<double> out;
  out.reserve(refs.size());
  for (const VariableRef& r : refs) out.push_back(solution.value(r));
  return out;
}

Solution solve(const ConicProgram& prog, const SolveOptions& opts) {
  Solution sol;
  const detail::StandardForm sf = detail::build_standard_form(prog);
  if (sf.presolve_infeasible) {
    sol.status = SolveStatus::infeasible;
    return sol;
  }

  if (sf.n == 0) {
    // Everything was fixed by presolve and all rows checked out.
    sol.status = SolveStatus::optimal;
    sol.values = sf.var_fixed;
    sol.objective = prog.objective_at(sol.values);
    sol.eq_duals.assign(static_cast<size_t>(prog.num_equalities()), kNan);
    sol.max_violation = max_relative_violation(prog, sol.values);
    if (sol.max_violation > opts.tol) sol.status = SolveStatus::iteration_limit;
    return sol;
  }

  detail::HsdSettings st;
  st.feastol = std::min(opts.tol, 1e-8);
  st.abstol = std::min(opts.tol, 1e-8);
  st.reltol = std::min(opts.tol, 1e-9);
  st.max_iter = opts.max_iter;
  const detail::HsdResult hsd = detail::solve_hsd(sf, st);
  sol.iterations = hsd.iterations;
  sol.gap = hsd.gap;

  switch (hsd.status) {
    case detail::HsdResult::Status::primal_infeasible:
      sol.status = SolveStatus::infeasible;
      return sol;
    case detail::HsdResult::Status::dual_infeasible:
      sol.status = SolveStatus::unbounded;
      return sol;
    case detail::HsdResult::Status::max_iter:
      sol.status = SolveStatus::iteration_limit;
      return sol;
    case detail::HsdResult::Status::optimal:
      break;
  }

  sol.status = SolveStatus::optimal;
  sol.values.assign(static_cast<size_t>(sf.n_orig), 0.0);
  for (int j = 0; j < sf.n_orig; ++j) {
    const int col = sf.var_col[static_cast<size_t>(j)];
    sol.values[static_cast<size_t>(j)] =
        (col < 0) ? sf.var_fixed[static_cast<size_t>(j)] : sf.col_scale[col] * hsd.x[col];
  }
  sol.objective = prog.objective_at(sol.values);
  sol.eq_duals.assign(static_cast<size_t>(prog.num_equalities()), kNan);
  for (int i = 0; i < prog.num_equalities(); ++i) {
    const int row = sf.eq_row[static_cast<size_t>(i)];
    if (row >= 0) sol.eq_duals[static_cast<size_t>(i)] = -sf.eq_scale[row] * hsd.y[row];
  }
  sol.max_violation = max_relative_violation(prog, sol.values);
  if (sol.max_violation > opts.tol) sol.status = SolveStatus::iteration_limit;
  return sol;
}

}  // namespace evcoord::conic
