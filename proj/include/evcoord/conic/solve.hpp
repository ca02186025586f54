#pragma once

#include <span>
#include <vector>

#include "evcoord/conic/program.hpp"

namespace evcoord::conic {

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(SolveStatus s);

struct SolveOptions {
  /// Feasibility tolerance the returned solution is certified against,
  /// measured per constraint relative to 1 + |rhs|. The interior-point
  /// loop itself targets min(tol, 1e-8).
  double tol = 1e-8;
  int max_iter = 100;
};

struct Solution {
  SolveStatus status = SolveStatus::iteration_limit;
  double objective = 0.0;
  /// Primal values indexed by variable id; empty unless status == optimal.
  std::vector<double> values;
  /// Shadow price per equality row: d(objective)/d(rhs). NaN for rows the
  /// presolve eliminated. Empty unless status == optimal.
  std::vector<double> eq_duals;
  /// Max relative violation over all constraints at the returned point.
  double max_violation = 0.0;
  /// Absolute duality gap reported by the interior-point method.
  double gap = 0.0;
  int iterations = 0;

  double value(VariableRef v) const;
  double eq_dual(EqRef r) const;
};

Solution solve(const ConicProgram& program, const SolveOptions& opts = {});

/// Values of `refs` in declaration order. The solution must be optimal and
/// every ref must belong to it; anything else throws.
std::vector<double> extract(const Solution& solution, std::span<const VariableRef> refs);

}  // namespace evcoord::conic
