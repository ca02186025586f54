#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "evcoord/conic/expr.hpp"

namespace evcoord::conic {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Handle to one equality row, usable for dual lookup after a solve.
struct EqRef {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

/// Convex program in the shape every other module targets:
/// minimize  linear + sum_k w_k * (affine_k)^2      (w_k >= 0)
/// subject to  equality rows, inequality rows (<=),
///             rotated cones t*u >= ||w||^2 with t,u affine,
///             and per-variable bounds.
///
/// The weighted-squares objective is a positive-semidefinite quadratic
/// form by construction; negative weights are rejected when added.
/// Programs are immutable once handed to solve().
class ConicProgram {
 public:
  struct Variable {
    std::string name;
    double lower = -kInf;
    double upper = kInf;
  };
  struct LinearRow {           // terms . x  (cmp)  rhs
    std::vector<std::pair<int, double>> terms;
    double rhs = 0.0;
  };
  struct RotatedCone {         // t*u >= ||w||^2, t,u >= 0
    LinExpr t, u;
    std::vector<LinExpr> w;
  };
  struct QuadCost {            // weight * (expr)^2
    double weight = 0.0;
    LinExpr expr;
  };

  VariableRef add_variable(std::string name, double lower = -kInf, double upper = kInf);

  void add_linear_cost(const LinExpr& e);
  void add_constant_cost(double c) { obj_constant_ += c; }
  void add_quadratic_cost(double weight, const LinExpr& expr);

  EqRef add_equality(const LinExpr& lhs, const LinExpr& rhs = LinExpr(0.0));
  void add_inequality(const LinExpr& lhs, const LinExpr& rhs);  // lhs <= rhs
  void add_rotated_cone(LinExpr t, LinExpr u, std::vector<LinExpr> w);

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_equalities() const { return static_cast<int>(eqs_.size()); }
  int num_inequalities() const { return static_cast<int>(ineqs_.size()); }
  int num_cones() const { return static_cast<int>(cones_.size()); }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<LinearRow>& equalities() const { return eqs_; }
  const std::vector<LinearRow>& inequalities() const { return ineqs_; }
  const std::vector<RotatedCone>& cones() const { return cones_; }
  const std::vector<std::pair<int, double>>& linear_cost() const { return obj_linear_; }
  double constant_cost() const { return obj_constant_; }
  const std::vector<QuadCost>& quadratic_cost() const { return obj_quad_; }

  /// Objective value at a full assignment (indexed by variable id).
  double objective_at(const std::vector<double>& values) const;

  /// Human-readable listing of objective and constraints, for diagnosis.
  void dump(std::ostream& os) const;

 private:
  void check_expr(const LinExpr& e, const char* where) const;

  std::vector<Variable> vars_;
  std::vector<LinearRow> eqs_;
  std::vector<LinearRow> ineqs_;
  std::vector<RotatedCone> cones_;
  std::vector<std::pair<int, double>> obj_linear_;
  std::vector<QuadCost> obj_quad_;
  double obj_constant_ = 0.0;
};

}  // namespace evcoord::conic
