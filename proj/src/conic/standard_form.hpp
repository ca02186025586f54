#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "evcoord/conic/program.hpp"

namespace evcoord::conic::detail {

// Conic standard form assembled from a ConicProgram:
//   min c'x + obj_const   s.t.  A x = b,  G x + s = h,  s in R+^l x SOC(soc_dims)
//
// The quadratic objective is moved into epigraph variables (one per
// weighted square, each backed by a dim-3 cone), variable bounds become
// rows of G, and rotated cones t*u >= ||w||^2 become standard cones
// (t+u, t-u, 2w). A light presolve first fixes variables with equal
// bounds, folds singleton rows into bounds, and drops constant rows so
// the cone program keeps a nonempty relative interior where possible.
struct StandardForm {
  Eigen::SparseMatrix<double> A, G;
  Eigen::VectorXd b, h, c;
  double obj_const = 0.0;
  int n = 0;  // columns (surviving vars + epigraph vars)
  int p = 0;  // equality rows
  int m = 0;  // cone rows
  int l = 0;  // leading nonnegative-orthant rows of G
  std::vector<int> soc_dims;

  bool presolve_infeasible = false;
  std::string presolve_reason;

  int n_orig = 0;
  std::vector<int> var_col;       // var id -> column, or -1 when fixed
  std::vector<double> var_fixed;  // value for fixed vars
  std::vector<int> eq_row;        // original eq idx -> row of A, or -1 when eliminated

  // Ruiz equilibration scales: the solver sees  (E A D, F G D, E b, F h, D c).
  // Map back with  x = D x~,  y = E y~,  z = F z~.
  Eigen::VectorXd col_scale, eq_scale, cone_scale;
};

StandardForm build_standard_form(const ConicProgram& program);

}  // namespace evcoord::conic::detail
