#pragma once

#include <Eigen/Sparse>

#include "standard_form.hpp"

namespace evcoord::conic::detail {

struct HsdSettings {
  double feastol = 1e-8;
  double abstol = 1e-8;
  double reltol = 1e-9;
  // accepted at a stall / iteration cap when the full tolerances were missed
  double feastol_reduced = 1e-5;
  double abstol_reduced = 1e-5;
  double reltol_reduced = 1e-6;
  int max_iter = 100;
  double step_frac = 0.99;
  double static_reg = 1e-8;
};

struct HsdResult {
  enum class Status { optimal, primal_infeasible, dual_infeasible, max_iter };
  Status status = Status::max_iter;
  Eigen::VectorXd x, y, z, s;  // tau-normalized when optimal
  int iterations = 0;
  double gap = 0.0;
  double pres = 0.0, dres = 0.0;
};

// Homogeneous self-dual interior-point method for
//   min c'x  s.t.  A x = b,  G x + s = h,  s in R+^l x SOC(dims),
// with Nesterov-Todd scaling and a Mehrotra predictor-corrector step.
HsdResult solve_hsd(const StandardForm& sf, const HsdSettings& settings);

}  // namespace evcoord::conic::detail
