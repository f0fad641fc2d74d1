#pragma once

#include "mpoc/smooth_map.hpp"

#include <limits>
#include <string>

namespace mpoc {

// General smooth nonlinear program
//
//   minimize    f(x)
//   subject to  c_eq(x)  = 0
//               c_ineq(x) >= 0
//
// Either constraint map may be empty.
struct Nlp {
  int n = 0;
  SmoothMap f;
  SmoothMap c_eq;
  SmoothMap c_ineq;
};

struct SqpOptions {
  int max_iterations = 500;
  double kkt_tol = 1e-10;
  // The exact Lagrangian Hessian is shifted by a multiple of the identity so
  // its smallest eigenvalue is at least this value before each subproblem.
  double hessian_floor = 1e-8;
  double armijo_slope = 1e-4;
  double min_step = 1e-12;
};

struct NlpResult {
  Vector x;
  Vector lambda_eq;    // multipliers for c_eq = 0
  Vector lambda_ineq;  // multipliers for c_ineq >= 0, nonnegative
  bool converged = false;
  int iterations = 0;
  double kkt_residual = std::numeric_limits<double>::infinity();
  std::string failure;  // empty when converged
};

// Max-norm KKT residual: stationarity of the Lagrangian
// f - lambda_eq'c_eq - lambda_ineq'c_ineq, primal feasibility, multiplier
// sign, and complementarity min(lambda_ineq, max(0, c_ineq)).
double nlp_kkt_residual(const Nlp& nlp, const Vector& x, const Vector& lambda_eq,
                        const Vector& lambda_ineq);

// Sequential quadratic programming with exact (regularized) Hessians, a dual
// active-set QP subproblem, and an l1-merit backtracking line search. Returns
// a non-converged result (never throws) when the iteration cap is hit or the
// line search stalls.
NlpResult solve_nlp(const Nlp& nlp, const Vector& x0, const SqpOptions& options = {});

}  // namespace mpoc
