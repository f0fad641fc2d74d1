#pragma once

#include "mpoc/smooth_map.hpp"

#include <limits>

namespace mpoc {

// Strictly convex quadratic program
//
//   minimize    0.5 x'Gx + a'x
//   subject to  Ae x  = be
//               Ai x >= bi
//
// G must be symmetric positive definite.
struct QpProblem {
  Matrix G;
  Vector a;
  Matrix Ae;  // num_eq x n (may be 0 x n)
  Vector be;
  Matrix Ai;  // num_ineq x n (may be 0 x n)
  Vector bi;
};

struct QpResult {
  Vector x;
  Vector lambda_eq;    // free sign, one per equality row
  Vector lambda_ineq;  // >= 0, zero for inactive rows
  bool solved = false; // false: constraints were detected to be inconsistent
  int iterations = 0;
  double objective = std::numeric_limits<double>::quiet_NaN();
};

// Dual active-set method (Goldfarb–Idnani). Starts from the unconstrained
// minimizer and adds violated constraints one at a time, keeping the iterate
// optimal for the current working set; equalities are incorporated first.
// Infeasibility shows up as an unbounded dual step and yields solved=false.
QpResult qp_solve(const QpProblem& qp, double feasibility_tol = 1e-10);

}  // namespace mpoc
