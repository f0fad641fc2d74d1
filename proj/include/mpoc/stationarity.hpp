#pragma once

// T-stationarity testing.  At a feasible point with activity pattern
// (J0, a01, a10, a00) the stationarity equation reads
//
//   Df(x) = sum_i lambda_i Dh_i + sum_{J0} mu_j Dg_j
//         + sum_{a01} sigma1_m DF1_m + sum_{a10} sigma2_m DF2_m
//         + sum_{a00} (rho1_m DF1_m + rho2_m DF2_m)
//
// with mu_j >= 0 and, for every biactive pair, rho1_m = 0 or rho2_m <= 0.
// Multipliers are recovered by least squares on the stacked active gradients;
// under LICQ the solution is unique, otherwise the minimum-norm solution is
// returned and flagged.

#include "mpoc/problem.hpp"

#include <vector>

namespace mpoc {

struct LicqReport {
  bool holds = true;
  double min_singular_value = 0.0;  // +inf for an empty stack
  int active_gradient_count = 0;
};

struct MultiplierSet {
  Vector lambda;  // equalities, |I|
  Vector mu;      // active inequalities, |J0|, ordered like pattern.J0
  Vector sigma1;  // pairs in a01
  Vector sigma2;  // pairs in a10
  Vector rho1;    // pairs in a00
  Vector rho2;    // pairs in a00
  double residual_norm = 0.0;
  bool minimum_norm_fallback = false;  // least-squares system was rank deficient
};

enum class ConditionTag { GRAD_RESIDUAL, MU_SIGN, RHO_SIGN };

const char* to_string(ConditionTag tag);

struct StationarityCertificate {
  Vector point;
  ActivePattern pattern;
  LicqReport licq;
  MultiplierSet multipliers;
  bool is_t_stationary = false;
  std::vector<ConditionTag> violated_conditions;
};

// Rows, in order: Dh_i (all i), Dg_j (j in J0), DF1_m (m in a01),
// DF2_m (m in a10), DF1_m (m in a00), DF2_m (m in a00).
Matrix active_gradient_stack(const MpocProblem& problem, const Vector& x,
                             const ActivePattern& pattern);

LicqReport licq_check(const MpocProblem& problem, const Vector& x,
                      const ActivePattern& pattern, const Tolerances& tol = {});

// Least squares min ||stack' w - Df(x)'||_2.  An empty stack yields empty
// multipliers with residual ||Df(x)||.
MultiplierSet solve_multipliers(const MpocProblem& problem, const Vector& x,
                                const ActivePattern& pattern,
                                const Tolerances& tol = {});

// Requires a feasible x (std::invalid_argument otherwise).  The verdict is
// positive iff the residual is within tol.stationarity_residual, every mu_j
// clears -tol.multiplier_zero, and every biactive pair satisfies
// |rho1_m| <= tol.multiplier_zero or rho2_m <= tol.multiplier_zero.
StationarityCertificate t_stationarity_check(const MpocProblem& problem,
                                             const Vector& x,
                                             const Tolerances& tol = {});

}  // namespace mpoc
