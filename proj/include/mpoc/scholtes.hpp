#pragma once

// Regularization of the orthogonality constraints: for t > 0 the pair
// condition F1_m * F2_m = 0, F2_m >= 0 is relaxed to
//
//   -t <= F1_m(x) * F2_m(x) <= t,   F2_m(x) >= 0,
//
// which yields an ordinary smooth NLP.  KKT points of the relaxed problems
// converge to T-stationary points as t -> 0, and the T-multipliers are
// recovered from the NLP multipliers by explicit formulas.

#include "mpoc/problem.hpp"
#include "mpoc/sqp.hpp"
#include "mpoc/stationarity.hpp"

#include <string>
#include <vector>

namespace mpoc {

struct RegularizedProblem {
  MpocProblem base;
  double t = 0.0;
  // Equalities h; inequalities stacked [g; F2; F1*F2 + t; t - F1*F2].
  Nlp nlp;
};

// Requires t > 0 (std::invalid_argument otherwise).
RegularizedProblem build_regularized(const MpocProblem& problem, double t);

struct InnerKktPoint {
  Vector x;
  Vector lambda;  // equalities h
  Vector mu;      // g >= 0            (dense; zero on inactive rows)
  Vector eta;     // F2 >= 0
  Vector eta_ge;  // F1*F2 >= -t
  Vector eta_le;  // F1*F2 <= t
  double kkt_residual = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string failure;  // empty when converged
};

// KKT point of the relaxed NLP from the warm start x0.  Iteration cap or
// line-search failure yields converged=false with the best residual seen.
InnerKktPoint inner_kkt_solve(const RegularizedProblem& reg, const Vector& x0,
                              const Tolerances& tol = {});

// Multiplier recovery at an iterate near a limit point with the given
// activity pattern: with d_m = eta_ge_m - eta_le_m,
//   sigma1_m = d_m * F2_m(x)            for m in a01,
//   sigma2_m = eta_m + d_m * F1_m(x)    for m in a10,
//   rho1_m   = d_m * F2_m(x),  rho2_m = eta_m + d_m * F1_m(x)   for m in a00;
// lambda is copied and mu is restricted to the active rows J0.
MultiplierSet recover_t_multipliers(const MpocProblem& problem,
                                    const InnerKktPoint& iterate,
                                    const ActivePattern& pattern_at_limit);

struct DriveSchedule {
  double t0 = 1.0;
  double shrink = 0.1;  // t_{l+1} = shrink * t_l
  double t_min = 1e-10;

  void validate() const;
};

struct RegularizationTrace {
  std::vector<double> schedule;          // strictly decreasing t values
  std::vector<InnerKktPoint> iterates;   // one per t
  double t_final = 0.0;
  Vector limit_point;
  ActivePattern limit_pattern;
  MultiplierSet recovered;
  StationarityCertificate certificate;   // least-squares check at the limit
  double multiplier_agreement = 0.0;     // max |recovered - least-squares|
  bool converged = false;
  std::string failure_stage;             // empty when converged
};

// Activity and feasibility tolerances widened for a point that solves the
// relaxed problem at parameter t_final: residuals of order t_final are
// indistinguishable from zero there.
Tolerances limit_tolerances(const Tolerances& tol, double t_final);

// Shrinks t geometrically, warm-starting each inner solve from the previous
// iterate; stops once consecutive iterates agree within
// tol.stationarity_residual and t has reached 10 * t_min, or when the
// schedule is exhausted.  The limit point is then certified by the direct
// T-stationarity test under limit_tolerances.
RegularizationTrace drive(const MpocProblem& problem, const Vector& x0,
                          const DriveSchedule& schedule = {},
                          const Tolerances& tol = {});

}  // namespace mpoc
