#pragma once

// Problem data for mathematical programs with orthogonality-type constraints:
//
//   min f(x)  s.t.  h(x) = 0,  g(x) >= 0,  F1_m(x) * F2_m(x) = 0,  F2_m(x) >= 0
//
// together with feasibility testing and the activity pattern of the
// orthogonality pairs at a given point.

#include "mpoc/smooth_map.hpp"

#include <string>
#include <vector>

namespace mpoc {

struct Tolerances {
  double activity = 1e-8;              // |value| <= activity counts as zero
  double stationarity_residual = 1e-8; // stationarity equation residual bound
  double eigen_singularity = 1e-8;     // singular-value / eigenvalue zero cutoff
  double multiplier_zero = 1e-7;       // multiplier sign / zero cutoff
  double feasibility = 1e-8;           // constraint violation bound

  void validate() const;
};

struct MpocProblem {
  int n = 0;
  SmoothMap f;   // scalar objective
  SmoothMap h;   // equalities, h(x) = 0
  SmoothMap g;   // inequalities, g(x) >= 0
  SmoothMap F1;  // orthogonality pairs: F1_m(x) * F2_m(x) = 0
  SmoothMap F2;  //                       F2_m(x) >= 0

  int num_equalities() const { return h.output_dim; }
  int num_inequalities() const { return g.output_dim; }
  int num_pairs() const { return F1.output_dim; }
};

// Validates dimensions (every map consumes R^n, f scalar, F1/F2 paired).
MpocProblem make_problem(int n, SmoothMap f, SmoothMap h, SmoothMap g,
                         SmoothMap F1, SmoothMap F2);

struct FeasibilityReport {
  bool feasible = false;
  double max_violation = 0.0;  // max over |h_i|, max(0,-g_j), |F1_m F2_m|, max(0,-F2_m)
};

FeasibilityReport feasibility_check(const MpocProblem& problem, const Vector& x,
                                    const Tolerances& tol = {});

// Activity pattern at a feasible point.  Index sets hold 0-based indices,
// sorted ascending.  A pair is biactive when both |F1_m| and |F2_m| fall
// within tol.activity (ties at the tolerance count as active).
struct ActivePattern {
  std::vector<int> J0;   // active inequalities
  std::vector<int> a01;  // F1_m = 0, F2_m > 0
  std::vector<int> a10;  // F1_m != 0, F2_m = 0
  std::vector<int> a00;  // F1_m = 0, F2_m = 0
  int s = 0;             // |I| + |a01| + |a10|
  int q = 0;             // s + |J0|
  int p = 0;             // n - q - 2|a00|   (may be negative)
};

// Requires feasibility_check(problem, x, tol).feasible; a pair with
// |F1_m| > tol.activity and F2_m > tol.activity on a feasible point signals a
// tolerance conflict and raises std::runtime_error.
ActivePattern active_sets(const MpocProblem& problem, const Vector& x,
                          const Tolerances& tol = {});

}  // namespace mpoc
