#include "mpoc/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mpoc {

void Tolerances::validate() const {
  const double all[] = {activity, stationarity_residual, eigen_singularity,
                        multiplier_zero, feasibility};
  for (double v : all) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("Tolerances: entries must be finite and nonnegative");
  }
}

MpocProblem make_problem(int n, SmoothMap f, SmoothMap h, SmoothMap g,
                         SmoothMap F1, SmoothMap F2) {
  if (n <= 0) throw std::invalid_argument("make_problem: n must be positive");
  auto check_input = [n](const SmoothMap& m, const char* name) {
    if (m.input_dim != n) {
      std::ostringstream os;
      os << "make_problem: map '" << name << "' consumes R^" << m.input_dim
         << " but the problem lives in R^" << n;
      throw std::invalid_argument(os.str());
    }
  };
  check_input(f, "f");
  check_input(h, "h");
  check_input(g, "g");
  check_input(F1, "F1");
  check_input(F2, "F2");
  if (f.output_dim != 1)
    throw std::invalid_argument("make_problem: objective must be scalar");
  if (F1.output_dim != F2.output_dim)
    throw std::invalid_argument("make_problem: F1 and F2 must have the same number of components");
  MpocProblem p;
  p.n = n;
  p.f = std::move(f);
  p.h = std::move(h);
  p.g = std::move(g);
  p.F1 = std::move(F1);
  p.F2 = std::move(F2);
  return p;
}

FeasibilityReport feasibility_check(const MpocProblem& problem, const Vector& x,
                                    const Tolerances& tol) {
  tol.validate();
  if (x.size() != problem.n)
    throw std::invalid_argument("feasibility_check: x has wrong dimension");

  double worst = 0.0;
  if (!problem.h.empty()) {
    Vector hv = problem.h.value(x);
    worst = std::max(worst, hv.cwiseAbs().maxCoeff());
  }
  if (!problem.g.empty()) {
    Vector gv = problem.g.value(x);
    worst = std::max(worst, (-gv).cwiseMax(0.0).maxCoeff());
  }
  if (problem.num_pairs() > 0) {
    Vector v1 = problem.F1.value(x);
    Vector v2 = problem.F2.value(x);
    worst = std::max(worst, v1.cwiseProduct(v2).cwiseAbs().maxCoeff());
    worst = std::max(worst, (-v2).cwiseMax(0.0).maxCoeff());
  }
  return {worst <= tol.feasibility, worst};
}

ActivePattern active_sets(const MpocProblem& problem, const Vector& x,
                          const Tolerances& tol) {
  FeasibilityReport feas = feasibility_check(problem, x, tol);
  if (!feas.feasible) {
    std::ostringstream os;
    os << "active_sets: point is infeasible (violation " << feas.max_violation
       << " > " << tol.feasibility << ")";
    throw std::invalid_argument(os.str());
  }

  ActivePattern pat;
  if (!problem.g.empty()) {
    Vector gv = problem.g.value(x);
    for (int j = 0; j < problem.num_inequalities(); ++j)
      if (std::abs(gv[j]) <= tol.activity) pat.J0.push_back(j);
  }
  if (problem.num_pairs() > 0) {
    Vector v1 = problem.F1.value(x);
    Vector v2 = problem.F2.value(x);
    for (int m = 0; m < problem.num_pairs(); ++m) {
      const bool f1_zero = std::abs(v1[m]) <= tol.activity;
      const bool f2_zero = std::abs(v2[m]) <= tol.activity;
      if (f1_zero && f2_zero) {
        pat.a00.push_back(m);
      } else if (f1_zero) {
        pat.a01.push_back(m);
      } else if (f2_zero) {
        pat.a10.push_back(m);
      } else {
        std::ostringstream os;
        os << "active_sets: pair " << m << " has |F1| = " << std::abs(v1[m])
           << " and F2 = " << v2[m]
           << " both above the activity tolerance at a feasible point; "
              "feasibility and activity tolerances conflict";
        throw std::runtime_error(os.str());
      }
    }
  }
  pat.s = problem.num_equalities() + static_cast<int>(pat.a01.size() + pat.a10.size());
  pat.q = pat.s + static_cast<int>(pat.J0.size());
  pat.p = problem.n - pat.q - 2 * static_cast<int>(pat.a00.size());
  return pat;
}

}  // namespace mpoc
