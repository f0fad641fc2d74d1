#include "mpoc/stationarity.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mpoc {

namespace {

// Row ranges of the active gradient stack, in stacking order.
struct StackLayout {
  int n_lambda = 0, n_mu = 0, n_sigma1 = 0, n_sigma2 = 0, n_biactive = 0;
  int rows() const { return n_lambda + n_mu + n_sigma1 + n_sigma2 + 2 * n_biactive; }
};

StackLayout layout_of(const MpocProblem& problem, const ActivePattern& pattern) {
  StackLayout l;
  l.n_lambda = problem.num_equalities();
  l.n_mu = static_cast<int>(pattern.J0.size());
  l.n_sigma1 = static_cast<int>(pattern.a01.size());
  l.n_sigma2 = static_cast<int>(pattern.a10.size());
  l.n_biactive = static_cast<int>(pattern.a00.size());
  return l;
}

}  // namespace

const char* to_string(ConditionTag tag) {
  switch (tag) {
    case ConditionTag::GRAD_RESIDUAL: return "GRAD_RESIDUAL";
    case ConditionTag::MU_SIGN: return "MU_SIGN";
    case ConditionTag::RHO_SIGN: return "RHO_SIGN";
  }
  return "?";
}

Matrix active_gradient_stack(const MpocProblem& problem, const Vector& x,
                             const ActivePattern& pattern) {
  const StackLayout l = layout_of(problem, pattern);
  Matrix stack(l.rows(), problem.n);
  int row = 0;
  if (l.n_lambda > 0) {
    stack.topRows(l.n_lambda) = problem.h.jacobian(x);
    row += l.n_lambda;
  }
  if (l.n_mu > 0) {
    Matrix Jg = problem.g.jacobian(x);
    for (int j : pattern.J0) stack.row(row++) = Jg.row(j);
  }
  if (l.n_sigma1 + l.n_sigma2 + l.n_biactive > 0) {
    Matrix J1 = problem.F1.jacobian(x);
    Matrix J2 = problem.F2.jacobian(x);
    for (int m : pattern.a01) stack.row(row++) = J1.row(m);
    for (int m : pattern.a10) stack.row(row++) = J2.row(m);
    for (int m : pattern.a00) stack.row(row++) = J1.row(m);
    for (int m : pattern.a00) stack.row(row++) = J2.row(m);
  }
  return stack;
}

LicqReport licq_check(const MpocProblem& problem, const Vector& x,
                      const ActivePattern& pattern, const Tolerances& tol) {
  tol.validate();
  Matrix stack = active_gradient_stack(problem, x, pattern);
  LicqReport rep;
  rep.active_gradient_count = static_cast<int>(stack.rows());
  if (stack.rows() == 0) {
    rep.holds = true;
    rep.min_singular_value = std::numeric_limits<double>::infinity();
    return rep;
  }
  Eigen::JacobiSVD<Matrix> svd(stack);
  rep.min_singular_value = svd.singularValues().minCoeff();
  rep.holds = stack.rows() <= problem.n && rep.min_singular_value > tol.eigen_singularity;
  return rep;
}

MultiplierSet solve_multipliers(const MpocProblem& problem, const Vector& x,
                                const ActivePattern& pattern,
                                const Tolerances& tol) {
  tol.validate();
  const StackLayout l = layout_of(problem, pattern);
  Matrix stack = active_gradient_stack(problem, x, pattern);
  Vector grad = gradient(problem.f, x);

  MultiplierSet out;
  if (stack.rows() == 0) {
    out.lambda = out.mu = out.sigma1 = out.sigma2 = out.rho1 = out.rho2 = Vector(0);
    out.residual_norm = grad.norm();
    return out;
  }

  Eigen::JacobiSVD<Matrix> svd(stack.transpose(),
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector w = svd.solve(grad);
  out.residual_norm = (stack.transpose() * w - grad).norm();
  out.minimum_norm_fallback = svd.rank() < stack.rows();

  int row = 0;
  auto take = [&](int count) {
    Vector part = w.segment(row, count);
    row += count;
    return part;
  };
  out.lambda = take(l.n_lambda);
  out.mu = take(l.n_mu);
  out.sigma1 = take(l.n_sigma1);
  out.sigma2 = take(l.n_sigma2);
  out.rho1 = take(l.n_biactive);
  out.rho2 = take(l.n_biactive);
  return out;
}

StationarityCertificate t_stationarity_check(const MpocProblem& problem,
                                             const Vector& x,
                                             const Tolerances& tol) {
  StationarityCertificate cert;
  cert.point = x;
  cert.pattern = active_sets(problem, x, tol);  // raises on infeasible x
  cert.licq = licq_check(problem, x, cert.pattern, tol);
  cert.multipliers = solve_multipliers(problem, x, cert.pattern, tol);

  const MultiplierSet& m = cert.multipliers;
  if (m.residual_norm > tol.stationarity_residual)
    cert.violated_conditions.push_back(ConditionTag::GRAD_RESIDUAL);
  if ((m.mu.array() < -tol.multiplier_zero).any())
    cert.violated_conditions.push_back(ConditionTag::MU_SIGN);
  for (Eigen::Index i = 0; i < m.rho1.size(); ++i) {
    const bool rho1_zero = std::abs(m.rho1[i]) <= tol.multiplier_zero;
    const bool rho2_nonpos = m.rho2[i] <= tol.multiplier_zero;
    if (!rho1_zero && !rho2_nonpos) {
      cert.violated_conditions.push_back(ConditionTag::RHO_SIGN);
      break;
    }
  }
  cert.is_t_stationary = cert.violated_conditions.empty();
  return cert;
}

}  // namespace mpoc
