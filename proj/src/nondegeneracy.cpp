#include "mpoc/nondegeneracy.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace mpoc {

const char* to_string(Classification c) {
  switch (c) {
    case Classification::NONDEGENERATE_LOCAL_MIN: return "NONDEGENERATE_LOCAL_MIN";
    case Classification::NONDEGENERATE_SADDLE: return "NONDEGENERATE_SADDLE";
    case Classification::DEGENERATE: return "DEGENERATE";
  }
  return "?";
}

Matrix lagrangian_hessian(const MpocProblem& problem, const Vector& x,
                          const ActivePattern& pattern,
                          const MultiplierSet& multipliers) {
  Matrix H = problem.f.component_hessian(x, 0);

  if (multipliers.lambda.size() != problem.num_equalities() ||
      multipliers.mu.size() != static_cast<Eigen::Index>(pattern.J0.size()) ||
      multipliers.sigma1.size() != static_cast<Eigen::Index>(pattern.a01.size()) ||
      multipliers.sigma2.size() != static_cast<Eigen::Index>(pattern.a10.size()) ||
      multipliers.rho1.size() != static_cast<Eigen::Index>(pattern.a00.size()) ||
      multipliers.rho2.size() != static_cast<Eigen::Index>(pattern.a00.size()))
    throw std::invalid_argument("lagrangian_hessian: multiplier sizes do not match the pattern");

  for (int i = 0; i < problem.num_equalities(); ++i)
    H -= multipliers.lambda[i] * problem.h.component_hessian(x, i);
  for (size_t k = 0; k < pattern.J0.size(); ++k)
    H -= multipliers.mu[static_cast<Eigen::Index>(k)] *
         problem.g.component_hessian(x, pattern.J0[k]);
  for (size_t k = 0; k < pattern.a01.size(); ++k)
    H -= multipliers.sigma1[static_cast<Eigen::Index>(k)] *
         problem.F1.component_hessian(x, pattern.a01[k]);
  for (size_t k = 0; k < pattern.a10.size(); ++k)
    H -= multipliers.sigma2[static_cast<Eigen::Index>(k)] *
         problem.F2.component_hessian(x, pattern.a10[k]);
  for (size_t k = 0; k < pattern.a00.size(); ++k) {
    H -= multipliers.rho1[static_cast<Eigen::Index>(k)] *
         problem.F1.component_hessian(x, pattern.a00[k]);
    H -= multipliers.rho2[static_cast<Eigen::Index>(k)] *
         problem.F2.component_hessian(x, pattern.a00[k]);
  }
  H = 0.5 * (H + H.transpose()).eval();
  return H;
}

TangentBasis tangent_basis(const MpocProblem& problem, const Vector& x,
                           const ActivePattern& pattern, const Tolerances& tol) {
  tol.validate();
  Matrix stack = active_gradient_stack(problem, x, pattern);
  TangentBasis tb;
  if (stack.rows() == 0) {
    tb.basis = Matrix::Identity(problem.n, problem.n);
    tb.p_eff = problem.n;
    return tb;
  }
  Eigen::JacobiSVD<Matrix> svd(stack, Eigen::ComputeFullV);
  const Vector sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol.eigen_singularity) ++rank;
  tb.p_eff = problem.n - rank;
  tb.basis = svd.matrixV().rightCols(tb.p_eff);
  return tb;
}

Matrix restricted_hessian(const Matrix& hessian, const TangentBasis& basis) {
  if (basis.basis.cols() == 0) return Matrix(0, 0);
  if (hessian.rows() != basis.basis.rows())
    throw std::invalid_argument("restricted_hessian: dimension mismatch");
  Matrix R = basis.basis.transpose() * hessian * basis.basis;
  return 0.5 * (R + R.transpose()).eval();
}

ClassificationResult classify_point(const MpocProblem& problem, const Vector& x,
                                    const Tolerances& tol) {
  ClassificationResult result;
  result.certificate = t_stationarity_check(problem, x, tol);
  if (!result.certificate.is_t_stationary) return result;

  const ActivePattern& pat = result.certificate.pattern;
  const MultiplierSet& mult = result.certificate.multipliers;

  NondegeneracyReport rep;
  rep.nd1_licq = result.certificate.licq.holds;

  rep.nd2_strict_complementarity = true;
  for (Eigen::Index j = 0; j < mult.mu.size(); ++j)
    if (!(mult.mu[j] > tol.multiplier_zero)) rep.nd2_strict_complementarity = false;

  rep.nd3_biactive_multipliers = true;
  for (Eigen::Index m = 0; m < mult.rho1.size(); ++m) {
    const bool ok = std::abs(mult.rho1[m]) > tol.multiplier_zero &&
                    mult.rho2[m] < -tol.multiplier_zero;
    if (!ok) rep.nd3_biactive_multipliers = false;
  }

  Matrix H = lagrangian_hessian(problem, x, pat, mult);
  TangentBasis tb = tangent_basis(problem, x, pat, tol);
  Matrix R = restricted_hessian(H, tb);

  if (R.rows() == 0) {
    rep.restricted_hessian_eigenvalues = Vector(0);
    rep.nd4_hessian_nonsingular = true;  // nothing to degenerate
    rep.quadratic_index = 0;
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(R);
    rep.restricted_hessian_eigenvalues = es.eigenvalues();  // ascending
    rep.nd4_hessian_nonsingular =
        (rep.restricted_hessian_eigenvalues.array().abs() > tol.eigen_singularity).all();
    rep.quadratic_index = static_cast<int>(
        (rep.restricted_hessian_eigenvalues.array() < -tol.eigen_singularity).count());
  }
  rep.biactive_index = static_cast<int>(pat.a00.size());

  const bool nondegenerate = rep.nd1_licq && rep.nd2_strict_complementarity &&
                             rep.nd3_biactive_multipliers && rep.nd4_hessian_nonsingular;
  if (nondegenerate) {
    rep.t_index = rep.quadratic_index + rep.biactive_index;
    rep.classification = (*rep.t_index == 0) ? Classification::NONDEGENERATE_LOCAL_MIN
                                             : Classification::NONDEGENERATE_SADDLE;
  } else {
    rep.classification = Classification::DEGENERATE;
  }
  result.report = std::move(rep);
  return result;
}

}  // namespace mpoc
