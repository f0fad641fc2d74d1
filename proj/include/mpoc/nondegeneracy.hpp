#pragma once

// Nondegeneracy audit and point classification.  A T-stationary point is
// nondegenerate when
//
//   ND1: the active gradients are linearly independent,
//   ND2: every active-inequality multiplier is strictly positive,
//   ND3: every biactive pair has rho1 != 0 and rho2 < 0,
//   ND4: the Lagrangian Hessian restricted to the tangent space of the active
//        equality system is nonsingular.
//
// The quadratic index QI counts negative eigenvalues of that restricted
// Hessian, the biactive index BI counts biactive pairs, and TI = QI + BI;
// TI = 0 characterizes nondegenerate local minimizers.

#include "mpoc/stationarity.hpp"

#include <optional>

namespace mpoc {

struct TangentBasis {
  Matrix basis;   // n x p_eff, orthonormal columns spanning ker(stack)
  int p_eff = 0;  // equals pattern.p under LICQ
};

enum class Classification { NONDEGENERATE_LOCAL_MIN, NONDEGENERATE_SADDLE, DEGENERATE };

const char* to_string(Classification c);

struct NondegeneracyReport {
  bool nd1_licq = false;
  bool nd2_strict_complementarity = false;
  bool nd3_biactive_multipliers = false;
  bool nd4_hessian_nonsingular = false;
  Vector restricted_hessian_eigenvalues;  // ascending
  int quadratic_index = 0;                // QI
  int biactive_index = 0;                 // BI = |a00|
  std::optional<int> t_index;             // QI + BI, only at nondegenerate points
  Classification classification = Classification::DEGENERATE;
};

// D^2 f - sum lambda_i D^2 h_i - sum mu_j D^2 g_j - sum sigma1_m D^2 F1_m
//       - sum sigma2_m D^2 F2_m - sum (rho1_m D^2 F1_m + rho2_m D^2 F2_m),
// symmetrized.
Matrix lagrangian_hessian(const MpocProblem& problem, const Vector& x,
                          const ActivePattern& pattern, const MultiplierSet& multipliers);

// Orthonormal null-space basis of the active gradient stack.
TangentBasis tangent_basis(const MpocProblem& problem, const Vector& x,
                           const ActivePattern& pattern, const Tolerances& tol = {});

// B' H B, symmetrized; a 0-column basis yields a 0 x 0 matrix.
Matrix restricted_hessian(const Matrix& hessian, const TangentBasis& basis);

struct ClassificationResult {
  StationarityCertificate certificate;
  std::optional<NondegeneracyReport> report;  // absent when not T-stationary
};

// Runs t_stationarity_check first; a failed certificate comes back without a
// report.  Otherwise evaluates ND1-ND4 and the indices.
ClassificationResult classify_point(const MpocProblem& problem, const Vector& x,
                                    const Tolerances& tol = {});

}  // namespace mpoc
