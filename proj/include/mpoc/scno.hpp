#pragma once

// Sparsity-constrained optimization, min f(x) s.t. ||x||_0 <= s, and its
// continuous relaxation over pairs (x, y):
//
//   min f(x)  s.t.  sum_i y_i >= n - s,  0 <= y_i <= 1,  x_i * y_i = 0,
//
// which is an orthogonality-constrained program over R^{2n} with pairs
// F1_i = x_i, F2_i = y_i (so y_i >= 0 is carried by the pair constraint).
// Stationarity of the relaxation can be tested either through the generic
// machinery or through the structured multiplier system below; both paths
// are computed and compared.

#include "mpoc/nondegeneracy.hpp"
#include "mpoc/problem.hpp"
#include "mpoc/stationarity.hpp"

#include <string>
#include <vector>

namespace mpoc {

struct ScnoProblem {
  int n = 0;
  SmoothMap f;  // scalar objective on R^n
  int s = 0;    // sparsity level, 0 <= s <= n-1
};

// Validates dimensions and the sparsity range.
ScnoProblem make_scno_problem(int n, SmoothMap f, int s);

// The relaxation as an MpocProblem over z = (x, y) in R^{2n}: objective
// f(x); inequalities [sum(y) - (n-s); 1 - y_1; ...; 1 - y_n]; pairs
// (F1_i, F2_i) = (x_i, y_i).
MpocProblem build_relaxation(const ScnoProblem& scno);

struct RelaxedPoint {
  Vector x;
  Vector y;
};

// (x, y) stacked into a single vector of length 2n.
Vector stack_relaxed_point(const RelaxedPoint& point);

// Index sets of a relaxed point (0-based, ascending).  I00, I0neq, I1
// partition {0..n-1}; I01 is the subset of I0neq with y_i = 1.  Entries
// within tol.activity of the defining value qualify.
struct RelaxIndexSets {
  std::vector<int> I00;    // x_i = 0, y_i = 0
  std::vector<int> I01;    // x_i = 0, y_i = 1
  std::vector<int> I0neq;  // x_i = 0, y_i != 0
  std::vector<int> I1;     // x_i != 0
};

RelaxIndexSets relax_index_sets(const RelaxedPoint& point, const Tolerances& tol = {});

struct MStationarityReport {
  bool m_stationary = false;
  std::vector<int> support;  // indices with |x_i| > tol.activity
  Vector support_gradient;   // df/dx_i over the support
};

// M-stationarity: df/dx_i = 0 on the support of x (within
// tol.stationarity_residual).  Rejects x with more than s nonzero entries.
MStationarityReport m_stationarity_check(const ScnoProblem& scno, const Vector& x,
                                         const Tolerances& tol = {});

// Multipliers of the structured stationarity system of the relaxation, kept
// in index-set order.
struct RelaxationMultipliers {
  double mu_bar = 0.0;  // sum constraint (0 when inactive)
  Vector mu;      // bounds 1 - y_i = 0, over I01
  Vector sigma1;  // pair first components, over I0neq
  Vector sigma2;  // pair second components, over I1
  Vector rho1;    // biactive pairs, over I00
  Vector rho2;    // biactive pairs, over I00
  double residual_norm = 0.0;
};

struct RelaxationCertificate {
  RelaxIndexSets sets;
  bool sum_constraint_active = false;  // sum_{I0} y_i = n - s within tol.activity
  RelaxationMultipliers multipliers;
  bool is_t_stationary = false;
  std::vector<ConditionTag> violated_conditions;
  StationarityCertificate generic;  // same verdict via the generic machinery
};

// Solves the structured least-squares system over the index-set basis
// vectors and checks the sign conditions; also runs the generic
// t_stationarity_check on build_relaxation output and raises
// std::runtime_error if the two verdicts disagree.  Rejects infeasible
// points.
RelaxationCertificate t_stationarity_check_relaxation(const ScnoProblem& scno,
                                                      const RelaxedPoint& point,
                                                      const Tolerances& tol = {});

// The constructive multipliers witnessing T-stationarity at a relaxed point
// whose x is M-stationary: mu_bar = 0, mu = 0, sigma1_i = df/dx_i on I0neq,
// sigma2 = 0, rho1_i = df/dx_i and rho2_i = 0 on I00.  Rejects points whose
// x fails the M-stationarity test, naming the violating index.
RelaxationMultipliers t_multipliers_from_m(const ScnoProblem& scno,
                                           const RelaxedPoint& point,
                                           const Tolerances& tol = {});

// S-stationarity: df/dx supported on I0neq, i.e. |df/dx_i| within
// tol.stationarity_residual for every i in I1 and I00.  Implies
// T-stationarity of the relaxed point.
bool s_stationarity_check(const ScnoProblem& scno, const RelaxedPoint& point,
                          const Tolerances& tol = {});

enum class AuditCase { CASE1, CASE2 };
enum class NdCondition { ND1, ND2, ND3, ND4 };
const char* to_string(AuditCase c);
const char* to_string(NdCondition c);

// Every T-stationary point of the relaxation is degenerate; the audit names
// the condition that fails and why.
struct DegeneracyAudit {
  AuditCase case_tag = AuditCase::CASE1;  // CASE1: sum constraint active
  std::vector<NdCondition> failed_conditions;
  std::string detail;
  Classification generic_classification = Classification::DEGENERATE;
};

// Requires a T-stationary relaxed point.  Classifies the failure by case and
// cross-validates against classify_point on the relaxation (which must
// report DEGENERATE with the named condition failing); an inconsistency
// raises std::runtime_error.
DegeneracyAudit degeneracy_audit(const ScnoProblem& scno, const RelaxedPoint& point,
                                 const Tolerances& tol = {});

// Feasible completion for an x with support size <= s: y_i = 1 on the n - s
// smallest indices outside the support, 0 elsewhere.
Vector canonical_completion(const ScnoProblem& scno, const Vector& x,
                            const Tolerances& tol = {});

// Textual mixed-integer restatement of the sparsity constraint (for
// documentation; no integer solver is attached).
std::string mixed_integer_model_text(const ScnoProblem& scno);

}  // namespace mpoc
