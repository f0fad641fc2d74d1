#include "mpoc/scno.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mpoc {

namespace {

void require_point_shape(const ScnoProblem& scno, const RelaxedPoint& point,
                         const char* who) {
  if (point.x.size() != scno.n || point.y.size() != scno.n)
    throw std::invalid_argument(std::string(who) + ": point size does not match n");
}

void require_feasible(const ScnoProblem& scno, const RelaxedPoint& point,
                      const Tolerances& tol, const char* who) {
  require_point_shape(scno, point, who);
  FeasibilityReport rep =
      feasibility_check(build_relaxation(scno), stack_relaxed_point(point), tol);
  if (!rep.feasible) {
    std::ostringstream os;
    os << who << ": point is infeasible for the relaxation (max violation "
       << rep.max_violation << ")";
    throw std::invalid_argument(os.str());
  }
}

double sum_over_i0(const RelaxIndexSets& sets, const Vector& y) {
  double total = 0.0;
  for (int i : sets.I00) total += y[i];
  for (int i : sets.I0neq) total += y[i];
  return total;
}

// Columns of the structured stationarity system, in the order mu_bar (when
// the sum constraint is active), bounds over I01, sigma1 over I0neq, sigma2
// over I1, then rho1/rho2 per biactive index.
Matrix structured_columns(int n, const RelaxIndexSets& sets, bool sum_active) {
  const int cols = (sum_active ? 1 : 0) + static_cast<int>(sets.I01.size()) +
                   static_cast<int>(sets.I0neq.size()) + static_cast<int>(sets.I1.size()) +
                   2 * static_cast<int>(sets.I00.size());
  Matrix A = Matrix::Zero(2 * n, cols);
  int c = 0;
  if (sum_active) {
    A.col(c).segment(n, n).setOnes();
    ++c;
  }
  for (int i : sets.I01) A(n + i, c++) = -1.0;  // gradient of 1 - y_i
  for (int i : sets.I0neq) A(i, c++) = 1.0;     // pair first component
  for (int i : sets.I1) A(n + i, c++) = 1.0;    // pair second component
  for (int i : sets.I00) {
    A(i, c++) = 1.0;
    A(n + i, c++) = 1.0;
  }
  return A;
}

Vector structured_coefficients(const RelaxationMultipliers& m, bool sum_active) {
  const Eigen::Index cols = (sum_active ? 1 : 0) + m.mu.size() + m.sigma1.size() +
                            m.sigma2.size() + 2 * m.rho1.size();
  Vector w(cols);
  Eigen::Index c = 0;
  if (sum_active) w[c++] = m.mu_bar;
  w.segment(c, m.mu.size()) = m.mu;
  c += m.mu.size();
  w.segment(c, m.sigma1.size()) = m.sigma1;
  c += m.sigma1.size();
  w.segment(c, m.sigma2.size()) = m.sigma2;
  c += m.sigma2.size();
  for (Eigen::Index j = 0; j < m.rho1.size(); ++j) {
    w[c++] = m.rho1[j];
    w[c++] = m.rho2[j];
  }
  return w;
}

Vector stationarity_rhs(const ScnoProblem& scno, const RelaxedPoint& point) {
  Vector rhs = Vector::Zero(2 * scno.n);
  rhs.head(scno.n) = gradient(scno.f, point.x);
  return rhs;
}

}  // namespace

ScnoProblem make_scno_problem(int n, SmoothMap f, int s) {
  if (n < 1) throw std::invalid_argument("make_scno_problem: n must be positive");
  if (f.input_dim != n || f.output_dim != 1)
    throw std::invalid_argument("make_scno_problem: f must be scalar on R^n");
  if (s < 0 || s > n - 1)
    throw std::invalid_argument("make_scno_problem: need 0 <= s <= n-1");
  return ScnoProblem{n, std::move(f), s};
}

MpocProblem build_relaxation(const ScnoProblem& scno) {
  const int n = scno.n;
  if (scno.s < 0 || scno.s > n - 1)
    throw std::invalid_argument("build_relaxation: sparsity level out of range");
  const SmoothMap f = scno.f;

  SmoothMap objective;
  objective.input_dim = 2 * n;
  objective.output_dim = 1;
  objective.value = [f, n](const Vector& z) { return f.value(z.head(n)); };
  objective.jacobian = [f, n](const Vector& z) {
    Matrix J = Matrix::Zero(1, 2 * n);
    J.leftCols(n) = f.jacobian(z.head(n));
    return J;
  };
  objective.component_hessian = [f, n](const Vector& z, int) {
    Matrix H = Matrix::Zero(2 * n, 2 * n);
    H.topLeftCorner(n, n) = f.component_hessian(z.head(n), 0);
    return H;
  };

  Matrix A = Matrix::Zero(1 + n, 2 * n);
  Vector b(1 + n);
  A.row(0).segment(n, n).setOnes();
  b[0] = -static_cast<double>(n - scno.s);
  for (int i = 0; i < n; ++i) {
    A(1 + i, n + i) = -1.0;
    b[1 + i] = 1.0;
  }

  std::vector<int> x_idx(n), y_idx(n);
  for (int i = 0; i < n; ++i) {
    x_idx[i] = i;
    y_idx[i] = n + i;
  }
  return make_problem(2 * n, objective, make_empty_map(2 * n), make_affine_map(A, b),
                      make_coordinate_map(2 * n, x_idx),
                      make_coordinate_map(2 * n, y_idx));
}

Vector stack_relaxed_point(const RelaxedPoint& point) {
  Vector z(point.x.size() + point.y.size());
  z << point.x, point.y;
  return z;
}

RelaxIndexSets relax_index_sets(const RelaxedPoint& point, const Tolerances& tol) {
  tol.validate();
  if (point.x.size() != point.y.size())
    throw std::invalid_argument("relax_index_sets: x and y sizes differ");
  RelaxIndexSets sets;
  for (int i = 0; i < point.x.size(); ++i) {
    if (std::abs(point.x[i]) > tol.activity) {
      sets.I1.push_back(i);
      continue;
    }
    if (std::abs(point.y[i]) <= tol.activity) {
      sets.I00.push_back(i);
    } else {
      sets.I0neq.push_back(i);
      if (std::abs(point.y[i] - 1.0) <= tol.activity) sets.I01.push_back(i);
    }
  }
  return sets;
}

MStationarityReport m_stationarity_check(const ScnoProblem& scno, const Vector& x,
                                         const Tolerances& tol) {
  tol.validate();
  if (x.size() != scno.n)
    throw std::invalid_argument("m_stationarity_check: x size does not match n");
  MStationarityReport rep;
  for (int i = 0; i < scno.n; ++i)
    if (std::abs(x[i]) > tol.activity) rep.support.push_back(i);
  if (static_cast<int>(rep.support.size()) > scno.s) {
    std::ostringstream os;
    os << "m_stationarity_check: " << rep.support.size()
       << " nonzero entries exceed the sparsity level " << scno.s;
    throw std::invalid_argument(os.str());
  }
  Vector grad = gradient(scno.f, x);
  rep.support_gradient.resize(static_cast<Eigen::Index>(rep.support.size()));
  rep.m_stationary = true;
  for (size_t j = 0; j < rep.support.size(); ++j) {
    const double gi = grad[rep.support[j]];
    rep.support_gradient[static_cast<Eigen::Index>(j)] = gi;
    if (std::abs(gi) > tol.stationarity_residual) rep.m_stationary = false;
  }
  return rep;
}

RelaxationCertificate t_stationarity_check_relaxation(const ScnoProblem& scno,
                                                      const RelaxedPoint& point,
                                                      const Tolerances& tol) {
  tol.validate();
  require_feasible(scno, point, tol, "t_stationarity_check_relaxation");

  RelaxationCertificate cert;
  cert.sets = relax_index_sets(point, tol);
  cert.sum_constraint_active =
      std::abs(sum_over_i0(cert.sets, point.y) - (scno.n - scno.s)) <= tol.activity;

  Matrix A = structured_columns(scno.n, cert.sets, cert.sum_constraint_active);
  Vector rhs = stationarity_rhs(scno, point);
  Vector w;
  if (A.cols() > 0) {
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    w = svd.solve(rhs);
  } else {
    w = Vector(0);
  }

  RelaxationMultipliers& m = cert.multipliers;
  Eigen::Index c = 0;
  if (cert.sum_constraint_active) m.mu_bar = w[c++];
  m.mu.resize(static_cast<Eigen::Index>(cert.sets.I01.size()));
  for (Eigen::Index j = 0; j < m.mu.size(); ++j) m.mu[j] = w[c++];
  m.sigma1.resize(static_cast<Eigen::Index>(cert.sets.I0neq.size()));
  for (Eigen::Index j = 0; j < m.sigma1.size(); ++j) m.sigma1[j] = w[c++];
  m.sigma2.resize(static_cast<Eigen::Index>(cert.sets.I1.size()));
  for (Eigen::Index j = 0; j < m.sigma2.size(); ++j) m.sigma2[j] = w[c++];
  m.rho1.resize(static_cast<Eigen::Index>(cert.sets.I00.size()));
  m.rho2.resize(static_cast<Eigen::Index>(cert.sets.I00.size()));
  for (Eigen::Index j = 0; j < m.rho1.size(); ++j) {
    m.rho1[j] = w[c++];
    m.rho2[j] = w[c++];
  }
  m.residual_norm = A.cols() > 0 ? (A * w - rhs).norm() : rhs.norm();

  cert.is_t_stationary = true;
  if (m.residual_norm > tol.stationarity_residual) {
    cert.is_t_stationary = false;
    cert.violated_conditions.push_back(ConditionTag::GRAD_RESIDUAL);
  }
  bool mu_ok = m.mu_bar >= -tol.multiplier_zero;
  for (Eigen::Index j = 0; j < m.mu.size(); ++j)
    if (m.mu[j] < -tol.multiplier_zero) mu_ok = false;
  if (!mu_ok) {
    cert.is_t_stationary = false;
    cert.violated_conditions.push_back(ConditionTag::MU_SIGN);
  }
  bool rho_ok = true;
  for (Eigen::Index j = 0; j < m.rho1.size(); ++j)
    if (std::abs(m.rho1[j]) > tol.multiplier_zero && m.rho2[j] > tol.multiplier_zero)
      rho_ok = false;
  if (!rho_ok) {
    cert.is_t_stationary = false;
    cert.violated_conditions.push_back(ConditionTag::RHO_SIGN);
  }

  cert.generic =
      t_stationarity_check(build_relaxation(scno), stack_relaxed_point(point), tol);
  if (cert.generic.is_t_stationary != cert.is_t_stationary) {
    std::ostringstream os;
    os << "t_stationarity_check_relaxation: structured verdict "
       << (cert.is_t_stationary ? "true" : "false")
       << " disagrees with the generic path (structured residual "
       << m.residual_norm << ", generic residual "
       << cert.generic.multipliers.residual_norm << ")";
    throw std::runtime_error(os.str());
  }
  return cert;
}

RelaxationMultipliers t_multipliers_from_m(const ScnoProblem& scno,
                                           const RelaxedPoint& point,
                                           const Tolerances& tol) {
  tol.validate();
  require_feasible(scno, point, tol, "t_multipliers_from_m");
  RelaxIndexSets sets = relax_index_sets(point, tol);
  Vector grad = gradient(scno.f, point.x);
  for (int i : sets.I1)
    if (std::abs(grad[i]) > tol.stationarity_residual) {
      std::ostringstream os;
      os << "t_multipliers_from_m: x is not M-stationary, df/dx_" << i << " = "
         << grad[i];
      throw std::invalid_argument(os.str());
    }

  RelaxationMultipliers m;
  m.mu_bar = 0.0;
  m.mu = Vector::Zero(static_cast<Eigen::Index>(sets.I01.size()));
  m.sigma1.resize(static_cast<Eigen::Index>(sets.I0neq.size()));
  for (size_t j = 0; j < sets.I0neq.size(); ++j)
    m.sigma1[static_cast<Eigen::Index>(j)] = grad[sets.I0neq[j]];
  m.sigma2 = Vector::Zero(static_cast<Eigen::Index>(sets.I1.size()));
  m.rho1.resize(static_cast<Eigen::Index>(sets.I00.size()));
  for (size_t j = 0; j < sets.I00.size(); ++j)
    m.rho1[static_cast<Eigen::Index>(j)] = grad[sets.I00[j]];
  m.rho2 = Vector::Zero(static_cast<Eigen::Index>(sets.I00.size()));

  const bool sum_active =
      std::abs(sum_over_i0(sets, point.y) - (scno.n - scno.s)) <= tol.activity;
  Matrix A = structured_columns(scno.n, sets, sum_active);
  Vector w = structured_coefficients(m, sum_active);
  Vector rhs = stationarity_rhs(scno, point);
  m.residual_norm = A.cols() > 0 ? (A * w - rhs).norm() : rhs.norm();
  return m;
}

bool s_stationarity_check(const ScnoProblem& scno, const RelaxedPoint& point,
                          const Tolerances& tol) {
  tol.validate();
  require_feasible(scno, point, tol, "s_stationarity_check");
  RelaxIndexSets sets = relax_index_sets(point, tol);
  Vector grad = gradient(scno.f, point.x);
  for (int i : sets.I1)
    if (std::abs(grad[i]) > tol.stationarity_residual) return false;
  for (int i : sets.I00)
    if (std::abs(grad[i]) > tol.stationarity_residual) return false;
  return true;
}

const char* to_string(AuditCase c) {
  return c == AuditCase::CASE1 ? "CASE1" : "CASE2";
}

const char* to_string(NdCondition c) {
  switch (c) {
    case NdCondition::ND1: return "ND1";
    case NdCondition::ND2: return "ND2";
    case NdCondition::ND3: return "ND3";
    case NdCondition::ND4: return "ND4";
  }
  return "?";
}

DegeneracyAudit degeneracy_audit(const ScnoProblem& scno, const RelaxedPoint& point,
                                 const Tolerances& tol) {
  RelaxationCertificate cert = t_stationarity_check_relaxation(scno, point, tol);
  if (!cert.is_t_stationary)
    throw std::invalid_argument("degeneracy_audit: point is not T-stationary");

  DegeneracyAudit audit;
  const RelaxIndexSets& sets = cert.sets;
  if (cert.sum_constraint_active) {
    audit.case_tag = AuditCase::CASE1;
    if (sets.I01.size() == sets.I0neq.size()) {
      // Every y_i on I0 is 0 or 1, so the sum-constraint gradient is a signed
      // sum of the other active gradients.
      audit.failed_conditions = {NdCondition::ND1};
      audit.detail =
          "sum constraint active and every y_i on I0 is 0 or 1: the active "
          "gradients are linearly dependent";
    } else {
      audit.failed_conditions = {NdCondition::ND2};
      audit.detail =
          "sum constraint active with a fractional y_i: its multiplier is "
          "forced to 0, so strict complementarity fails";
    }
  } else {
    audit.case_tag = AuditCase::CASE2;
    if (!sets.I01.empty()) {
      audit.failed_conditions = {NdCondition::ND2};
      audit.detail =
          "bound 1 - y_i = 0 is active with multiplier forced to 0, so "
          "strict complementarity fails";
    } else if (!sets.I00.empty()) {
      audit.failed_conditions = {NdCondition::ND3};
      audit.detail = "biactive pairs carry rho2 = 0, never negative";
    } else {
      audit.failed_conditions = {NdCondition::ND4};
      audit.detail =
          "tangent directions along the free y coordinates have zero "
          "curvature, so the restricted Hessian is singular";
    }
  }

  ClassificationResult generic =
      classify_point(build_relaxation(scno), stack_relaxed_point(point), tol);
  if (!generic.report.has_value())
    throw std::runtime_error(
        "degeneracy_audit: generic classifier rejects a point the structured "
        "path certified");
  audit.generic_classification = generic.report->classification;
  bool consistent = generic.report->classification == Classification::DEGENERATE;
  for (NdCondition c : audit.failed_conditions) {
    switch (c) {
      case NdCondition::ND1: consistent = consistent && !generic.report->nd1_licq; break;
      case NdCondition::ND2:
        consistent = consistent && !generic.report->nd2_strict_complementarity;
        break;
      case NdCondition::ND3:
        consistent = consistent && !generic.report->nd3_biactive_multipliers;
        break;
      case NdCondition::ND4:
        consistent = consistent && !generic.report->nd4_hessian_nonsingular;
        break;
    }
  }
  if (!consistent)
    throw std::runtime_error(
        "degeneracy_audit: audit verdict is inconsistent with the generic "
        "nondegeneracy report");
  return audit;
}

Vector canonical_completion(const ScnoProblem& scno, const Vector& x,
                            const Tolerances& tol) {
  tol.validate();
  if (x.size() != scno.n)
    throw std::invalid_argument("canonical_completion: x size does not match n");
  std::vector<int> zero_indices;
  for (int i = 0; i < scno.n; ++i)
    if (std::abs(x[i]) <= tol.activity) zero_indices.push_back(i);
  const int needed = scno.n - scno.s;
  if (static_cast<int>(zero_indices.size()) < needed)
    throw std::invalid_argument(
        "canonical_completion: support of x exceeds the sparsity level");
  Vector y = Vector::Zero(scno.n);
  for (int j = 0; j < needed; ++j) y[zero_indices[j]] = 1.0;
  return y;
}

std::string mixed_integer_model_text(const ScnoProblem& scno) {
  std::ostringstream os;
  os << "minimize    f(x)\n"
     << "subject to  sum_{i=1..n} y_i >= n - s\n"
     << "            x_i * y_i = 0        (i = 1..n)\n"
     << "            y_i in {0, 1}        (i = 1..n)\n"
     << "with n = " << scno.n << ", s = " << scno.s
     << "; y_i = 0 marks a coordinate allowed to be nonzero, so the\n"
     << "constraints force at least n - s entries of x to vanish.\n";
  return os.str();
}

}  // namespace mpoc
