#include "mpoc/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mpoc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct WorkingSet {
  // Active constraints, equalities first. type 0 = equality row, 1 = inequality row.
  std::vector<int> type;
  std::vector<int> row;
  std::vector<double> u;  // multipliers, parallel to rows

  int size() const { return static_cast<int>(row.size()); }

  void push(int t, int r, double mult) {
    type.push_back(t);
    row.push_back(r);
    u.push_back(mult);
  }

  void drop(int k) {
    type.erase(type.begin() + k);
    row.erase(row.begin() + k);
    u.erase(u.begin() + k);
  }
};

Vector constraint_normal(const QpProblem& qp, int type, int row) {
  return type == 0 ? Vector(qp.Ae.row(row).transpose()) : Vector(qp.Ai.row(row).transpose());
}

// Step directions for a candidate normal n_plus given the current working set:
//   z = H n_plus   with H the inverse Hessian reduced onto the working-set null space,
//   r = N^+ n_plus with N^+ the pseudo-inverse of the working-set normals in the G metric.
// Both come from B = L^{-1} N and its QR factorization, recomputed per call; the
// problems here are small and dense, so simplicity beats incremental updates.
void step_directions(const Eigen::LLT<Matrix>& llt, const QpProblem& qp,
                     const WorkingSet& ws, const Vector& n_plus, Vector& z, Vector& r) {
  const Matrix& L = llt.matrixL();
  const int n = static_cast<int>(n_plus.size());
  const int k = ws.size();

  Vector d = n_plus;
  L.triangularView<Eigen::Lower>().solveInPlace(d);

  if (k == 0) {
    z = d;
    L.transpose().triangularView<Eigen::Upper>().solveInPlace(z);
    r.resize(0);
    return;
  }

  Matrix B(n, k);
  for (int j = 0; j < k; ++j) {
    Vector col = constraint_normal(qp, ws.type[j], ws.row[j]);
    L.triangularView<Eigen::Lower>().solveInPlace(col);
    B.col(j) = col;
  }
  Eigen::HouseholderQR<Matrix> qr(B);
  Matrix Q = qr.householderQ();
  Matrix R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

  r = Q.leftCols(k).transpose() * d;
  R.triangularView<Eigen::Upper>().solveInPlace(r);

  if (k >= n) {
    z = Vector::Zero(n);
  } else {
    z = Q.rightCols(n - k) * (Q.rightCols(n - k).transpose() * d);
    L.transpose().triangularView<Eigen::Upper>().solveInPlace(z);
  }
}

}  // namespace

QpResult qp_solve(const QpProblem& qp, double feasibility_tol) {
  const int n = static_cast<int>(qp.G.rows());
  const int num_eq = static_cast<int>(qp.Ae.rows());
  const int num_ineq = static_cast<int>(qp.Ai.rows());
  if (qp.G.cols() != n || qp.a.size() != n)
    throw std::invalid_argument("qp_solve: G/a dimensions inconsistent");
  if ((num_eq > 0 && qp.Ae.cols() != n) || qp.be.size() != num_eq)
    throw std::invalid_argument("qp_solve: equality block dimensions inconsistent");
  if ((num_ineq > 0 && qp.Ai.cols() != n) || qp.bi.size() != num_ineq)
    throw std::invalid_argument("qp_solve: inequality block dimensions inconsistent");
  if (!(feasibility_tol > 0))
    throw std::invalid_argument("qp_solve: feasibility_tol must be positive");

  const Matrix Gs = 0.5 * (qp.G + qp.G.transpose());
  Eigen::LLT<Matrix> llt(Gs);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("qp_solve: G is not positive definite");

  QpResult result;
  result.x = -qp.a;
  llt.solveInPlace(result.x);

  WorkingSet ws;
  const double zero_dir_tol = 1e-12;
  const int iteration_cap = 100 * (num_eq + num_ineq + 1);

  // Phase 1: bring the equality constraints in one at a time. Their multipliers
  // carry no sign restriction, so each addition is a single full step.
  for (int e = 0; e < num_eq; ++e) {
    Vector n_plus = qp.Ae.row(e).transpose();
    const double slack = qp.Ae.row(e).dot(result.x) - qp.be[e];
    Vector z, r;
    step_directions(llt, qp, ws, n_plus, z, r);
    const double denom = z.dot(n_plus);
    if (std::abs(denom) <= zero_dir_tol * std::max(1.0, n_plus.norm())) {
      // Normal lies in the span of the working set: redundant if consistent.
      if (std::abs(slack) > feasibility_tol * std::max(1.0, qp.be.cwiseAbs().maxCoeff())) {
        result.solved = false;
        return result;
      }
      continue;
    }
    const double t = -slack / denom;
    result.x += t * z;
    for (int j = 0; j < ws.size(); ++j) ws.u[j] -= t * r[j];
    ws.push(0, e, t);
    ++result.iterations;
  }

  // Phase 2: dual active-set iterations over the inequalities.
  int iter = 0;
  while (true) {
    if (++iter > iteration_cap)
      throw std::runtime_error("qp_solve: iteration cap exceeded (possible cycling)");

    // Most violated inactive inequality.
    int p = -1;
    double worst = -feasibility_tol;
    for (int i = 0; i < num_ineq; ++i) {
      bool active = false;
      for (int j = 0; j < ws.size(); ++j)
        if (ws.type[j] == 1 && ws.row[j] == i) { active = true; break; }
      if (active) continue;
      const double slack = qp.Ai.row(i).dot(result.x) - qp.bi[i];
      if (slack < worst) { worst = slack; p = i; }
    }
    if (p < 0) break;  // primal feasible -> optimal

    Vector n_plus = qp.Ai.row(p).transpose();
    double u_p = 0.0;

    // Add constraint p, dropping blocking inequalities as needed.
    while (true) {
      Vector z, r;
      step_directions(llt, qp, ws, n_plus, z, r);
      const double denom = z.dot(n_plus);
      const bool have_primal = denom > zero_dir_tol * std::max(1.0, n_plus.squaredNorm());

      double t1 = kInf;
      int blocking = -1;
      for (int j = 0; j < ws.size(); ++j) {
        if (ws.type[j] != 1 || r[j] <= zero_dir_tol) continue;
        const double ratio = ws.u[j] / r[j];
        if (ratio < t1) { t1 = ratio; blocking = j; }
      }

      double t2 = kInf;
      if (have_primal) {
        const double slack = qp.Ai.row(p).dot(result.x) - qp.bi[p];
        t2 = -slack / denom;
      }

      if (t1 == kInf && t2 == kInf) {
        // No step reduces the violation: the constraints are inconsistent.
        result.solved = false;
        return result;
      }

      const double t = std::min(t1, t2);
      if (t2 == kInf) {
        // Pure dual step: move multipliers, drop the blocker, try again.
        for (int j = 0; j < ws.size(); ++j) ws.u[j] -= t * r[j];
        u_p += t;
        ws.drop(blocking);
        continue;
      }

      result.x += t * z;
      for (int j = 0; j < ws.size(); ++j) ws.u[j] -= t * r[j];
      u_p += t;
      ++result.iterations;

      if (t2 <= t1) {
        ws.push(1, p, u_p);
        break;
      }
      ws.drop(blocking);
    }
  }

  // Stabilized re-solve on the final working set. The dual iteration walks in
  // from the unconstrained minimum, which sits ~1/lambda_min(G) away when G is
  // barely positive definite, and the returned point then carries cancellation
  // error of roughly that magnitude times machine epsilon. Re-solving the
  // equality-constrained problem restricted to the final working set through a
  // null-space factorization never forms G^{-1}a, so it stays accurate whenever
  // the reduced Hessian is well conditioned. Keep whichever candidate has the
  // smaller KKT defect.
  const auto kkt_defect = [&](const Vector& x, const std::vector<double>& u) {
    Vector grad = Gs * x + qp.a;
    for (int j = 0; j < ws.size(); ++j)
      grad -= u[j] * constraint_normal(qp, ws.type[j], ws.row[j]);
    double err = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
    for (int e = 0; e < num_eq; ++e)
      err = std::max(err, std::abs(qp.Ae.row(e).dot(x) - qp.be[e]));
    for (int i = 0; i < num_ineq; ++i)
      err = std::max(err, qp.bi[i] - qp.Ai.row(i).dot(x));
    for (int j = 0; j < ws.size(); ++j)
      if (ws.type[j] == 1) err = std::max(err, -u[j]);
    return err;
  };

  if (ws.size() > 0) {
    const int k = ws.size();
    Matrix N(n, k);
    Vector b(k);
    for (int j = 0; j < k; ++j) {
      N.col(j) = constraint_normal(qp, ws.type[j], ws.row[j]);
      b[j] = ws.type[j] == 0 ? qp.be[ws.row[j]] : qp.bi[ws.row[j]];
    }
    Eigen::HouseholderQR<Matrix> qr(N);
    Matrix R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const double r_max = R.diagonal().cwiseAbs().maxCoeff();
    if (R.diagonal().cwiseAbs().minCoeff() > 1e-12 * std::max(1.0, r_max)) {
      Matrix Q = qr.householderQ();
      Vector w = b;
      R.transpose().triangularView<Eigen::Lower>().solveInPlace(w);
      Vector x_ref = Q.leftCols(k) * w;
      bool usable = true;
      if (k < n) {
        Matrix Z = Q.rightCols(n - k);
        Eigen::LLT<Matrix> llt_red(Matrix(Z.transpose() * Gs * Z));
        if (llt_red.info() == Eigen::Success) {
          Vector y = -(Z.transpose() * (Gs * x_ref + qp.a));
          llt_red.solveInPlace(y);
          x_ref += Z * y;
        } else {
          usable = false;
        }
      }
      if (usable && x_ref.allFinite()) {
        Vector u_ref = Q.leftCols(k).transpose() * (Gs * x_ref + qp.a);
        R.triangularView<Eigen::Upper>().solveInPlace(u_ref);
        std::vector<double> u_vec(u_ref.data(), u_ref.data() + k);
        if (kkt_defect(x_ref, u_vec) < kkt_defect(result.x, ws.u)) {
          result.x = x_ref;
          ws.u = u_vec;
        }
      }
    }
  }

  result.lambda_eq = Vector::Zero(num_eq);
  result.lambda_ineq = Vector::Zero(num_ineq);
  for (int j = 0; j < ws.size(); ++j) {
    if (ws.type[j] == 0)
      result.lambda_eq[ws.row[j]] = ws.u[j];
    else
      result.lambda_ineq[ws.row[j]] = std::max(0.0, ws.u[j]);
  }
  result.solved = true;
  result.objective = 0.5 * result.x.dot(qp.G * result.x) + qp.a.dot(result.x);
  return result;
}

}  // namespace mpoc
