#include "mpoc/sqp.hpp"

#include "mpoc/qp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpoc {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

Vector eval_or_empty(const SmoothMap& map, const Vector& x) {
  return map.empty() ? Vector(0) : map.value(x);
}

Matrix jac_or_empty(const SmoothMap& map, const Vector& x, int n) {
  return map.empty() ? Matrix(0, n) : map.jacobian(x);
}

// l1 constraint violation.
double violation(const Vector& ce, const Vector& ci) {
  double v = ce.cwiseAbs().sum();
  for (Eigen::Index i = 0; i < ci.size(); ++i) v += std::max(0.0, -ci[i]);
  return v;
}

struct Evaluation {
  double f = std::numeric_limits<double>::quiet_NaN();
  Vector ce, ci;
  bool finite = false;
};

Evaluation evaluate(const Nlp& nlp, const Vector& x) {
  Evaluation ev;
  Vector fv = nlp.f.value(x);
  ev.ce = eval_or_empty(nlp.c_eq, x);
  ev.ci = eval_or_empty(nlp.c_ineq, x);
  ev.f = fv[0];
  ev.finite = std::isfinite(ev.f) && all_finite(ev.ce) && all_finite(ev.ci);
  return ev;
}

Matrix lagrangian_hessian(const Nlp& nlp, const Vector& x, const Vector& le,
                          const Vector& li) {
  Matrix H = nlp.f.component_hessian(x, 0);
  for (Eigen::Index i = 0; i < le.size(); ++i)
    H -= le[i] * nlp.c_eq.component_hessian(x, static_cast<int>(i));
  for (Eigen::Index i = 0; i < li.size(); ++i)
    if (li[i] != 0.0) H -= li[i] * nlp.c_ineq.component_hessian(x, static_cast<int>(i));
  return 0.5 * (H + H.transpose()).eval();
}

}  // namespace

double nlp_kkt_residual(const Nlp& nlp, const Vector& x, const Vector& lambda_eq,
                        const Vector& lambda_ineq) {
  Vector grad = gradient(nlp.f, x);
  Vector ce = eval_or_empty(nlp.c_eq, x);
  Vector ci = eval_or_empty(nlp.c_ineq, x);
  if (lambda_eq.size() != ce.size() || lambda_ineq.size() != ci.size())
    throw std::invalid_argument("nlp_kkt_residual: multiplier sizes do not match constraints");

  Vector stat = grad;
  if (ce.size() > 0) stat -= nlp.c_eq.jacobian(x).transpose() * lambda_eq;
  if (ci.size() > 0) stat -= nlp.c_ineq.jacobian(x).transpose() * lambda_ineq;

  double res = stat.size() ? stat.cwiseAbs().maxCoeff() : 0.0;
  if (ce.size()) res = std::max(res, ce.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ci.size(); ++i) {
    res = std::max(res, std::max(0.0, -ci[i]));             // feasibility
    res = std::max(res, std::max(0.0, -lambda_ineq[i]));    // sign
    res = std::max(res, std::min(lambda_ineq[i], std::max(0.0, ci[i])));  // complementarity
  }
  return res;
}

NlpResult solve_nlp(const Nlp& nlp, const Vector& x0, const SqpOptions& options) {
  if (x0.size() != nlp.n) throw std::invalid_argument("solve_nlp: x0 has wrong dimension");
  if (!all_finite(x0)) throw std::invalid_argument("solve_nlp: x0 is not finite");

  const int num_eq = nlp.c_eq.empty() ? 0 : nlp.c_eq.output_dim;
  const int num_ineq = nlp.c_ineq.empty() ? 0 : nlp.c_ineq.output_dim;

  NlpResult best;
  best.x = x0;
  best.lambda_eq = Vector::Zero(num_eq);
  best.lambda_ineq = Vector::Zero(num_ineq);
  best.kkt_residual = nlp_kkt_residual(nlp, x0, best.lambda_eq, best.lambda_ineq);

  Vector x = x0;
  Vector le = Vector::Zero(num_eq);
  Vector li = Vector::Zero(num_ineq);
  double merit_weight = 1.0;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Evaluation ev = evaluate(nlp, x);
    if (!ev.finite) {
      best.failure = "objective or constraints became non-finite";
      return best;
    }
    Vector grad = gradient(nlp.f, x);
    Matrix Je = jac_or_empty(nlp.c_eq, x, nlp.n);
    Matrix Ji = jac_or_empty(nlp.c_ineq, x, nlp.n);

    const double res = nlp_kkt_residual(nlp, x, le, li);
    if (res < best.kkt_residual) {
      best.x = x;
      best.lambda_eq = le;
      best.lambda_ineq = li;
      best.kkt_residual = res;
      best.iterations = iter;
    }
    if (res <= options.kkt_tol) {
      best.converged = true;
      return best;
    }

    // Exact Hessian, shifted to be safely positive definite.
    Matrix H = lagrangian_hessian(nlp, x, le, li);
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < options.hessian_floor)
      H.diagonal().array() += options.hessian_floor - min_eig;

    QpProblem qp;
    qp.G = H;
    qp.a = grad;
    qp.Ae = Je;
    qp.be = -ev.ce;
    qp.Ai = Ji;
    qp.bi = -ev.ci;

    QpResult sub;
    try {
      sub = qp_solve(qp);
    } catch (const std::runtime_error&) {
      sub.solved = false;
    }

    Vector d;
    if (sub.solved) {
      d = sub.x;
      le = sub.lambda_eq;
      li = sub.lambda_ineq;
      if (all_finite(d) && d.norm() <= options.min_step) {
        // A (near-)zero step means the current point solves its own
        // subproblem, i.e. it is a KKT point of the problem up to the QP
        // accuracy -- but only the fresh multipliers reveal that.
        const double res_here = nlp_kkt_residual(nlp, x, le, li);
        if (res_here < best.kkt_residual) {
          best.x = x;
          best.lambda_eq = le;
          best.lambda_ineq = li;
          best.kkt_residual = res_here;
          best.iterations = iter + 1;
        }
        if (res_here <= options.kkt_tol) {
          best.converged = true;
        } else {
          best.failure = "subproblem stationary but the KKT residual stalls";
        }
        return best;
      }
    } else {
      // Linearization inconsistent: fall back to a descent step on the
      // squared constraint violation to restore feasibility.
      Vector v = Vector::Zero(num_ineq);
      for (int i = 0; i < num_ineq; ++i) v[i] = std::max(0.0, -ev.ci[i]);
      Vector grad_theta = Vector::Zero(nlp.n);
      if (num_eq > 0) grad_theta += Je.transpose() * ev.ce;
      if (num_ineq > 0) grad_theta -= Ji.transpose() * v;
      if (grad_theta.norm() <= options.kkt_tol) {
        best.failure = "infeasible subproblem at a stationary point of the constraint violation";
        return best;
      }
      d = -grad_theta;
    }

    if (!all_finite(d) || d.norm() == 0.0) {
      best.failure = "degenerate search direction";
      return best;
    }

    // l1 merit line search. The penalty weight exceeds the multiplier scale so
    // the QP step is a descent direction for the merit function.
    double mult_scale = 0.0;
    if (le.size()) mult_scale = std::max(mult_scale, le.cwiseAbs().maxCoeff());
    if (li.size()) mult_scale = std::max(mult_scale, li.cwiseAbs().maxCoeff());
    merit_weight = std::max(merit_weight, 2.0 * mult_scale + 1e-6);

    const double theta0 = violation(ev.ce, ev.ci);
    const double merit0 = ev.f + merit_weight * theta0;
    const double slope = grad.dot(d) - merit_weight * theta0;

    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= options.min_step) {
      Evaluation trial = evaluate(nlp, x + alpha * d);
      if (trial.finite) {
        const double merit = trial.f + merit_weight * violation(trial.ce, trial.ci);
        if (merit <= merit0 + options.armijo_slope * alpha * std::min(slope, 0.0)) {
          x += alpha * d;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // Full steps near a solution can be rejected by the merit function even
      // though they improve the KKT residual; accept on that evidence before
      // declaring a stall.
      Vector x_full = x + d;
      Evaluation trial = evaluate(nlp, x_full);
      if (trial.finite && nlp_kkt_residual(nlp, x_full, le, li) < res) {
        x = x_full;
      } else {
        best.failure = "line search failed to make progress";
        return best;
      }
    }
  }

  // Iteration cap: report the best point seen.
  const double res = nlp_kkt_residual(nlp, x, le, li);
  if (res < best.kkt_residual) {
    best.x = x;
    best.lambda_eq = le;
    best.lambda_ineq = li;
    best.kkt_residual = res;
    best.iterations = options.max_iterations;
  }
  if (res <= options.kkt_tol) {
    best.converged = true;
  } else {
    best.failure = "iteration cap exceeded";
  }
  return best;
}

}  // namespace mpoc
