#include "mpoc/scholtes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mpoc {

namespace {

// [g; F2; F1*F2 + t; t - F1*F2] as one map.
SmoothMap make_relaxed_inequalities(const MpocProblem& p, double t) {
  const SmoothMap g = p.g, F1 = p.F1, F2 = p.F2;
  const int n = p.n;
  const int mg = p.num_inequalities();
  const int k = p.num_pairs();

  SmoothMap map;
  map.input_dim = n;
  map.output_dim = mg + 3 * k;
  if (map.output_dim == 0) return make_empty_map(n);

  map.value = [g, F1, F2, t, mg, k](const Vector& x) {
    Vector out(mg + 3 * k);
    if (mg > 0) out.head(mg) = g.value(x);
    if (k > 0) {
      Vector prod = F1.value(x).cwiseProduct(F2.value(x));
      out.segment(mg, k) = F2.value(x);
      out.segment(mg + k, k) = prod.array() + t;
      out.segment(mg + 2 * k, k) = t - prod.array();
    }
    return out;
  };
  map.jacobian = [g, F1, F2, mg, k, n](const Vector& x) {
    Matrix J(mg + 3 * k, n);
    if (mg > 0) J.topRows(mg) = g.jacobian(x);
    if (k > 0) {
      Matrix J1 = F1.jacobian(x), J2 = F2.jacobian(x);
      Matrix Jp = F2.value(x).asDiagonal() * J1 + F1.value(x).asDiagonal() * J2;
      J.middleRows(mg, k) = J2;
      J.middleRows(mg + k, k) = Jp;
      J.middleRows(mg + 2 * k, k) = -Jp;
    }
    return J;
  };
  map.component_hessian = [g, F1, F2, mg, k](const Vector& x, int c) {
    if (c < mg) return Matrix(g.component_hessian(x, c));
    c -= mg;
    if (c < k) return Matrix(F2.component_hessian(x, c));
    const int m = (c - k) % k;
    Matrix H = F2.value(x)[m] * F1.component_hessian(x, m) +
               F1.value(x)[m] * F2.component_hessian(x, m);
    Vector g1 = F1.jacobian(x).row(m).transpose();
    Vector g2 = F2.jacobian(x).row(m).transpose();
    H += g1 * g2.transpose() + g2 * g1.transpose();
    return Matrix(c < 2 * k ? H : -H);
  };
  return map;
}

}  // namespace

RegularizedProblem build_regularized(const MpocProblem& problem, double t) {
  if (!(t > 0) || !std::isfinite(t))
    throw std::invalid_argument("build_regularized: t must be positive");
  RegularizedProblem reg;
  reg.base = problem;
  reg.t = t;
  reg.nlp.n = problem.n;
  reg.nlp.f = problem.f;
  reg.nlp.c_eq = problem.h;
  reg.nlp.c_ineq = make_relaxed_inequalities(problem, t);
  return reg;
}

InnerKktPoint inner_kkt_solve(const RegularizedProblem& reg, const Vector& x0,
                              const Tolerances& tol) {
  tol.validate();
  if (!(reg.t > 0)) throw std::invalid_argument("inner_kkt_solve: reg is not well-formed");
  const int mg = reg.base.num_inequalities();
  const int k = reg.base.num_pairs();

  SqpOptions opt;
  opt.kkt_tol = std::min(tol.stationarity_residual, 1e-10);
  NlpResult r = solve_nlp(reg.nlp, x0, opt);

  InnerKktPoint pt;
  pt.x = r.x;
  pt.lambda = r.lambda_eq;
  if (r.lambda_ineq.size() != mg + 3 * k)
    throw std::runtime_error("inner_kkt_solve: multiplier layout mismatch");
  pt.mu = r.lambda_ineq.head(mg);
  pt.eta = r.lambda_ineq.segment(mg, k);
  pt.eta_ge = r.lambda_ineq.segment(mg + k, k);
  pt.eta_le = r.lambda_ineq.segment(mg + 2 * k, k);
  pt.kkt_residual = r.kkt_residual;
  pt.converged = r.converged || r.kkt_residual <= tol.stationarity_residual;
  pt.iterations = r.iterations;
  if (!pt.converged) pt.failure = r.failure;
  return pt;
}

MultiplierSet recover_t_multipliers(const MpocProblem& problem,
                                    const InnerKktPoint& iterate,
                                    const ActivePattern& pattern_at_limit) {
  const int k = problem.num_pairs();
  if (iterate.eta.size() != k || iterate.eta_ge.size() != k || iterate.eta_le.size() != k ||
      iterate.mu.size() != problem.num_inequalities())
    throw std::invalid_argument("recover_t_multipliers: iterate does not match the problem");

  const Vector F1v = k > 0 ? problem.F1.value(iterate.x) : Vector(0);
  const Vector F2v = k > 0 ? problem.F2.value(iterate.x) : Vector(0);
  const Vector d = iterate.eta_ge - iterate.eta_le;
  const ActivePattern& pat = pattern_at_limit;

  MultiplierSet out;
  out.lambda = iterate.lambda;
  out.mu.resize(static_cast<Eigen::Index>(pat.J0.size()));
  for (size_t j = 0; j < pat.J0.size(); ++j)
    out.mu[static_cast<Eigen::Index>(j)] = iterate.mu[pat.J0[j]];
  out.sigma1.resize(static_cast<Eigen::Index>(pat.a01.size()));
  for (size_t j = 0; j < pat.a01.size(); ++j) {
    const int m = pat.a01[j];
    out.sigma1[static_cast<Eigen::Index>(j)] = d[m] * F2v[m];
  }
  out.sigma2.resize(static_cast<Eigen::Index>(pat.a10.size()));
  for (size_t j = 0; j < pat.a10.size(); ++j) {
    const int m = pat.a10[j];
    out.sigma2[static_cast<Eigen::Index>(j)] = iterate.eta[m] + d[m] * F1v[m];
  }
  out.rho1.resize(static_cast<Eigen::Index>(pat.a00.size()));
  out.rho2.resize(static_cast<Eigen::Index>(pat.a00.size()));
  for (size_t j = 0; j < pat.a00.size(); ++j) {
    const int m = pat.a00[j];
    out.rho1[static_cast<Eigen::Index>(j)] = d[m] * F2v[m];
    out.rho2[static_cast<Eigen::Index>(j)] = iterate.eta[m] + d[m] * F1v[m];
  }

  // Residual of the stationarity equation with the recovered multipliers.
  Matrix stack = active_gradient_stack(problem, iterate.x, pat);
  Vector theta(stack.rows());
  Eigen::Index at = 0;
  auto put = [&theta, &at](const Vector& block) {
    theta.segment(at, block.size()) = block;
    at += block.size();
  };
  put(out.lambda);
  put(out.mu);
  put(out.sigma1);
  put(out.sigma2);
  put(out.rho1);
  put(out.rho2);
  Vector residual = gradient(problem.f, iterate.x);
  if (stack.rows() > 0) residual -= stack.transpose() * theta;
  out.residual_norm = residual.norm();
  out.minimum_norm_fallback = false;
  return out;
}

void DriveSchedule::validate() const {
  if (!(t0 > 0) || !std::isfinite(t0))
    throw std::invalid_argument("DriveSchedule: t0 must be positive");
  if (!(shrink > 0) || !(shrink < 1))
    throw std::invalid_argument("DriveSchedule: shrink must lie in (0, 1)");
  if (!(t_min > 0) || !(t_min <= t0))
    throw std::invalid_argument("DriveSchedule: need 0 < t_min <= t0");
}

Tolerances limit_tolerances(const Tolerances& tol, double t_final) {
  Tolerances out = tol;
  out.activity = std::max(tol.activity, 10 * t_final);
  out.feasibility = std::max(tol.feasibility, 10 * t_final);
  return out;
}

namespace {

double multiplier_gap(const MultiplierSet& a, const MultiplierSet& b) {
  auto gap = [](const Vector& u, const Vector& v) {
    return u.size() == v.size() && u.size() > 0 ? (u - v).cwiseAbs().maxCoeff() : 0.0;
  };
  double g = gap(a.lambda, b.lambda);
  g = std::max(g, gap(a.mu, b.mu));
  g = std::max(g, gap(a.sigma1, b.sigma1));
  g = std::max(g, gap(a.sigma2, b.sigma2));
  g = std::max(g, gap(a.rho1, b.rho1));
  g = std::max(g, gap(a.rho2, b.rho2));
  return g;
}

}  // namespace

RegularizationTrace drive(const MpocProblem& problem, const Vector& x0,
                          const DriveSchedule& schedule, const Tolerances& tol) {
  schedule.validate();
  tol.validate();
  if (x0.size() != problem.n || !x0.allFinite())
    throw std::invalid_argument("drive: x0 must be a finite vector of matching dimension");

  RegularizationTrace trace;
  double t = schedule.t0;
  Vector x = x0;
  Vector prev;
  bool have_prev = false;

  while (true) {
    RegularizedProblem reg = build_regularized(problem, t);
    InnerKktPoint pt = inner_kkt_solve(reg, x, tol);
    trace.schedule.push_back(t);
    trace.iterates.push_back(pt);
    x = pt.x;
    if (!pt.converged) {
      std::ostringstream os;
      os << "inner solve at t=" << t << ": "
         << (pt.failure.empty() ? "did not converge" : pt.failure);
      trace.failure_stage = os.str();
      break;
    }
    if (have_prev && (x - prev).norm() <= tol.stationarity_residual &&
        t <= 10 * schedule.t_min)
      break;
    prev = x;
    have_prev = true;
    const double t_next = schedule.shrink * t;
    if (t_next < schedule.t_min) break;
    t = t_next;
  }

  trace.t_final = trace.schedule.back();
  trace.limit_point = x;
  if (!trace.failure_stage.empty()) return trace;

  Tolerances lim_tol = limit_tolerances(tol, trace.t_final);
  try {
    try {
      trace.limit_pattern = active_sets(problem, x, lim_tol);
    } catch (const std::runtime_error&) {
      // Both pair entries can sit at the sqrt(t) scale when the iterates
      // approach a biactive point along the relaxed boundary.
      lim_tol.activity = std::max(tol.activity, 10 * std::sqrt(trace.t_final));
      trace.limit_pattern = active_sets(problem, x, lim_tol);
    }
    trace.recovered =
        recover_t_multipliers(problem, trace.iterates.back(), trace.limit_pattern);
    trace.certificate = t_stationarity_check(problem, x, lim_tol);
    trace.multiplier_agreement =
        multiplier_gap(trace.recovered, trace.certificate.multipliers);
    trace.converged = trace.certificate.is_t_stationary;
    if (!trace.converged) trace.failure_stage = "limit point is not T-stationary";
  } catch (const std::exception& err) {
    trace.converged = false;
    trace.failure_stage = std::string("limit analysis: ") + err.what();
  }
  return trace;
}

}  // namespace mpoc
