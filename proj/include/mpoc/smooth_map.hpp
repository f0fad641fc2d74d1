#pragma once

// Twice continuously differentiable maps R^n -> R^m, given by callbacks for
// the value, the Jacobian, and the Hessian of each output component.  All
// higher-level machinery (constraint stacks, Lagrangian Hessians, solvers)
// consumes this one representation.

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace mpoc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct SmoothMap {
  int input_dim = 0;
  int output_dim = 0;

  // value(x): length-output_dim vector
  std::function<Vector(const Vector&)> value;
  // jacobian(x): output_dim x input_dim
  std::function<Matrix(const Vector&)> jacobian;
  // component_hessian(x, c): input_dim x input_dim, symmetric, c in [0, output_dim)
  std::function<Matrix(const Vector&, int)> component_hessian;

  bool empty() const { return output_dim == 0; }
};

// Map with no outputs (used for absent constraint blocks).
SmoothMap make_empty_map(int input_dim);

// x -> A x + b
SmoothMap make_affine_map(const Matrix& A, const Vector& b);

// x -> (x[indices[0]], ..., x[indices[m-1]])
SmoothMap make_coordinate_map(int input_dim, const std::vector<int>& indices);

// x -> 0.5 x'Qx + c'x + r as a 1-output map; Q is symmetrized internally.
SmoothMap make_quadratic_objective(const Matrix& Q, const Vector& c, double r);

// Scalar map from separate value/gradient/Hessian callbacks.
SmoothMap make_scalar_map(int input_dim,
                          std::function<double(const Vector&)> value,
                          std::function<Vector(const Vector&)> gradient,
                          std::function<Matrix(const Vector&)> hessian);

// Wraps a value-only callback; Jacobian and Hessians fall back to central
// finite differences with step eps^(1/3) * (1 + |x_i|) per coordinate.
SmoothMap make_map_with_fd_derivatives(int input_dim, int output_dim,
                                       std::function<Vector(const Vector&)> value);

// Gradient of a scalar (1-output) map as a column vector.
Vector gradient(const SmoothMap& scalar_map, const Vector& x);

// Compares the Jacobian callback against central differences of the value,
// and every component Hessian against central differences of the Jacobian.
// Returns the worst relative error, with relative meaning
// |analytic - fd| / max(1, |analytic|, |fd|).  Non-finite evaluations raise
// std::runtime_error naming the offending coordinate.
double fd_derivative_check(const SmoothMap& map, const Vector& x);

}  // namespace mpoc
