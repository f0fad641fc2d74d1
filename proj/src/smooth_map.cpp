#include "mpoc/smooth_map.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mpoc {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_finite(const Vector& v, const Vector& x, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      std::ostringstream os;
      os << what << " produced a non-finite entry at component " << i
         << " for x = [" << x.transpose() << "]";
      throw std::runtime_error(os.str());
    }
  }
}

double fd_step(double xi) {
  static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  return h0 * (1.0 + std::abs(xi));
}

}  // namespace

SmoothMap make_empty_map(int input_dim) {
  require(input_dim >= 0, "make_empty_map: input_dim must be nonnegative");
  SmoothMap m;
  m.input_dim = input_dim;
  m.output_dim = 0;
  m.value = [](const Vector&) { return Vector(0); };
  m.jacobian = [input_dim](const Vector&) { return Matrix(0, input_dim); };
  m.component_hessian = [](const Vector&, int) -> Matrix {
    throw std::out_of_range("empty map has no components");
  };
  return m;
}

SmoothMap make_affine_map(const Matrix& A, const Vector& b) {
  require(A.rows() == b.size(), "make_affine_map: A rows must match b size");
  SmoothMap m;
  m.input_dim = static_cast<int>(A.cols());
  m.output_dim = static_cast<int>(A.rows());
  const int n = m.input_dim;
  m.value = [A, b](const Vector& x) -> Vector { return A * x + b; };
  m.jacobian = [A](const Vector&) { return A; };
  m.component_hessian = [n](const Vector&, int) { return Matrix::Zero(n, n); };
  return m;
}

SmoothMap make_coordinate_map(int input_dim, const std::vector<int>& indices) {
  for (int idx : indices)
    require(idx >= 0 && idx < input_dim, "make_coordinate_map: index out of range");
  Matrix A = Matrix::Zero(static_cast<int>(indices.size()), input_dim);
  for (int r = 0; r < static_cast<int>(indices.size()); ++r) A(r, indices[r]) = 1.0;
  return make_affine_map(A, Vector::Zero(static_cast<int>(indices.size())));
}

SmoothMap make_quadratic_objective(const Matrix& Q, const Vector& c, double r) {
  require(Q.rows() == Q.cols(), "make_quadratic_objective: Q must be square");
  require(Q.rows() == c.size(), "make_quadratic_objective: Q and c sizes differ");
  Matrix Qs = 0.5 * (Q + Q.transpose());
  SmoothMap m;
  m.input_dim = static_cast<int>(Qs.rows());
  m.output_dim = 1;
  m.value = [Qs, c, r](const Vector& x) -> Vector {
    Vector v(1);
    v[0] = 0.5 * x.dot(Qs * x) + c.dot(x) + r;
    return v;
  };
  m.jacobian = [Qs, c](const Vector& x) -> Matrix { return (Qs * x + c).transpose(); };
  m.component_hessian = [Qs](const Vector&, int) { return Qs; };
  return m;
}

SmoothMap make_scalar_map(int input_dim,
                          std::function<double(const Vector&)> value,
                          std::function<Vector(const Vector&)> grad,
                          std::function<Matrix(const Vector&)> hess) {
  SmoothMap m;
  m.input_dim = input_dim;
  m.output_dim = 1;
  m.value = [value](const Vector& x) -> Vector {
    Vector v(1);
    v[0] = value(x);
    return v;
  };
  m.jacobian = [grad](const Vector& x) -> Matrix { return grad(x).transpose(); };
  m.component_hessian = [hess](const Vector& x, int) { return hess(x); };
  return m;
}

SmoothMap make_map_with_fd_derivatives(int input_dim, int output_dim,
                                       std::function<Vector(const Vector&)> value) {
  SmoothMap m;
  m.input_dim = input_dim;
  m.output_dim = output_dim;
  m.value = value;
  m.jacobian = [value, input_dim, output_dim](const Vector& x) -> Matrix {
    Matrix J(output_dim, input_dim);
    for (int i = 0; i < input_dim; ++i) {
      const double h = fd_step(x[i]);
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      J.col(i) = (value(xp) - value(xm)) / (2.0 * h);
    }
    return J;
  };
  m.component_hessian = [value, input_dim](const Vector& x, int c) -> Matrix {
    Matrix H(input_dim, input_dim);
    for (int i = 0; i < input_dim; ++i) {
      const double hi = fd_step(x[i]);
      for (int j = 0; j <= i; ++j) {
        const double hj = fd_step(x[j]);
        Vector xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[i] += hi; xpp[j] += hj;
        xpm[i] += hi; xpm[j] -= hj;
        xmp[i] -= hi; xmp[j] += hj;
        xmm[i] -= hi; xmm[j] -= hj;
        const double v = (value(xpp)[c] - value(xpm)[c] - value(xmp)[c] + value(xmm)[c]) /
                         (4.0 * hi * hj);
        H(i, j) = v;
        H(j, i) = v;
      }
    }
    return H;
  };
  return m;
}

Vector gradient(const SmoothMap& scalar_map, const Vector& x) {
  require(scalar_map.output_dim == 1, "gradient: map must have one output");
  return scalar_map.jacobian(x).row(0).transpose();
}

double fd_derivative_check(const SmoothMap& map, const Vector& x) {
  require(x.size() == map.input_dim, "fd_derivative_check: x has wrong dimension");
  for (Eigen::Index i = 0; i < x.size(); ++i)
    require(std::isfinite(x[i]), "fd_derivative_check: x has non-finite entries");
  if (map.output_dim == 0) return 0.0;

  const int n = map.input_dim;
  const int m = map.output_dim;

  Matrix J = map.jacobian(x);
  require(J.rows() == m && J.cols() == n, "fd_derivative_check: jacobian has wrong shape");

  auto rel_err = [](double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
  };

  double worst = 0.0;
  std::vector<Matrix> component_hessians(m);
  for (int c = 0; c < m; ++c) {
    component_hessians[c] = map.component_hessian(x, c);
    require(component_hessians[c].rows() == n && component_hessians[c].cols() == n,
            "fd_derivative_check: component hessian has wrong shape");
  }

  for (int i = 0; i < n; ++i) {
    const double h = fd_step(x[i]);
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;

    Vector vp = map.value(xp);
    Vector vm = map.value(xm);
    {
      std::ostringstream tag;
      tag << "value (coordinate " << i << " probe)";
      check_finite(vp, xp, tag.str().c_str());
      check_finite(vm, xm, tag.str().c_str());
    }
    Vector fd_col = (vp - vm) / (2.0 * h);
    for (int c = 0; c < m; ++c) worst = std::max(worst, rel_err(J(c, i), fd_col[c]));

    // Hessian column i via central differences of the Jacobian.
    Matrix Jp = map.jacobian(xp);
    Matrix Jm = map.jacobian(xm);
    for (int c = 0; c < m; ++c) {
      for (int j = 0; j < n; ++j) {
        const double fd_h = (Jp(c, j) - Jm(c, j)) / (2.0 * h);
        worst = std::max(worst, rel_err(component_hessians[c](j, i), fd_h));
      }
    }
  }
  return worst;
}

}  // namespace mpoc
