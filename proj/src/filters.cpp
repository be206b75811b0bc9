#include "sgnn/filters.hpp"

#include <cmath>
#include <string>

namespace sgnn {

namespace {

std::string shape(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

Matrix apply_activation(Matrix m, Activation a) {
  if (a == Activation::kRelu) m = m.cwiseMax(0.0);
  return m;
}

// Second derivatives of the natural cubic spline through (t_j, y_j) with
// uniform spacing h. Interior equations
//   M_{j-1} + 4 M_j + M_{j+1} = 6 (y_{j+1} - 2 y_j + y_{j-1}) / h^2
// with M_0 = M_{K-1} = 0, solved by the Thomas algorithm.
Vector natural_second_derivatives(const Vector& y, double h) {
  const Index k = y.size();
  Vector m = Vector::Zero(k);
  const Index interior = k - 2;
  if (interior <= 0) return m;
  Vector c(interior), rhs(interior);
  for (Index i = 0; i < interior; ++i) {
    rhs[i] = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]) / (h * h);
  }
  double diag = 4.0;
  c[0] = 1.0 / diag;
  rhs[0] /= diag;
  for (Index i = 1; i < interior; ++i) {
    diag = 4.0 - c[i - 1];
    c[i] = 1.0 / diag;
    rhs[i] = (rhs[i] - rhs[i - 1]) / diag;
  }
  for (Index i = interior - 2; i >= 0; --i) rhs[i] -= c[i] * rhs[i + 1];
  m.segment(1, interior) = rhs;
  return m;
}

}  // namespace

GraphSignal spectral_conv(const SpectralBasis& basis, const Vector& g_hat,
                          const GraphSignal& x) {
  if (g_hat.size() != basis.d()) {
    fail(ErrorCode::kDimensionMismatch,
         "spectral filter has " + std::to_string(g_hat.size()) +
             " entries, basis has " + std::to_string(basis.d()) + " vectors");
  }
  if (x.rows() != basis.n()) {
    fail(ErrorCode::kDimensionMismatch,
         "signal has " + std::to_string(x.rows()) + " rows, basis has " +
             std::to_string(basis.n()) + " vertices");
  }
  const Matrix coeffs = g_hat.asDiagonal() * (basis.eigenvectors.transpose() * x);
  return basis.eigenvectors * coeffs;
}

SplineFilterSpec build_spline_kernel(Index k_control, Index d_target) {
  if (k_control < 2) {
    fail(ErrorCode::kInvalidArgument,
         "spline kernel needs at least 2 control points, got " +
             std::to_string(k_control));
  }
  if (k_control > d_target) {
    fail(ErrorCode::kInvalidArgument,
         "spline kernel: " + std::to_string(k_control) +
             " control points exceed " + std::to_string(d_target) +
             " evaluation points");
  }
  const Index segments = k_control - 1;
  const double h = 1.0 / static_cast<double>(segments);
  SplineFilterSpec spec;
  spec.k_control = k_control;
  spec.d_target = d_target;
  spec.kernel = Matrix::Zero(d_target, k_control);

  // Evaluation point i lies at i * segments / (d - 1) knot spacings from 0.
  // Integer arithmetic picks the segment and an exact offset within it, so
  // an evaluation point that coincides with a knot returns the knot value.
  std::vector<Index> segment(static_cast<std::size_t>(d_target));
  std::vector<double> offset(static_cast<std::size_t>(d_target));
  for (Index i = 0; i < d_target; ++i) {
    const Index num = i * segments;
    Index j = num / (d_target - 1);
    Index rem = num - j * (d_target - 1);
    if (j == segments) {
      j = segments - 1;
      rem = d_target - 1;
    }
    segment[i] = j;
    offset[i] = static_cast<double>(rem) / static_cast<double>(d_target - 1);
  }

  for (Index col = 0; col < k_control; ++col) {
    const Vector y = Vector::Unit(k_control, col);
    const Vector m = natural_second_derivatives(y, h);
    for (Index i = 0; i < d_target; ++i) {
      const Index j = segment[i];
      const double b = offset[i];
      const double a = 1.0 - b;
      spec.kernel(i, col) = a * y[j] + b * y[j + 1] +
                            ((a * a * a - a) * m[j] + (b * b * b - b) * m[j + 1]) *
                                h * h / 6.0;
    }
  }
  return spec;
}

Vector spline_filter_diag(const SplineFilterSpec& spec, const Vector& alpha) {
  if (alpha.size() != spec.k_control) {
    fail(ErrorCode::kDimensionMismatch,
         "spline filter expects " + std::to_string(spec.k_control) +
             " control values, got " + std::to_string(alpha.size()));
  }
  return spec.kernel * alpha;
}

SparseSymMatrix rescale_laplacian(const SparseSymMatrix& l, double lambda_max) {
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
    fail(ErrorCode::kInvalidArgument,
         "lambda_max must be positive and finite, got " +
             std::to_string(lambda_max));
  }
  return SparseSymMatrix(
      add(l.csr(), CsrMatrix::identity(l.n()), 2.0 / lambda_max, -1.0));
}

GraphSignal cheb_apply(const ChebCoeffs& coeffs, const SparseSymMatrix& l,
                       const GraphSignal& x) {
  require(coeffs.theta.size() >= 1, ErrorCode::kInvalidArgument,
          "Chebyshev filter needs at least one coefficient");
  if (x.rows() != l.n()) {
    fail(ErrorCode::kDimensionMismatch,
         "Chebyshev filter: signal " + shape(x.rows(), x.cols()) +
             " does not match operator of size " + std::to_string(l.n()));
  }
  const SparseSymMatrix lt = rescale_laplacian(l, coeffs.lambda_max);
  const Vector& theta = coeffs.theta;

  Matrix prev = x;
  Matrix out = theta[0] * prev;
  if (theta.size() == 1) return out;
  Matrix cur = lt.multiply(prev);
  out += theta[1] * cur;
  for (Index k = 2; k < theta.size(); ++k) {
    Matrix next = 2.0 * lt.multiply(cur) - prev;
    out += theta[k] * next;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return out;
}

GraphSignal cheb_layer_forward(const ChebLayerParams& params,
                               const SparseSymMatrix& l, const GraphSignal& x) {
  const auto& theta = params.theta;
  require(!theta.empty(), ErrorCode::kInvalidArgument,
          "Chebyshev layer needs at least one order");
  for (const Matrix& t : theta) {
    if (t.rows() != x.cols() || t.cols() != theta[0].cols()) {
      fail(ErrorCode::kDimensionMismatch,
           "Chebyshev layer weight " + shape(t.rows(), t.cols()) +
               " does not fit input " + shape(x.rows(), x.cols()));
    }
  }
  if (x.rows() != l.n()) {
    fail(ErrorCode::kDimensionMismatch,
         "Chebyshev layer: input has " + std::to_string(x.rows()) +
             " rows, operator has size " + std::to_string(l.n()));
  }
  const SparseSymMatrix lt = rescale_laplacian(l, params.lambda_max);
  Matrix prev = x;
  Matrix out = prev * theta[0];
  if (theta.size() > 1) {
    Matrix cur = lt.multiply(prev);
    out += cur * theta[1];
    for (std::size_t k = 2; k < theta.size(); ++k) {
      Matrix next = 2.0 * lt.multiply(cur) - prev;
      out += next * theta[k];
      prev = std::move(cur);
      cur = std::move(next);
    }
  }
  return apply_activation(std::move(out), params.activation);
}

GraphSignal spectral_layer_forward(const SpectralLayerParams& params,
                                   const SpectralBasis& basis,
                                   const GraphSignal& x) {
  if (x.cols() != params.f_in ||
      static_cast<Index>(params.g_hat.size()) != params.f_in * params.f_out) {
    fail(ErrorCode::kDimensionMismatch,
         "spectral layer expects " + std::to_string(params.f_in) +
             " input channels and " +
             std::to_string(params.f_in * params.f_out) + " filters");
  }
  if (x.rows() != basis.n()) {
    fail(ErrorCode::kDimensionMismatch,
         "spectral layer: signal rows differ from the basis size");
  }
  const Matrix xhat = basis.eigenvectors.transpose() * x;  // d x f_in
  Matrix yhat = Matrix::Zero(basis.d(), params.f_out);
  for (Index i = 0; i < params.f_in; ++i) {
    for (Index j = 0; j < params.f_out; ++j) {
      const Vector& g = params.g_hat[i * params.f_out + j];
      if (g.size() != basis.d()) {
        fail(ErrorCode::kDimensionMismatch,
             "spectral layer filter length differs from the basis size");
      }
      yhat.col(j) += g.cwiseProduct(xhat.col(i));
    }
  }
  return apply_activation(basis.eigenvectors * yhat, params.activation);
}

}  // namespace sgnn
