#pragma once

#include <vector>

#include "sgnn/common.hpp"
#include "sgnn/csr_matrix.hpp"
#include "sgnn/spectral.hpp"

namespace sgnn {

// U diag(g_hat) U^T x
GraphSignal spectral_conv(const SpectralBasis& basis, const Vector& g_hat,
                          const GraphSignal& x);

// Fixed d x K natural cubic spline interpolation matrix. Knots sit at
// j / (K - 1), evaluation points at i / (d - 1), both on [0, 1].
struct SplineFilterSpec {
  Index k_control = 0;
  Index d_target = 0;
  Matrix kernel;
};

SplineFilterSpec build_spline_kernel(Index k_control, Index d_target);

// kernel * alpha
Vector spline_filter_diag(const SplineFilterSpec& spec, const Vector& alpha);

// 2 L / lambda_max - I
SparseSymMatrix rescale_laplacian(const SparseSymMatrix& l, double lambda_max);

struct ChebCoeffs {
  Vector theta;
  double lambda_max = 2.0;
};

// sum_k theta_k T_k(L~) x by the three-term recurrence on the signal.
GraphSignal cheb_apply(const ChebCoeffs& coeffs, const SparseSymMatrix& l,
                       const GraphSignal& x);

enum class Activation { kRelu, kIdentity };

// theta[k] is the f_in x f_out weight of the order-k term.
struct ChebLayerParams {
  std::vector<Matrix> theta;
  double lambda_max = 2.0;
  Activation activation = Activation::kRelu;
};

// sigma(sum_k T_k(L~) X Theta_k)
GraphSignal cheb_layer_forward(const ChebLayerParams& params,
                               const SparseSymMatrix& l, const GraphSignal& x);

// Spectral layer with one filter per (input, output) channel pair;
// g_hat[i * f_out + j] acts between input channel i and output channel j.
struct SpectralLayerParams {
  Index f_in = 0;
  Index f_out = 0;
  std::vector<Vector> g_hat;
  Activation activation = Activation::kRelu;
};

// x_out[:, j] = sigma(sum_i U diag(g_hat_ij) U^T x[:, i])
GraphSignal spectral_layer_forward(const SpectralLayerParams& params,
                                   const SpectralBasis& basis,
                                   const GraphSignal& x);

}  // namespace sgnn
