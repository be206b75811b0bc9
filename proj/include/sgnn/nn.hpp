#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sgnn/common.hpp"

namespace sgnn {

class Rng;
struct TrainConfig;

// Uniform on [-b, b], b = sqrt(6 / (f_in + f_out)). Entries are drawn in
// row-major order.
Matrix xavier_init(Index f_in, Index f_out, Rng& rng);

Matrix relu(const Matrix& x);
// dy where x > 0, zero elsewhere (including x == 0).
Matrix relu_backward(const Matrix& x, const Matrix& dy);

// Row-wise softmax with max subtraction.
Matrix softmax(const Matrix& logits);
inline Matrix predict_proba(const Matrix& logits) { return softmax(logits); }

// Index of the largest entry per row; ties go to the lowest index.
std::vector<Index> argmax_rows(const Matrix& m);

struct XentResult {
  double loss = 0.0;
  Matrix dlogits;
};

// Mean negative log-likelihood over the masked rows. dlogits is
// (softmax - onehot) / |mask| on masked rows and zero elsewhere. A vertex
// listed twice in the mask counts twice.
XentResult softmax_xent_masked(const Matrix& logits,
                               std::span<const Index> labels,
                               std::span<const Index> mask);

struct DropoutResult {
  Matrix y;
  // Per-entry multiplier: 0 for dropped entries, 1 / (1 - p) for kept ones
  // (all ones at inference). dx = dy .* mask.
  Matrix mask;
};

DropoutResult dropout_forward(const Matrix& x, double p, Rng& rng,
                              bool training);

// Trainable weight with its Adam state.
struct DenseParam {
  DenseParam() = default;
  explicit DenseParam(Matrix w);

  Matrix weights;
  Matrix adam_m;
  Matrix adam_v;
  std::int64_t step_count = 0;

  Index rows() const { return weights.rows(); }
  Index cols() const { return weights.cols(); }
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

// Adam on grad + weight_decay * weights (coupled L2). Pass decay = false to
// skip the L2 term for this tensor.
void adam_step(DenseParam& param, const Matrix& grad, const TrainConfig& cfg,
               bool decay = true);

// Plain gradient descent with the same coupled L2 term.
void sgd_step(DenseParam& param, const Matrix& grad, const TrainConfig& cfg,
              bool decay = true);

// Dispatches on cfg.optimizer.
void optimizer_step(DenseParam& param, const Matrix& grad,
                    const TrainConfig& cfg, bool decay = true);

// Central differences of f around the current values of `params` (steps h
// and h / 2, Richardson-extrapolated), compared with `analytic` (same
// shapes). Each coordinate is perturbed in place and restored. Returns
// max |a - n| / max(|a|, |n|, 1e-8).
double grad_check(const std::function<double()>& f,
                  std::span<Matrix* const> params,
                  std::span<const Matrix> analytic, double h);

// Single-tensor form: f is evaluated at perturbed copies of `params`.
double grad_check(const std::function<double(const Matrix&)>& f,
                  const Matrix& params, const Matrix& analytic, double h);

}  // namespace sgnn
