#include "sgnn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sgnn/config.hpp"
#include "sgnn/rng.hpp"

namespace sgnn {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::kDimensionMismatch,
         std::string(what) + ": shapes " + std::to_string(a.rows()) + "x" +
             std::to_string(a.cols()) + " and " + std::to_string(b.rows()) +
             "x" + std::to_string(b.cols()) + " differ");
  }
}

Matrix effective_gradient(const DenseParam& param, const Matrix& grad,
                          const TrainConfig& cfg, bool decay) {
  check_same_shape(param.weights, grad, "optimizer step");
  if (decay && cfg.weight_decay != 0.0) {
    return grad + cfg.weight_decay * param.weights;
  }
  return grad;
}

}  // namespace

Matrix xavier_init(Index f_in, Index f_out, Rng& rng) {
  require(f_in >= 1 && f_out >= 1, ErrorCode::kInvalidArgument,
          "xavier_init needs positive dimensions");
  const double bound = std::sqrt(6.0 / static_cast<double>(f_in + f_out));
  Matrix w(f_in, f_out);
  for (Index i = 0; i < f_in; ++i) {
    for (Index j = 0; j < f_out; ++j) w(i, j) = rng.uniform(-bound, bound);
  }
  return w;
}

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix relu_backward(const Matrix& x, const Matrix& dy) {
  check_same_shape(x, dy, "relu_backward");
  return (x.array() > 0.0).select(dy, 0.0);
}

Matrix softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

std::vector<Index> argmax_rows(const Matrix& m) {
  std::vector<Index> out(static_cast<std::size_t>(m.rows()), 0);
  for (Index i = 0; i < m.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < m.cols(); ++j) {
      if (m(i, j) > m(i, best)) best = j;
    }
    out[i] = best;
  }
  return out;
}

XentResult softmax_xent_masked(const Matrix& logits,
                               std::span<const Index> labels,
                               std::span<const Index> mask) {
  require(!mask.empty(), ErrorCode::kInvalidArgument,
          "cross-entropy mask is empty");
  if (static_cast<Index>(labels.size()) != logits.rows()) {
    fail(ErrorCode::kDimensionMismatch,
         "cross-entropy: " + std::to_string(labels.size()) + " labels for " +
             std::to_string(logits.rows()) + " rows");
  }
  const Index classes = logits.cols();
  XentResult out;
  out.dlogits = Matrix::Zero(logits.rows(), classes);
  const double inv = 1.0 / static_cast<double>(mask.size());
  double total = 0.0;
  for (Index v : mask) {
    if (v < 0 || v >= logits.rows()) {
      fail(ErrorCode::kIndexOutOfRange,
           "cross-entropy mask index " + std::to_string(v) + " out of range");
    }
    const Index y = labels[v];
    if (y < 0 || y >= classes) {
      fail(ErrorCode::kInvalidArgument,
           "label " + std::to_string(y) + " of vertex " + std::to_string(v) +
               " outside [0, " + std::to_string(classes) + ")");
    }
    const auto row = logits.row(v);
    Index top = 0;
    for (Index j = 1; j < classes; ++j) {
      if (row[j] > row[top]) top = j;
    }
    const double m = row[top];
    // log(sum_j exp(l_j - m)) with the largest term (exactly 1) split off.
    double rest = 0.0;
    for (Index j = 0; j < classes; ++j) {
      if (j != top) rest += std::exp(row[j] - m);
    }
    const double lse = std::log1p(rest);
    total += lse + (m - row[y]);
    for (Index j = 0; j < classes; ++j) {
      out.dlogits(v, j) += inv * std::exp(row[j] - m - lse);
    }
    out.dlogits(v, y) -= inv;
  }
  out.loss = total * inv;
  if (!std::isfinite(out.loss)) {
    fail(ErrorCode::kNumeric, "cross-entropy loss is not finite");
  }
  return out;
}

DropoutResult dropout_forward(const Matrix& x, double p, Rng& rng,
                              bool training) {
  require(p >= 0.0 && p < 1.0, ErrorCode::kInvalidArgument,
          "dropout probability must lie in [0, 1)");
  DropoutResult out;
  if (!training || p == 0.0) {
    out.y = x;
    out.mask = Matrix::Ones(x.rows(), x.cols());
    return out;
  }
  const double scale = 1.0 / (1.0 - p);
  out.mask.resize(x.rows(), x.cols());
  double* m = out.mask.data();
  for (Index k = 0; k < out.mask.size(); ++k) {
    m[k] = rng.uniform() < p ? 0.0 : scale;
  }
  out.y = x.cwiseProduct(out.mask);
  return out;
}

DenseParam::DenseParam(Matrix w)
    : weights(std::move(w)),
      adam_m(Matrix::Zero(weights.rows(), weights.cols())),
      adam_v(Matrix::Zero(weights.rows(), weights.cols())) {}

void adam_step(DenseParam& param, const Matrix& grad, const TrainConfig& cfg,
               bool decay) {
  const Matrix g = effective_gradient(param, grad, cfg, decay);
  if (param.adam_m.size() != g.size()) {
    param.adam_m = Matrix::Zero(g.rows(), g.cols());
    param.adam_v = Matrix::Zero(g.rows(), g.cols());
  }
  ++param.step_count;
  const double t = static_cast<double>(param.step_count);
  param.adam_m = kAdamBeta1 * param.adam_m + (1.0 - kAdamBeta1) * g;
  param.adam_v =
      kAdamBeta2 * param.adam_v + (1.0 - kAdamBeta2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(kAdamBeta1, t);
  const double c2 = 1.0 - std::pow(kAdamBeta2, t);
  param.weights.array() -=
      cfg.learning_rate * (param.adam_m.array() / c1) /
      ((param.adam_v.array() / c2).sqrt() + kAdamEpsilon);
}

void sgd_step(DenseParam& param, const Matrix& grad, const TrainConfig& cfg,
              bool decay) {
  const Matrix g = effective_gradient(param, grad, cfg, decay);
  ++param.step_count;
  param.weights -= cfg.learning_rate * g;
}

void optimizer_step(DenseParam& param, const Matrix& grad,
                    const TrainConfig& cfg, bool decay) {
  if (cfg.optimizer == OptimizerKind::kAdam) {
    adam_step(param, grad, cfg, decay);
  } else {
    sgd_step(param, grad, cfg, decay);
  }
}

double grad_check(const std::function<double()>& f,
                  std::span<Matrix* const> params,
                  std::span<const Matrix> analytic, double h) {
  require(params.size() == analytic.size(), ErrorCode::kDimensionMismatch,
          "grad_check: one analytic gradient per parameter is required");
  require(h > 0.0, ErrorCode::kInvalidArgument, "grad_check step must be > 0");
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Matrix& p = *params[t];
    check_same_shape(p, analytic[t], "grad_check");
    for (Index k = 0; k < p.size(); ++k) {
      const double saved = p.data()[k];
      auto central = [&](double step) {
        p.data()[k] = saved + step;
        const double up = f();
        p.data()[k] = saved - step;
        const double down = f();
        p.data()[k] = saved;
        return (up - down) / (2.0 * step);
      };
      // Richardson extrapolation cancels the h^2 error term, so h can be
      // large enough that rounding in f does not swamp small gradients.
      const double numeric = (4.0 * central(0.5 * h) - central(h)) / 3.0;
      const double a = analytic[t].data()[k];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

double grad_check(const std::function<double(const Matrix&)>& f,
                  const Matrix& params, const Matrix& analytic, double h) {
  Matrix work = params;
  Matrix* slot[] = {&work};
  const Matrix grads[] = {analytic};
  return grad_check([&] { return f(work); }, slot, grads, h);
}

}  // namespace sgnn
