#pragma once

// Finite-difference and batching checks for the trainable models, shared by
// the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "sgnn/config.hpp"
#include "sgnn/models.hpp"
#include "sgnn/nn.hpp"
#include "sgnn/rng.hpp"
#include "support/generators.hpp"

namespace sgnn::testing {

// Nonnegative bag-of-words style features with some exact zeros.
inline Matrix random_features(Rng& rng, Index n, Index f) {
  return random_matrix(rng, n, f, -1.0, 1.0).cwiseMax(0.0);
}

inline std::vector<Index> random_labels(Rng& rng, Index n, Index c) {
  std::vector<Index> y(static_cast<std::size_t>(n));
  for (auto& v : y) v = rng.below(c);
  return y;
}

inline std::vector<Index> all_rows(Index n) {
  std::vector<Index> r(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) r[i] = i;
  return r;
}

inline TrainConfig small_gcn_config(Index layers, Index hidden, bool residual = false) {
  TrainConfig cfg = gcn_defaults();
  cfg.layers = layers;
  cfg.hidden_units = hidden;
  cfg.residual = residual;
  return cfg;
}

inline TrainConfig small_sign_config(Index r, Index hidden) {
  TrainConfig cfg = sign_defaults();
  cfg.aggregators = r;
  cfg.hidden_units = hidden;
  return cfg;
}

// Loss plus the on/off pattern of every ReLU input.
struct Probe {
  double loss = 0.0;
  std::vector<bool> active;
};

inline void append_pattern(const Matrix& z, std::vector<bool>& out) {
  for (Index k = 0; k < z.size(); ++k) out.push_back(z.data()[k] > 0.0);
}

struct FdReport {
  double worst = 0.0;
  Index checked = 0;
  Index skipped = 0;
};

// Per-entry finite-difference check of a piecewise smooth loss. Steps h and
// h / 2 are Richardson-extrapolated. A coordinate whose perturbations flip
// any ReLU is skipped: the loss has a kink there and no derivative to
// compare with.
inline FdReport kink_aware_grad_check(const std::function<Probe()>& f,
                                      const std::vector<Matrix*>& params,
                                      const std::vector<Matrix>& analytic, double h) {
  const std::vector<bool> base = f().active;
  FdReport report;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Matrix& p = *params[t];
    for (Index k = 0; k < p.size(); ++k) {
      const double saved = p.data()[k];
      bool kink = false;
      auto central = [&](double step) {
        p.data()[k] = saved + step;
        const Probe up = f();
        p.data()[k] = saved - step;
        const Probe down = f();
        p.data()[k] = saved;
        kink = kink || up.active != base || down.active != base;
        return (up.loss - down.loss) / (2.0 * step);
      };
      const double numeric = (4.0 * central(0.5 * h) - central(h)) / 3.0;
      if (kink) {
        ++report.skipped;
        continue;
      }
      ++report.checked;
      const double a = analytic[t].data()[k];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      report.worst = std::max(report.worst, std::abs(a - numeric) / denom);
    }
  }
  return report;
}

inline constexpr double kFdStep = 1e-3;

struct TrialReport {
  FdReport fd;
  std::string label;
};

inline Probe gcn_probe(const GcnModel& m, const Matrix& x, const std::vector<Index>& labels,
                       const std::vector<Index>& mask, bool training, std::uint64_t seed) {
  Rng rng(seed);
  GcnCache cache;
  Probe p;
  p.loss = softmax_xent_masked(
               gcn_model_forward(m, FeatureMatrix::from_dense(x), rng, training, &cache),
               labels, mask)
               .loss;
  for (std::size_t l = 0; l + 1 < cache.pre_activation.size(); ++l) {
    append_pattern(cache.pre_activation[l], p.active);
  }
  return p;
}

// GCNs of depth 1..4 on random graphs with at most 10 vertices. With
// `training` set, dropout runs with a fixed seed, so its masks do not depend
// on the weights.
inline std::vector<TrialReport> gcn_gradient_sweep(bool residual, bool training,
                                                   std::uint64_t seed, int trials) {
  Rng rng(seed);
  std::vector<TrialReport> out;
  for (int trial = 0; trial < trials; ++trial) {
    const SparseGraph g = random_graph(rng, 2 + rng.below(9), rng.uniform(0.1, 0.6), false);
    const Index n = g.n_vertices(), f = 1 + rng.below(5), c = 2 + rng.below(3);
    GcnModel m = make_gcn(g, f, c, small_gcn_config(1 + rng.below(4), 4, residual),
                          rng.split("init", static_cast<std::uint64_t>(trial)));
    const Matrix x = random_features(rng, n, f);
    const auto labels = random_labels(rng, n, c);
    std::vector<Index> mask;
    for (Index i = 0; i < n; ++i) {
      if (rng.uniform() < 0.6) mask.push_back(i);
    }
    if (mask.empty()) mask.push_back(0);
    const std::uint64_t drop_seed = rng.next_u64();

    Rng fwd(drop_seed);
    GcnCache cache;
    const Matrix logits =
        gcn_model_forward(m, FeatureMatrix::from_dense(x), fwd, training, &cache);
    const auto grads = gcn_backward(m, cache, softmax_xent_masked(logits, labels, mask).dlogits);

    std::vector<Matrix*> params;
    for (auto& layer : m.layers) params.push_back(&layer.weights);
    out.push_back({kink_aware_grad_check(
                       [&] { return gcn_probe(m, x, labels, mask, training, drop_seed); },
                       params, grads, kFdStep),
                   "trial " + std::to_string(trial) + " depth " +
                       std::to_string(m.layers.size())});
  }
  return out;
}

inline Probe sign_probe(const SignModel& m, const SignPrecomputed& pre,
                        const std::vector<Index>& batch, const std::vector<Index>& labels,
                        bool training, std::uint64_t seed) {
  Rng rng(seed);
  SignCache cache;
  const Matrix logits = sign_forward(m, pre, batch, rng, training, &cache);
  Probe p;
  p.loss = softmax_xent_masked(logits, labels, all_rows(static_cast<Index>(batch.size()))).loss;
  append_pattern(cache.pre_activation, p.active);
  return p;
}

// SIGN with r in 0..3 on random graphs with at most 10 vertices and a random
// batch of rows.
inline std::vector<TrialReport> sign_gradient_sweep(bool training, std::uint64_t seed,
                                                    int trials) {
  Rng rng(seed);
  std::vector<TrialReport> out;
  for (int trial = 0; trial < trials; ++trial) {
    const SparseGraph g = random_graph(rng, 2 + rng.below(9), rng.uniform(0.1, 0.6), false);
    const Index n = g.n_vertices(), f = 1 + rng.below(4), c = 2 + rng.below(3);
    const Index r = rng.below(4);
    SignModel m = make_sign(f, c, small_sign_config(r, 3),
                            rng.split("init", static_cast<std::uint64_t>(trial)));
    const SignPrecomputed pre = sign_precompute(g, random_features(rng, n, f), r);
    std::vector<Index> batch;
    for (Index i = 0; i < n; ++i) {
      if (rng.uniform() < 0.7) batch.push_back(i);
    }
    if (batch.empty()) batch.push_back(n - 1);
    const auto labels = random_labels(rng, static_cast<Index>(batch.size()), c);
    const std::uint64_t drop_seed = rng.next_u64();

    Rng fwd(drop_seed);
    SignCache cache;
    const Matrix logits = sign_forward(m, pre, batch, fwd, training, &cache);
    const auto xent =
        softmax_xent_masked(logits, labels, all_rows(static_cast<Index>(batch.size())));
    const SignGradients grads = sign_backward(m, cache, xent.dlogits);

    std::vector<Matrix*> params;
    std::vector<Matrix> analytic;
    for (Index k = 0; k <= r; ++k) {
      params.push_back(&m.theta[k].weights);
      analytic.push_back(grads.theta[k]);
    }
    params.push_back(&m.omega.weights);
    analytic.push_back(grads.omega);
    out.push_back({kink_aware_grad_check(
                       [&] { return sign_probe(m, pre, batch, labels, training, drop_seed); },
                       params, analytic, kFdStep),
                   "trial " + std::to_string(trial) + " r " + std::to_string(r)});
  }
  return out;
}

// Random partition of rows into consecutive chunks of a shuffled order.
inline std::vector<std::vector<Index>> random_partition(Rng& rng, Index n) {
  std::vector<Index> order = all_rows(n);
  rng.shuffle(order);
  std::vector<std::vector<Index>> parts;
  for (Index b = 0; b < n;) {
    const Index size = 1 + rng.below(n - b);
    parts.emplace_back(order.begin() + b, order.begin() + b + size);
    b += size;
  }
  return parts;
}

struct BatchingReport {
  Index rows_compared = 0;
  Index rows_differing = 0;
  double max_gradient_gap = 0.0;
};

// Inference over random row partitions against one full pass, and the sum
// of per-batch gradients (each batch mean rescaled to its share of the full
// mean) against the full-batch gradient.
inline BatchingReport sign_batching_sweep(std::uint64_t seed, int trials) {
  Rng rng(seed);
  BatchingReport rep;
  for (int trial = 0; trial < trials; ++trial) {
    const SparseGraph g = random_connected_graph(rng, 40);
    const Index n = g.n_vertices(), c = 3;
    // Alternate dense and sparse feature storage.
    Matrix x = random_features(rng, n, 6);
    if (trial % 2 == 0) x = (x.array() < 0.8).select(0.0, x);
    const SignModel m = make_sign(6, c, small_sign_config(3, 4),
                                  rng.split("m", static_cast<std::uint64_t>(trial)));
    const SignPrecomputed pre = sign_precompute(g, x, 3);
    const auto labels = random_labels(rng, n, c);
    Rng unused(0);

    const Matrix full = sign_forward(m, pre, all_rows(n), unused, false);
    for (const auto& part : random_partition(rng, n)) {
      const Matrix y = sign_forward(m, pre, part, unused, false);
      for (std::size_t i = 0; i < part.size(); ++i) {
        ++rep.rows_compared;
        if (!(y.row(static_cast<Index>(i)) == full.row(part[i]))) ++rep.rows_differing;
      }
    }

    auto grads_for = [&](const std::vector<Index>& batch) {
      std::vector<Index> y;
      for (Index v : batch) y.push_back(labels[v]);
      SignCache cache;
      const Matrix logits = sign_forward(m, pre, batch, unused, false, &cache);
      XentResult xent =
          softmax_xent_masked(logits, y, all_rows(static_cast<Index>(batch.size())));
      xent.dlogits *= static_cast<double>(batch.size()) / static_cast<double>(n);
      return sign_backward(m, cache, xent.dlogits);
    };
    const SignGradients whole = grads_for(all_rows(n));
    SignGradients sum;
    for (const auto& part : random_partition(rng, n)) {
      const SignGradients g_part = grads_for(part);
      if (sum.theta.empty()) {
        sum = g_part;
        continue;
      }
      for (std::size_t k = 0; k < sum.theta.size(); ++k) sum.theta[k] += g_part.theta[k];
      sum.omega += g_part.omega;
    }
    for (std::size_t k = 0; k < whole.theta.size(); ++k) {
      rep.max_gradient_gap = std::max(rep.max_gradient_gap,
                                      (sum.theta[k] - whole.theta[k]).cwiseAbs().maxCoeff());
    }
    rep.max_gradient_gap =
        std::max(rep.max_gradient_gap, (sum.omega - whole.omega).cwiseAbs().maxCoeff());
  }
  return rep;
}

}  // namespace sgnn::testing
