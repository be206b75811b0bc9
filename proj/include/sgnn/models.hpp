#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sgnn/common.hpp"
#include "sgnn/config.hpp"
#include "sgnn/csr_matrix.hpp"
#include "sgnn/feature_matrix.hpp"
#include "sgnn/graph.hpp"
#include "sgnn/nn.hpp"

namespace sgnn {

class Rng;

// ---------------------------------------------------------------- GCN

struct GcnModel {
  std::vector<DenseParam> layers;  // f_0 -> h -> ... -> C
  SparseSymMatrix a_hat;           // renormalized propagation matrix
  double dropout = 0.5;
  bool residual = false;

  Index n_classes() const { return layers.back().cols(); }
};

// Xavier-initialized model with cfg.layers layers of width cfg.hidden_units.
// Layer l draws from rng.split("gcn.layer", l).
GcnModel make_gcn(const SparseGraph& g, Index f_in, Index n_classes,
                  const TrainConfig& cfg, const Rng& rng);

// Intermediates of one forward pass, consumed by gcn_backward.
struct GcnCache {
  std::vector<FeatureMatrix> propagated;   // A_hat * dropout(H_l)
  std::vector<Matrix> pre_activation;      // propagated * Theta_l
  std::vector<Matrix> dropout_mask;        // empty for the input layer
  std::vector<bool> residual_applied;
  std::vector<std::int64_t> step_counts;   // optimizer state at forward time
};

// Plain propagation: H <- A_hat dropout(H) Theta, relu between layers, raw
// logits at the end. One draw is taken from `rng` per call; layer l's
// dropout stream is derived from it with split("gcn.dropout", l).
Matrix gcn_forward(const GcnModel& model, const FeatureMatrix& x, Rng& rng,
                   bool training, GcnCache* cache = nullptr);
Matrix gcn_forward(const GcnModel& model, const GraphSignal& x, Rng& rng,
                   bool training, GcnCache* cache = nullptr);

// X_{l+1} = relu(A_hat X_l Theta_l) + X_l on every layer except the first
// and the last. Throws kDimensionMismatch if such a layer changes width.
Matrix gcn_residual_forward(const GcnModel& model, const FeatureMatrix& x,
                            Rng& rng, bool training, GcnCache* cache = nullptr);
Matrix gcn_residual_forward(const GcnModel& model, const GraphSignal& x,
                            Rng& rng, bool training, GcnCache* cache = nullptr);

// Dispatches on model.residual.
Matrix gcn_model_forward(const GcnModel& model, const FeatureMatrix& x,
                         Rng& rng, bool training, GcnCache* cache = nullptr);

// Gradients of sum(dlogits .* logits) with respect to every Theta_l.
// Throws kStaleCache if the model was updated after the forward pass.
std::vector<Matrix> gcn_backward(const GcnModel& model, const GcnCache& cache,
                                 const Matrix& dlogits);

// --------------------------------------------------------------- SIGN

struct SignModel {
  std::vector<DenseParam> theta;  // Theta_0..Theta_r, each F_0 x F_1
  DenseParam omega;               // (r + 1) F_1 x C
  double dropout = 0.5;

  Index r() const { return static_cast<Index>(theta.size()) - 1; }
  Index branch_width() const { return theta.front().cols(); }
  Index n_classes() const { return omega.cols(); }
};

// Theta_k draws from rng.split("sign.theta", k), Omega from
// rng.split("sign.omega").
SignModel make_sign(Index f_in, Index n_classes, const TrainConfig& cfg,
                    const Rng& rng);

struct SignPrecomputed {
  std::vector<FeatureMatrix> blocks;  // X, A_1 X, ..., A_r X

  Index r() const { return static_cast<Index>(blocks.size()) - 1; }
  Index n() const { return blocks.front().rows(); }
};

struct SignPrecomputeOptions {
  // Build each A_k with sign_aggregator (subject to its nnz budget) instead
  // of applying it matrix-free. Required for binarized aggregators.
  bool materialize = false;
  AggregatorOptions aggregator;
};

SignPrecomputed sign_precompute(const SparseGraph& g, const GraphSignal& x,
                                Index r,
                                const SignPrecomputeOptions& options = {});

struct SignCache {
  std::vector<Index> batch;
  std::vector<FeatureMatrix> inputs;  // dropout(blocks[k][batch])
  Matrix pre_activation;              // concat_k inputs_k Theta_k
  Matrix hidden_mask;                 // dropout multiplier on relu output
  Matrix hidden;                      // dropout(relu(pre_activation))
  std::vector<std::int64_t> step_counts;
};

// Logits of the batch rows: relu(concat_k dropout(blocks[k][row]) Theta_k),
// then dropout, then Omega. Every row is computed independently, so the
// result for a row does not depend on the rest of the batch.
Matrix sign_forward(const SignModel& model, const SignPrecomputed& pre,
                    std::span<const Index> batch, Rng& rng, bool training,
                    SignCache* cache = nullptr);

struct SignGradients {
  std::vector<Matrix> theta;
  Matrix omega;
};

SignGradients sign_backward(const SignModel& model, const SignCache& cache,
                            const Matrix& dlogits);

// ----------------------------------------------------------- checkpoints

// Weights, Adam moments and step counts, plus the config in the header.
// The propagation matrix is not stored; load_gcn rebuilds it from `g`.
void save_gcn(const std::string& path, const GcnModel& model,
              const TrainConfig& cfg);
GcnModel load_gcn(const std::string& path, const SparseGraph& g,
                  TrainConfig* cfg = nullptr);

void save_sign(const std::string& path, const SignModel& model,
               const TrainConfig& cfg);
SignModel load_sign(const std::string& path, TrainConfig* cfg = nullptr);

}  // namespace sgnn
