#include "sgnn/models.hpp"

#include <string>

#include "sgnn/checkpoint.hpp"
#include "sgnn/rng.hpp"

namespace sgnn {

namespace {

std::vector<std::int64_t> step_counts_of(const std::vector<DenseParam>& params) {
  std::vector<std::int64_t> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.step_count);
  return out;
}

Matrix row_products(const Matrix& x, const Matrix& w) {
  Matrix out(x.rows(), w.cols());
  for (Index i = 0; i < x.rows(); ++i) out.row(i).noalias() = x.row(i) * w;
  return out;
}

void check_gcn_input(const GcnModel& model, const FeatureMatrix& x) {
  require(!model.layers.empty(), ErrorCode::kInvalidArgument,
          "GCN model has no layers");
  if (x.rows() != model.a_hat.n() || x.cols() != model.layers.front().rows()) {
    fail(ErrorCode::kDimensionMismatch,
         "GCN input is " + std::to_string(x.rows()) + "x" +
             std::to_string(x.cols()) + ", model expects " +
             std::to_string(model.a_hat.n()) + "x" +
             std::to_string(model.layers.front().rows()));
  }
  for (std::size_t l = 1; l < model.layers.size(); ++l) {
    if (model.layers[l].rows() != model.layers[l - 1].cols()) {
      fail(ErrorCode::kDimensionMismatch,
           "GCN layer " + std::to_string(l) + " does not chain with layer " +
               std::to_string(l - 1));
    }
  }
}

Matrix gcn_propagate(const GcnModel& model, const FeatureMatrix& x, Rng& rng,
                     bool training, bool residual, GcnCache* cache) {
  check_gcn_input(model, x);
  const std::size_t depth = model.layers.size();
  if (residual) {
    for (std::size_t l = 1; l + 1 < depth; ++l) {
      if (model.layers[l].rows() != model.layers[l].cols()) {
        fail(ErrorCode::kDimensionMismatch,
             "residual GCN layer " + std::to_string(l) + " maps " +
                 std::to_string(model.layers[l].rows()) + " to " +
                 std::to_string(model.layers[l].cols()) + " features");
      }
    }
  }
  const bool drop = training && model.dropout > 0.0;
  const Rng streams(drop ? rng.next_u64() : 0);
  if (cache) {
    *cache = GcnCache{};
    cache->step_counts = step_counts_of(model.layers);
  }
  const CsrMatrix& a = model.a_hat.csr();

  // Input layer: the features may be sparse and need no input gradient.
  FeatureMatrix p0;
  if (drop) {
    Rng layer_rng = streams.split("gcn.dropout", 0);
    p0 = x.dropout(model.dropout, layer_rng).propagate(a);
  } else {
    p0 = x.propagate(a);
  }
  Matrix z = p0.multiply(model.layers[0].weights);
  if (cache) {
    cache->propagated.push_back(std::move(p0));
    cache->pre_activation.push_back(z);
    cache->dropout_mask.emplace_back();
    cache->residual_applied.push_back(false);
  }

  Matrix prev_input;  // X_{l-1} for the residual sum
  Matrix h;
  for (std::size_t l = 1; l < depth; ++l) {
    // Output of layer l - 1, which is a middle layer when l >= 2.
    h = relu(z);
    const bool res_prev = residual && l >= 2;
    if (res_prev) h += prev_input;
    if (cache) cache->residual_applied[l - 1] = res_prev;

    Matrix hd;
    Matrix mask;
    if (drop) {
      Rng layer_rng = streams.split("gcn.dropout", l);
      DropoutResult d = dropout_forward(h, model.dropout, layer_rng, true);
      hd = std::move(d.y);
      mask = std::move(d.mask);
    } else {
      hd = h;
      mask = Matrix::Ones(h.rows(), h.cols());
    }
    Matrix p = a.multiply(hd);
    z = row_products(p, model.layers[l].weights);
    if (cache) {
      cache->propagated.emplace_back(RowMatrix(p));
      cache->pre_activation.push_back(z);
      cache->dropout_mask.push_back(std::move(mask));
      cache->residual_applied.push_back(false);
    }
    prev_input = std::move(h);
  }
  return z;
}

}  // namespace

GcnModel make_gcn(const SparseGraph& g, Index f_in, Index n_classes,
                  const TrainConfig& cfg, const Rng& rng) {
  require(f_in >= 1 && n_classes >= 1, ErrorCode::kInvalidArgument,
          "GCN needs at least one feature and one class");
  cfg.validate();
  GcnModel model;
  model.a_hat = laplacian(g, LaplacianKind::kRenormalized);
  model.dropout = cfg.dropout;
  model.residual = cfg.residual;
  Index width = f_in;
  for (Index l = 0; l < cfg.layers; ++l) {
    const Index out = l + 1 == cfg.layers ? n_classes : cfg.hidden_units;
    Rng layer_rng = rng.split("gcn.layer", static_cast<std::uint64_t>(l));
    model.layers.emplace_back(xavier_init(width, out, layer_rng));
    width = out;
  }
  return model;
}

Matrix gcn_forward(const GcnModel& model, const FeatureMatrix& x, Rng& rng,
                   bool training, GcnCache* cache) {
  return gcn_propagate(model, x, rng, training, false, cache);
}

Matrix gcn_forward(const GcnModel& model, const GraphSignal& x, Rng& rng,
                   bool training, GcnCache* cache) {
  return gcn_forward(model, FeatureMatrix::from_dense(x), rng, training, cache);
}

Matrix gcn_residual_forward(const GcnModel& model, const FeatureMatrix& x,
                            Rng& rng, bool training, GcnCache* cache) {
  return gcn_propagate(model, x, rng, training, true, cache);
}

Matrix gcn_residual_forward(const GcnModel& model, const GraphSignal& x,
                            Rng& rng, bool training, GcnCache* cache) {
  return gcn_residual_forward(model, FeatureMatrix::from_dense(x), rng,
                              training, cache);
}

Matrix gcn_model_forward(const GcnModel& model, const FeatureMatrix& x,
                         Rng& rng, bool training, GcnCache* cache) {
  return gcn_propagate(model, x, rng, training, model.residual, cache);
}

std::vector<Matrix> gcn_backward(const GcnModel& model, const GcnCache& cache,
                                 const Matrix& dlogits) {
  const std::size_t depth = model.layers.size();
  if (cache.propagated.size() != depth ||
      cache.step_counts != step_counts_of(model.layers)) {
    fail(ErrorCode::kStaleCache,
         "GCN cache does not belong to the current model state");
  }
  const Matrix& logits = cache.pre_activation.back();
  if (dlogits.rows() != logits.rows() || dlogits.cols() != logits.cols()) {
    fail(ErrorCode::kDimensionMismatch, "dlogits shape differs from the logits");
  }
  const CsrMatrix& a = model.a_hat.csr();
  std::vector<Matrix> grads(depth);
  Matrix d_out = dlogits;  // gradient with respect to the output of layer l
  for (std::size_t l = depth; l-- > 0;) {
    const Matrix dz =
        l + 1 == depth ? d_out : relu_backward(cache.pre_activation[l], d_out);
    grads[l] = cache.propagated[l].transpose_multiply(dz);
    if (l == 0) break;
    const Matrix dp = row_products(dz, model.layers[l].weights.transpose());
    Matrix dh = a.multiply(dp).cwiseProduct(cache.dropout_mask[l]);
    if (cache.residual_applied[l]) dh += d_out;
    d_out = std::move(dh);
  }
  return grads;
}

// ---------------------------------------------------------------- SIGN

SignModel make_sign(Index f_in, Index n_classes, const TrainConfig& cfg,
                    const Rng& rng) {
  require(f_in >= 1 && n_classes >= 1, ErrorCode::kInvalidArgument,
          "SIGN needs at least one feature and one class");
  cfg.validate();
  SignModel model;
  model.dropout = cfg.dropout;
  for (Index k = 0; k <= cfg.aggregators; ++k) {
    Rng branch = rng.split("sign.theta", static_cast<std::uint64_t>(k));
    model.theta.emplace_back(xavier_init(f_in, cfg.hidden_units, branch));
  }
  Rng head = rng.split("sign.omega");
  model.omega = DenseParam(
      xavier_init((cfg.aggregators + 1) * cfg.hidden_units, n_classes, head));
  return model;
}

SignPrecomputed sign_precompute(const SparseGraph& g, const GraphSignal& x,
                                Index r, const SignPrecomputeOptions& options) {
  require(r >= 0, ErrorCode::kInvalidArgument,
          "aggregator count must be nonnegative");
  if (x.rows() != g.n_vertices()) {
    fail(ErrorCode::kDimensionMismatch,
         "SIGN features have " + std::to_string(x.rows()) + " rows for " +
             std::to_string(g.n_vertices()) + " vertices");
  }
  if (options.aggregator.binarize && !options.materialize) {
    fail(ErrorCode::kInvalidArgument,
         "binarized aggregators require materialize = true");
  }
  SignPrecomputed pre;
  pre.blocks.push_back(FeatureMatrix::from_dense(x));
  for (Index k = 1; k <= r; ++k) {
    const int order = static_cast<int>(k);
    Matrix block = options.materialize
                       ? sign_aggregator(g, order, options.aggregator).multiply(x)
                       : apply_sign_aggregator(g, order, x);
    pre.blocks.push_back(FeatureMatrix::from_dense(block));
  }
  return pre;
}

Matrix sign_forward(const SignModel& model, const SignPrecomputed& pre,
                    std::span<const Index> batch, Rng& rng, bool training,
                    SignCache* cache) {
  if (model.r() != pre.r()) {
    fail(ErrorCode::kDimensionMismatch,
         "SIGN model has r = " + std::to_string(model.r()) +
             " but the precomputed blocks have r = " + std::to_string(pre.r()));
  }
  const Index width = model.branch_width();
  if (model.omega.rows() != (model.r() + 1) * width) {
    fail(ErrorCode::kDimensionMismatch,
         "SIGN Omega has " + std::to_string(model.omega.rows()) +
             " rows, expected " + std::to_string((model.r() + 1) * width));
  }
  for (const auto& t : model.theta) {
    if (t.rows() != pre.blocks.front().cols() || t.cols() != width) {
      fail(ErrorCode::kDimensionMismatch,
           "SIGN branch weights must all be F_0 x F_1");
    }
  }
  const bool drop = training && model.dropout > 0.0;
  const Rng streams(drop ? rng.next_u64() : 0);
  const Index rows = static_cast<Index>(batch.size());

  if (cache) {
    *cache = SignCache{};
    cache->batch.assign(batch.begin(), batch.end());
    cache->step_counts = step_counts_of(model.theta);
    cache->step_counts.push_back(model.omega.step_count);
  }
  Matrix pre_act(rows, (model.r() + 1) * width);
  for (Index k = 0; k <= model.r(); ++k) {
    FeatureMatrix in = pre.blocks[k].gather_rows(batch);
    if (drop) {
      Rng branch_rng = streams.split("sign.dropout", static_cast<std::uint64_t>(k));
      in = in.dropout(model.dropout, branch_rng);
    }
    pre_act.middleCols(k * width, width) = in.multiply(model.theta[k].weights);
    if (cache) cache->inputs.push_back(std::move(in));
  }
  Rng hidden_rng = streams.split("sign.dropout.hidden");
  DropoutResult hidden = dropout_forward(relu(pre_act), model.dropout,
                                         hidden_rng, drop);
  Matrix logits = row_products(hidden.y, model.omega.weights);
  if (cache) {
    cache->pre_activation = std::move(pre_act);
    cache->hidden_mask = std::move(hidden.mask);
    cache->hidden = std::move(hidden.y);
  }
  return logits;
}

SignGradients sign_backward(const SignModel& model, const SignCache& cache,
                            const Matrix& dlogits) {
  std::vector<std::int64_t> now = step_counts_of(model.theta);
  now.push_back(model.omega.step_count);
  if (now != cache.step_counts ||
      static_cast<Index>(cache.inputs.size()) != model.r() + 1) {
    fail(ErrorCode::kStaleCache,
         "SIGN cache does not belong to the current model state");
  }
  if (dlogits.rows() != cache.hidden.rows() ||
      dlogits.cols() != model.n_classes()) {
    fail(ErrorCode::kDimensionMismatch, "dlogits shape differs from the logits");
  }
  const Index width = model.branch_width();
  SignGradients grads;
  grads.omega = FeatureMatrix(RowMatrix(cache.hidden)).transpose_multiply(dlogits);
  const Matrix dhidden =
      row_products(dlogits, model.omega.weights.transpose())
          .cwiseProduct(cache.hidden_mask);
  const Matrix dpre = relu_backward(cache.pre_activation, dhidden);
  for (Index k = 0; k <= model.r(); ++k) {
    grads.theta.push_back(cache.inputs[k].transpose_multiply(
        dpre.middleCols(k * width, width)));
  }
  return grads;
}

// ----------------------------------------------------------- checkpoints

namespace {

void put_param(Container& c, const std::string& prefix, const DenseParam& p,
               nlohmann::json& steps) {
  c.matrices.push_back({prefix + ".weights", p.weights});
  c.matrices.push_back({prefix + ".adam_m", p.adam_m});
  c.matrices.push_back({prefix + ".adam_v", p.adam_v});
  steps[prefix] = p.step_count;
}

DenseParam get_param(const Container& c, const std::string& prefix) {
  DenseParam p;
  p.weights = c.get(prefix + ".weights");
  p.adam_m = c.get(prefix + ".adam_m");
  p.adam_v = c.get(prefix + ".adam_v");
  try {
    p.step_count = c.meta.at("step_counts").at(prefix).get<std::int64_t>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::kParse, "checkpoint lacks the step count of " + prefix);
  }
  return p;
}

void expect_kind(const Container& c, const std::string& path,
                 const std::string& kind) {
  if (c.meta.value("kind", std::string()) != kind) {
    fail(ErrorCode::kParse, "'" + path + "' is not a " + kind + " checkpoint");
  }
}

TrainConfig stored_config(const Container& c, ModelKind kind) {
  return config_from_json(c.meta.at("config").dump(), defaults_for(kind));
}

}  // namespace

void save_gcn(const std::string& path, const GcnModel& model,
              const TrainConfig& cfg) {
  Container c;
  c.meta["kind"] = "gcn";
  c.meta["config"] = nlohmann::json::parse(config_to_json(cfg));
  c.meta["dropout"] = model.dropout;
  c.meta["residual"] = model.residual;
  c.meta["layers"] = model.layers.size();
  nlohmann::json steps = nlohmann::json::object();
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    put_param(c, "layer." + std::to_string(l), model.layers[l], steps);
  }
  c.meta["step_counts"] = steps;
  write_container(path, c);
}

GcnModel load_gcn(const std::string& path, const SparseGraph& g,
                  TrainConfig* cfg) {
  const Container c = read_container(path);
  expect_kind(c, path, "gcn");
  GcnModel model;
  model.a_hat = laplacian(g, LaplacianKind::kRenormalized);
  try {
    model.dropout = c.meta.at("dropout").get<double>();
    model.residual = c.meta.at("residual").get<bool>();
    const auto depth = c.meta.at("layers").get<std::size_t>();
    for (std::size_t l = 0; l < depth; ++l) {
      model.layers.push_back(get_param(c, "layer." + std::to_string(l)));
    }
    if (cfg) *cfg = stored_config(c, ModelKind::kGcn);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, "bad GCN checkpoint '" + path + "': " + e.what());
  }
  return model;
}

void save_sign(const std::string& path, const SignModel& model,
               const TrainConfig& cfg) {
  Container c;
  c.meta["kind"] = "sign";
  c.meta["config"] = nlohmann::json::parse(config_to_json(cfg));
  c.meta["dropout"] = model.dropout;
  c.meta["r"] = model.r();
  nlohmann::json steps = nlohmann::json::object();
  for (Index k = 0; k <= model.r(); ++k) {
    put_param(c, "theta." + std::to_string(k), model.theta[k], steps);
  }
  put_param(c, "omega", model.omega, steps);
  c.meta["step_counts"] = steps;
  write_container(path, c);
}

SignModel load_sign(const std::string& path, TrainConfig* cfg) {
  const Container c = read_container(path);
  expect_kind(c, path, "sign");
  SignModel model;
  try {
    model.dropout = c.meta.at("dropout").get<double>();
    const auto r = c.meta.at("r").get<Index>();
    for (Index k = 0; k <= r; ++k) {
      model.theta.push_back(get_param(c, "theta." + std::to_string(k)));
    }
    model.omega = get_param(c, "omega");
    if (cfg) *cfg = stored_config(c, ModelKind::kSign);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, "bad SIGN checkpoint '" + path + "': " + e.what());
  }
  return model;
}

}  // namespace sgnn
