#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "sgnn/common.hpp"

namespace sgnn {

enum class ModelKind { kGcn, kSign };
enum class OptimizerKind { kAdam, kSgd };
enum class SplitMode { kPlanetoid, kRange };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);
std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);
std::string_view to_string(SplitMode mode);
SplitMode parse_split_mode(std::string_view name);

// Hyperparameters of one training run. The JSON form uses these field names
// as keys; enum fields are strings.
struct TrainConfig {
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  double dropout = 0.5;
  Index epochs = 200;
  // SIGN minibatch size; GCN is always full batch.
  std::optional<Index> batch_size;
  std::uint64_t seed = 0;
  // GCN hidden width, or the per-branch width F_1 of SIGN.
  Index hidden_units = 16;
  // GCN depth (number of propagation layers).
  Index layers = 2;
  // SIGN aggregator count r.
  Index aggregators = 4;
  bool residual = false;
  bool decay_first_layer_only = false;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  bool row_normalize = true;
  SplitMode split = SplitMode::kPlanetoid;

  bool operator==(const TrainConfig&) const = default;

  // Throws kInvalidArgument on out-of-range values.
  void validate() const;
};

// Adam, lr 0.01, weight decay 5e-4, 2 layers, 16 hidden, dropout 0.5,
// 200 epochs.
TrainConfig gcn_defaults();
// Adam, lr 0.15, weight decay 1e-5, batch 512, r = 4, 8 hidden per branch,
// dropout 0.5, 50 epochs.
TrainConfig sign_defaults();
TrainConfig defaults_for(ModelKind kind);

std::string config_to_json(const TrainConfig& cfg);
// Keys present in `json` override `base`; unknown keys and wrongly typed
// values are kParse errors. The result is validated.
TrainConfig config_from_json(std::string_view json, const TrainConfig& base);
TrainConfig load_config_file(const std::string& path, const TrainConfig& base);

}  // namespace sgnn
