#include "sgnn/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sgnn {

using nlohmann::json;

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::kGcn ? "gcn" : "sign";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "gcn") return ModelKind::kGcn;
  if (name == "sign") return ModelKind::kSign;
  fail(ErrorCode::kInvalidArgument,
       "unknown model '" + std::string(name) + "' (expected gcn or sign)");
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  fail(ErrorCode::kInvalidArgument,
       "unknown optimizer '" + std::string(name) + "' (expected adam or sgd)");
}

std::string_view to_string(SplitMode mode) {
  return mode == SplitMode::kPlanetoid ? "planetoid" : "range";
}

SplitMode parse_split_mode(std::string_view name) {
  if (name == "planetoid") return SplitMode::kPlanetoid;
  if (name == "range") return SplitMode::kRange;
  fail(ErrorCode::kInvalidArgument,
       "unknown split '" + std::string(name) + "' (expected planetoid or range)");
}

void TrainConfig::validate() const {
  auto bad = [](const std::string& what) {
    fail(ErrorCode::kInvalidArgument, "invalid config: " + what);
  };
  // Zero is accepted so a run can be frozen (the loss trace then stays flat).
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    bad("learning_rate must be finite and >= 0");
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    bad("weight_decay must be finite and >= 0");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) bad("dropout must lie in [0, 1)");
  if (epochs < 1) bad("epochs must be >= 1");
  if (batch_size && *batch_size < 1) bad("batch_size must be >= 1");
  if (hidden_units < 1) bad("hidden_units must be >= 1");
  if (layers < 1) bad("layers must be >= 1");
  if (aggregators < 0) bad("aggregators must be >= 0");
}

TrainConfig gcn_defaults() { return TrainConfig{}; }

TrainConfig sign_defaults() {
  TrainConfig cfg;
  cfg.learning_rate = 0.15;
  cfg.weight_decay = 1e-5;
  cfg.dropout = 0.5;
  cfg.epochs = 50;
  cfg.batch_size = 512;
  cfg.hidden_units = 8;
  cfg.aggregators = 4;
  return cfg;
}

TrainConfig defaults_for(ModelKind kind) {
  return kind == ModelKind::kGcn ? gcn_defaults() : sign_defaults();
}

std::string config_to_json(const TrainConfig& cfg) {
  json j;
  j["learning_rate"] = cfg.learning_rate;
  j["weight_decay"] = cfg.weight_decay;
  j["dropout"] = cfg.dropout;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size ? json(*cfg.batch_size) : json(nullptr);
  j["seed"] = cfg.seed;
  j["hidden_units"] = cfg.hidden_units;
  j["layers"] = cfg.layers;
  j["aggregators"] = cfg.aggregators;
  j["residual"] = cfg.residual;
  j["decay_first_layer_only"] = cfg.decay_first_layer_only;
  j["optimizer"] = std::string(to_string(cfg.optimizer));
  j["row_normalize"] = cfg.row_normalize;
  j["split"] = std::string(to_string(cfg.split));
  return j.dump(2);
}

namespace {

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kParse, "config key '" + key + "' has the wrong type");
  }
}

Index get_count(const json& v, const std::string& key) {
  if (!v.is_number_integer()) {
    fail(ErrorCode::kParse, "config key '" + key + "' must be an integer");
  }
  return v.get<Index>();
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) {
    fail(ErrorCode::kParse, "config key '" + key + "' must be a number");
  }
  return v.get<double>();
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) {
    fail(ErrorCode::kParse, "config key '" + key + "' must be true or false");
  }
  return v.get<bool>();
}

}  // namespace

TrainConfig config_from_json(std::string_view text, const TrainConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kParse, "config must be a JSON object");

  TrainConfig cfg = base;
  for (const auto& [key, v] : j.items()) {
    if (key == "learning_rate") {
      cfg.learning_rate = get_number(v, key);
    } else if (key == "weight_decay") {
      cfg.weight_decay = get_number(v, key);
    } else if (key == "dropout") {
      cfg.dropout = get_number(v, key);
    } else if (key == "epochs") {
      cfg.epochs = get_count(v, key);
    } else if (key == "batch_size") {
      if (v.is_null()) {
        cfg.batch_size.reset();
      } else {
        cfg.batch_size = get_count(v, key);
      }
    } else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        fail(ErrorCode::kParse, "config key 'seed' must be a nonnegative integer");
      }
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "hidden_units") {
      cfg.hidden_units = get_count(v, key);
    } else if (key == "layers") {
      cfg.layers = get_count(v, key);
    } else if (key == "aggregators") {
      cfg.aggregators = get_count(v, key);
    } else if (key == "residual") {
      cfg.residual = get_bool(v, key);
    } else if (key == "decay_first_layer_only") {
      cfg.decay_first_layer_only = get_bool(v, key);
    } else if (key == "optimizer") {
      cfg.optimizer = parse_optimizer_kind(get_as<std::string>(v, key));
    } else if (key == "row_normalize") {
      cfg.row_normalize = get_bool(v, key);
    } else if (key == "split") {
      cfg.split = parse_split_mode(get_as<std::string>(v, key));
    } else {
      fail(ErrorCode::kParse, "unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_config_file(const std::string& path, const TrainConfig& base) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return config_from_json(text.str(), base);
}

}  // namespace sgnn
