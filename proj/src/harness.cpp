#include "sgnn/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "sgnn/rng.hpp"

namespace sgnn {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct SubsetMetrics {
  double loss = 0.0;
  double acc = 0.0;
};

// `rows` index into logits; labels are per logits row.
SubsetMetrics evaluate(const Matrix& logits, std::span<const Index> labels,
                       std::span<const Index> rows) {
  SubsetMetrics m;
  if (rows.empty()) return m;
  m.loss = softmax_xent_masked(logits, labels, rows).loss;
  const std::vector<Index> pred = argmax_rows(logits);
  Index hits = 0;
  for (Index r : rows) hits += pred[r] == labels[r] ? 1 : 0;
  m.acc = static_cast<double>(hits) / static_cast<double>(rows.size());
  return m;
}

void check_dataset(const Dataset& ds) {
  require(!ds.split.train.empty(), ErrorCode::kInvalidArgument,
          "dataset has no training vertices; apply a split first");
  require(ds.n_classes() >= 1, ErrorCode::kInvalidArgument,
          "dataset has no classes");
  require(static_cast<Index>(ds.labels.size()) == ds.n_vertices(),
          ErrorCode::kDimensionMismatch, "one label per vertex is required");
}

GraphSignal prepared_features(const Dataset& ds, const TrainConfig& cfg) {
  return cfg.row_normalize ? row_normalize_features(ds.features) : ds.features;
}

[[noreturn]] void rethrow_with_epoch(const Error& e, Index epoch) {
  fail(e.code(), "epoch " + std::to_string(epoch) + ": " + e.what());
}

}  // namespace

GcnRun train_gcn(const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  check_dataset(ds);
  const FeatureMatrix x = FeatureMatrix::from_dense(prepared_features(ds, cfg));
  const Rng run(cfg.seed);

  GcnRun out;
  out.model = make_gcn(ds.graph, x.cols(), ds.n_classes(), cfg, run.split("init"));
  GcnModel& model = out.model;
  double elapsed = 0.0;
  for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
    try {
      const auto start = Clock::now();
      Rng epoch_rng = run.split("epoch", static_cast<std::uint64_t>(epoch));
      GcnCache cache;
      const Matrix logits = gcn_model_forward(model, x, epoch_rng, true, &cache);
      const XentResult xent = softmax_xent_masked(logits, ds.labels, ds.split.train);
      const std::vector<Matrix> grads = gcn_backward(model, cache, xent.dlogits);
      for (std::size_t l = 0; l < grads.size(); ++l) {
        optimizer_step(model.layers[l], grads[l], cfg,
                       !cfg.decay_first_layer_only || l == 0);
      }
      elapsed += seconds_since(start);

      Rng unused(0);
      const Matrix eval = gcn_model_forward(model, x, unused, false);
      EpochRecord rec;
      rec.epoch = epoch;
      const auto tr = evaluate(eval, ds.labels, ds.split.train);
      const auto va = evaluate(eval, ds.labels, ds.split.val);
      const auto te = evaluate(eval, ds.labels, ds.split.test);
      rec.train_loss = tr.loss;
      rec.val_loss = va.loss;
      rec.test_loss = te.loss;
      rec.train_acc = tr.acc;
      rec.val_acc = va.acc;
      rec.test_acc = te.acc;
      rec.wall_time_s = elapsed;
      out.trace.push_back(rec);
    } catch (const Error& e) {
      rethrow_with_epoch(e, epoch);
    }
  }
  return out;
}

SignRun train_sign(const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  const SignPrecomputed pre =
      sign_precompute(ds.graph, prepared_features(ds, cfg), cfg.aggregators);
  return train_sign(ds, pre, cfg);
}

SignRun train_sign(const Dataset& ds, const SignPrecomputed& pre,
                   const TrainConfig& cfg) {
  cfg.validate();
  check_dataset(ds);
  require(pre.n() == ds.n_vertices(), ErrorCode::kDimensionMismatch,
          "precomputed blocks do not match the dataset");
  const Rng run(cfg.seed);
  SignRun out;
  out.model = make_sign(pre.blocks.front().cols(), ds.n_classes(), cfg,
                        run.split("init"));
  SignModel& model = out.model;

  const Index n_train = static_cast<Index>(ds.split.train.size());
  const Index batch = cfg.batch_size.value_or(n_train);
  out.steps_per_epoch = (n_train + batch - 1) / batch;

  // Evaluation rows: train, then validation, then test.
  std::vector<Index> eval_rows;
  for (const auto* part : {&ds.split.train, &ds.split.val, &ds.split.test}) {
    eval_rows.insert(eval_rows.end(), part->begin(), part->end());
  }
  std::vector<Index> eval_labels;
  for (Index v : eval_rows) eval_labels.push_back(ds.labels[v]);
  auto local_range = [](Index begin, Index size) {
    std::vector<Index> r(static_cast<std::size_t>(size));
    std::iota(r.begin(), r.end(), begin);
    return r;
  };
  const Index n_val = static_cast<Index>(ds.split.val.size());
  const auto train_rows = local_range(0, n_train);
  const auto val_rows = local_range(n_train, n_val);
  const auto test_rows =
      local_range(n_train + n_val, static_cast<Index>(ds.split.test.size()));

  double elapsed = 0.0;
  std::vector<Index> order = ds.split.train;
  for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
    try {
      const auto start = Clock::now();
      Rng shuffle_rng = run.split("shuffle", static_cast<std::uint64_t>(epoch));
      Rng epoch_rng = run.split("epoch", static_cast<std::uint64_t>(epoch));
      order = ds.split.train;
      shuffle_rng.shuffle(order);
      for (Index b = 0; b < n_train; b += batch) {
        const std::span<const Index> rows(order.data() + b,
                                          static_cast<std::size_t>(std::min(batch, n_train - b)));
        std::vector<Index> labels;
        labels.reserve(rows.size());
        for (Index v : rows) labels.push_back(ds.labels[v]);
        const auto mask = local_range(0, static_cast<Index>(rows.size()));
        SignCache cache;
        const Matrix logits = sign_forward(model, pre, rows, epoch_rng, true, &cache);
        const XentResult xent = softmax_xent_masked(logits, labels, mask);
        SignGradients grads = sign_backward(model, cache, xent.dlogits);
        for (Index k = 0; k <= model.r(); ++k) {
          optimizer_step(model.theta[k], grads.theta[k], cfg, true);
        }
        optimizer_step(model.omega, grads.omega, cfg, !cfg.decay_first_layer_only);
      }
      elapsed += seconds_since(start);

      Rng unused(0);
      const Matrix eval = sign_forward(model, pre, eval_rows, unused, false);
      EpochRecord rec;
      rec.epoch = epoch;
      const auto tr = evaluate(eval, eval_labels, train_rows);
      const auto va = evaluate(eval, eval_labels, val_rows);
      const auto te = evaluate(eval, eval_labels, test_rows);
      rec.train_loss = tr.loss;
      rec.val_loss = va.loss;
      rec.test_loss = te.loss;
      rec.train_acc = tr.acc;
      rec.val_acc = va.acc;
      rec.test_acc = te.acc;
      rec.wall_time_s = elapsed;
      out.trace.push_back(rec);
    } catch (const Error& e) {
      rethrow_with_epoch(e, epoch);
    }
  }
  return out;
}

MeanCi mean_ci95(std::span<const double> values) {
  MeanCi out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / n;
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.ci95 = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  out.defined = true;
  return out;
}

void summarize(RunSummary& summary) {
  std::vector<double> acc, time;
  for (const auto& run : summary.per_seed) {
    acc.push_back(run.test_acc);
    time.push_back(run.train_time_s);
  }
  const MeanCi a = mean_ci95(acc);
  const MeanCi t = mean_ci95(time);
  summary.mean_acc = a.mean;
  summary.ci95_acc = a.ci95;
  summary.mean_time_s = t.mean;
  summary.ci95_time_s = t.ci95;
  summary.ci95_defined = a.defined;
}

RunSummary repeat_runs(ModelKind kind, const Dataset& ds, const TrainConfig& cfg,
                       Index n_runs, std::uint64_t base_seed) {
  require(n_runs >= 1, ErrorCode::kInvalidArgument, "n_runs must be >= 1");
  cfg.validate();
  RunSummary summary;
  summary.model = kind;
  summary.config = cfg;
  summary.config.seed = base_seed;
  summary.runs_requested = n_runs;

  // The SIGN aggregations do not depend on the seed.
  std::optional<SignPrecomputed> pre;
  if (kind == ModelKind::kSign) {
    pre = sign_precompute(ds.graph, prepared_features(ds, cfg), cfg.aggregators);
  }
  for (Index i = 0; i < n_runs; ++i) {
    TrainConfig run_cfg = cfg;
    run_cfg.seed = base_seed + static_cast<std::uint64_t>(i);
    try {
      SeedRun run;
      run.seed = run_cfg.seed;
      run.trace = kind == ModelKind::kGcn ? train_gcn(ds, run_cfg).trace
                                          : train_sign(ds, *pre, run_cfg).trace;
      run.test_acc = run.trace.back().test_acc;
      run.train_time_s = run.trace.back().wall_time_s;
      summary.per_seed.push_back(std::move(run));
    } catch (const Error& e) {
      summary.failures.push_back(
          {run_cfg.seed, std::string(to_string(e.code())), e.what()});
    }
  }
  const Index ok = static_cast<Index>(summary.per_seed.size());
  if (5 * ok < 4 * n_runs) {
    fail(ErrorCode::kInsufficientRuns,
         std::to_string(ok) + " of " + std::to_string(n_runs) +
             " runs succeeded; at least 80% are required" +
             (summary.failures.empty()
                  ? std::string()
                  : " (first failure: " + summary.failures.front().message + ")"));
  }
  summarize(summary);
  return summary;
}

ExportFormat parse_export_format(std::string_view name) {
  if (name == "json") return ExportFormat::kJson;
  if (name == "csv") return ExportFormat::kCsv;
  fail(ErrorCode::kInvalidArgument,
       "unknown format '" + std::string(name) + "' (expected json or csv)");
}

std::string summary_to_json(const RunSummary& s) {
  json j;
  j["model"] = std::string(to_string(s.model));
  j["config"] = json::parse(config_to_json(s.config));
  j["runs_requested"] = s.runs_requested;
  j["per_seed"] = json::array();
  for (const auto& run : s.per_seed) {
    json r;
    r["seed"] = run.seed;
    r["test_acc"] = run.test_acc;
    r["train_time_s"] = run.train_time_s;
    r["trace"] = json::array();
    for (const auto& e : run.trace) {
      r["trace"].push_back({{"epoch", e.epoch},
                            {"train_loss", e.train_loss},
                            {"val_loss", e.val_loss},
                            {"test_loss", e.test_loss},
                            {"train_acc", e.train_acc},
                            {"val_acc", e.val_acc},
                            {"test_acc", e.test_acc},
                            {"wall_time_s", e.wall_time_s}});
    }
    j["per_seed"].push_back(std::move(r));
  }
  j["failures"] = json::array();
  for (const auto& f : s.failures) {
    j["failures"].push_back(
        {{"seed", f.seed}, {"code", f.code}, {"message", f.message}});
  }
  j["mean_acc"] = s.mean_acc;
  j["ci95_acc"] = s.ci95_acc;
  j["mean_time_s"] = s.mean_time_s;
  j["ci95_time_s"] = s.ci95_time_s;
  j["ci95_defined"] = s.ci95_defined;
  return j.dump(2);
}

RunSummary summary_from_json(std::string_view text) {
  RunSummary s;
  try {
    const json j = json::parse(text);
    s.model = parse_model_kind(j.at("model").get<std::string>());
    s.config = config_from_json(j.at("config").dump(), defaults_for(s.model));
    s.runs_requested = j.at("runs_requested").get<Index>();
    for (const auto& r : j.at("per_seed")) {
      SeedRun run;
      run.seed = r.at("seed").get<std::uint64_t>();
      run.test_acc = r.at("test_acc").get<double>();
      run.train_time_s = r.at("train_time_s").get<double>();
      for (const auto& e : r.at("trace")) {
        EpochRecord rec;
        rec.epoch = e.at("epoch").get<Index>();
        rec.train_loss = e.at("train_loss").get<double>();
        rec.val_loss = e.at("val_loss").get<double>();
        rec.test_loss = e.at("test_loss").get<double>();
        rec.train_acc = e.at("train_acc").get<double>();
        rec.val_acc = e.at("val_acc").get<double>();
        rec.test_acc = e.at("test_acc").get<double>();
        rec.wall_time_s = e.at("wall_time_s").get<double>();
        run.trace.push_back(rec);
      }
      s.per_seed.push_back(std::move(run));
    }
    for (const auto& f : j.at("failures")) {
      s.failures.push_back({f.at("seed").get<std::uint64_t>(),
                            f.at("code").get<std::string>(),
                            f.at("message").get<std::string>()});
    }
    s.mean_acc = j.at("mean_acc").get<double>();
    s.ci95_acc = j.at("ci95_acc").get<double>();
    s.mean_time_s = j.at("mean_time_s").get<double>();
    s.ci95_time_s = j.at("ci95_time_s").get<double>();
    s.ci95_defined = j.at("ci95_defined").get<bool>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("bad run summary: ") + e.what());
  }
  return s;
}

std::string summary_to_csv(const RunSummary& s) {
  std::string out =
      "seed,epoch,train_loss,val_loss,test_loss,train_acc,val_acc,test_acc,"
      "wall_time_s\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += ',';
    out += buf;
  };
  for (const auto& run : s.per_seed) {
    for (const auto& e : run.trace) {
      out += std::to_string(run.seed) + ',' + std::to_string(e.epoch);
      num(e.train_loss);
      num(e.val_loss);
      num(e.test_loss);
      num(e.train_acc);
      num(e.val_acc);
      num(e.test_acc);
      num(e.wall_time_s);
      out += '\n';
    }
  }
  return out;
}

void export_results(const RunSummary& summary, const std::string& path,
                    ExportFormat format) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << (format == ExportFormat::kJson ? summary_to_json(summary) + "\n"
                                        : summary_to_csv(summary));
  out.flush();
  if (!out) fail(ErrorCode::kIo, "write to '" + path + "' failed");
}

}  // namespace sgnn
