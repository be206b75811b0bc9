#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgnn/common.hpp"
#include "sgnn/config.hpp"
#include "sgnn/data_io.hpp"
#include "sgnn/models.hpp"

namespace sgnn {

// Metrics after an epoch's updates, measured with dropout off.
// wall_time_s is the optimization time accumulated up to this epoch.
struct EpochRecord {
  Index epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double test_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  double wall_time_s = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct SeedRun {
  std::uint64_t seed = 0;
  double test_acc = 0.0;
  double train_time_s = 0.0;
  std::vector<EpochRecord> trace;

  bool operator==(const SeedRun&) const = default;
};

struct FailedRun {
  std::uint64_t seed = 0;
  std::string code;
  std::string message;

  bool operator==(const FailedRun&) const = default;
};

struct RunSummary {
  ModelKind model = ModelKind::kGcn;
  TrainConfig config;
  Index runs_requested = 0;
  std::vector<SeedRun> per_seed;
  std::vector<FailedRun> failures;
  double mean_acc = 0.0;
  double ci95_acc = 0.0;
  double mean_time_s = 0.0;
  double ci95_time_s = 0.0;
  // False when fewer than two runs succeeded; the ci95 fields are then 0.
  bool ci95_defined = false;

  bool operator==(const RunSummary&) const = default;
};

struct GcnRun {
  GcnModel model;
  std::vector<EpochRecord> trace;
};

struct SignRun {
  SignModel model;
  std::vector<EpochRecord> trace;
  Index steps_per_epoch = 0;
};

// Full-batch training, one optimizer step per epoch, no early stopping.
// Features are row-normalized first when cfg.row_normalize is set; the
// split stored in `ds` is used as is.
GcnRun train_gcn(const Dataset& ds, const TrainConfig& cfg);

// Minibatch training over shuffled training vertices; the last partial
// batch is kept. The aggregations are computed once before the clock starts.
SignRun train_sign(const Dataset& ds, const TrainConfig& cfg);
SignRun train_sign(const Dataset& ds, const SignPrecomputed& pre,
                   const TrainConfig& cfg);

// Seeds base_seed .. base_seed + n_runs - 1. Failed runs are recorded and
// excluded; throws kInsufficientRuns when fewer than 80% succeed.
RunSummary repeat_runs(ModelKind kind, const Dataset& ds, const TrainConfig& cfg,
                       Index n_runs, std::uint64_t base_seed);

// Mean and 1.96 * sample_std / sqrt(n); ci is 0 for n == 1.
struct MeanCi {
  double mean = 0.0;
  double ci95 = 0.0;
  bool defined = false;
};
MeanCi mean_ci95(std::span<const double> values);

// Recomputes the aggregate fields from per_seed.
void summarize(RunSummary& summary);

enum class ExportFormat { kJson, kCsv };
ExportFormat parse_export_format(std::string_view name);

std::string summary_to_json(const RunSummary& summary);
RunSummary summary_from_json(std::string_view json);
// One row per (seed, epoch): seed, epoch, the six metrics, wall_time_s.
std::string summary_to_csv(const RunSummary& summary);

void export_results(const RunSummary& summary, const std::string& path,
                    ExportFormat format);

}  // namespace sgnn
