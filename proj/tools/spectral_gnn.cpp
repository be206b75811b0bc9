// spectral-gnn: train GCN / SIGN on Cora, or print a Laplacian spectrum.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgnn/config.hpp"
#include "sgnn/data_io.hpp"
#include "sgnn/graph.hpp"
#include "sgnn/harness.hpp"
#include "sgnn/spectral.hpp"

namespace {

struct TrainArgs {
  std::string model = "gcn";
  std::string dataset = "cora";
  std::string content;
  std::string cites;
  std::string config;
  std::string cache;
  long long runs = 1;
  unsigned long long seed = 0;
  std::string out;
  std::string format = "json";
};

struct SpectrumArgs {
  std::string edges;
  std::string kind = "comb";
  std::string out;
};

void print_error(const std::string& code, const std::string& message) {
  nlohmann::json err;
  err["error"] = {{"code", code}, {"message", message}};
  std::cerr << err.dump() << "\n";
}

int run_train(const TrainArgs& args) {
  using namespace sgnn;
  const ModelKind kind = parse_model_kind(args.model);
  const ExportFormat format = parse_export_format(args.format);
  if (args.dataset != "cora") {
    fail(ErrorCode::kInvalidArgument,
         "unknown dataset '" + args.dataset + "' (only cora is supported)");
  }
  TrainConfig cfg = defaults_for(kind);
  if (!args.config.empty()) cfg = load_config_file(args.config, cfg);

  Dataset ds;
  if (!args.cache.empty() && std::ifstream(args.cache).good()) {
    ds = load_dataset_cache(args.cache);
  } else {
    if (args.content.empty() || args.cites.empty()) {
      fail(ErrorCode::kInvalidArgument, "--content and --cites are required");
    }
    ds = load_cora(args.content, args.cites);
    if (!args.cache.empty()) save_dataset_cache(args.cache, ds);
  }
  if (ds.skipped_edges > 0) {
    std::cerr << "warning: skipped " << ds.skipped_edges
              << " citation rows with unknown ids\n";
  }
  ds = apply_split(std::move(ds), cfg.split);

  const RunSummary summary =
      repeat_runs(kind, ds, cfg, args.runs, static_cast<std::uint64_t>(args.seed));
  for (const auto& f : summary.failures) {
    std::cerr << "warning: seed " << f.seed << " failed (" << f.code
              << "): " << f.message << "\n";
  }
  if (args.out.empty()) {
    std::cout << (format == ExportFormat::kJson ? summary_to_json(summary) + "\n"
                                                : summary_to_csv(summary));
  } else {
    export_results(summary, args.out, format);
  }
  std::fprintf(stderr, "%s: mean test accuracy %.4f (ci95 %.4f) over %zu runs\n",
               args.model.c_str(), summary.mean_acc, summary.ci95_acc,
               summary.per_seed.size());
  return 0;
}

int run_spectrum(const SpectrumArgs& args) {
  using namespace sgnn;
  const LaplacianKind kind = parse_laplacian_kind(args.kind);
  const EdgeList list = read_edge_list_file(args.edges);
  if (list.n_vertices == 0) fail(ErrorCode::kParse, "edge list is empty");
  const SparseGraph g = build_graph(list.edges, list.n_vertices);
  const SpectralBasis basis = laplacian_basis(g, kind);
  std::string text;
  char buf[64];
  for (Index i = 0; i < basis.eigenvalues.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g\n", basis.eigenvalues[i]);
    text += buf;
  }
  if (args.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(args.out, std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot open '" + args.out + "' for writing");
    out << text;
    if (!out.flush()) fail(ErrorCode::kIo, "write to '" + args.out + "' failed");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral graph learning toolkit"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train GCN or SIGN over repeated seeds");
  t->add_option("--model", train.model, "gcn or sign")->capture_default_str();
  t->add_option("--dataset", train.dataset, "dataset name")->capture_default_str();
  t->add_option("--content", train.content, "Cora .content file");
  t->add_option("--cites", train.cites, "Cora .cites file");
  t->add_option("--config", train.config, "JSON file overriding the defaults");
  t->add_option("--cache", train.cache,
                "dataset cache; read if present, written otherwise");
  t->add_option("--runs", train.runs, "number of seeds")->capture_default_str();
  t->add_option("--seed", train.seed, "first seed")->capture_default_str();
  t->add_option("--out", train.out, "output path (stdout if omitted)");
  t->add_option("--format", train.format, "json or csv")->capture_default_str();

  SpectrumArgs spectrum;
  auto* s = app.add_subcommand("spectrum", "eigenvalues of a graph Laplacian");
  s->add_option("--edges", spectrum.edges, "edge list file")->required();
  s->add_option("--kind", spectrum.kind, "comb, sym or renorm")->capture_default_str();
  s->add_option("--out", spectrum.out, "output path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (t->parsed()) return run_train(train);
    return run_spectrum(spectrum);
  } catch (const sgnn::Error& e) {
    print_error(std::string(sgnn::to_string(e.code())), e.what());
  } catch (const std::exception& e) {
    print_error("internal", e.what());
  }
  return 1;
}
