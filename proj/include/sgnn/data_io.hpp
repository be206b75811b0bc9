#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sgnn/common.hpp"
#include "sgnn/config.hpp"
#include "sgnn/graph.hpp"

namespace sgnn {

struct Split {
  std::vector<Index> train;
  std::vector<Index> val;
  std::vector<Index> test;

  bool operator==(const Split&) const = default;
};

struct Dataset {
  SparseGraph graph;
  GraphSignal features;  // N x F_0
  std::vector<Index> labels;
  Split split;
  std::vector<std::string> class_names;
  std::vector<std::string> vertex_ids;
  // Citation rows that named an id missing from the content file.
  Index skipped_edges = 0;
  // Citation rows with identical endpoints.
  Index self_citations = 0;

  Index n_vertices() const { return features.rows(); }
  Index n_features() const { return features.cols(); }
  Index n_classes() const { return static_cast<Index>(class_names.size()); }

  bool operator==(const Dataset&) const = default;
};

// The seven Cora subject labels in sorted order.
const std::vector<std::string>& cora_class_names();

struct CoraOptions {
  // Allowed labels; their order fixes the class ids. Empty means the sorted
  // set of labels found in the content file.
  std::vector<std::string> classes = cora_class_names();
};

// `content`: id, features, label per tab-separated row. `cites`: cited and
// citing id per row. Vertex i is the i-th content row. Citations become
// unit-weight undirected edges; repeats collapse, self-citations and rows
// with unknown ids are dropped and counted. The split is left empty.
Dataset load_cora(const std::string& content_path, const std::string& cites_path,
                  const CoraOptions& options = {});

// Train: the first 20 vertices of every class in vertex order. Validation:
// the first 500 remaining vertices. Test: the last 1000 vertices outside
// train and validation.
Dataset planetoid_split(Dataset ds);

// Fixed index ranges: train [0, 140), validation [200, 500), test
// [500, 1500).
Dataset range_split(Dataset ds);

Dataset apply_split(Dataset ds, SplitMode mode);

// Each nonzero row divided by its L1 norm. Throws kInvalidArgument on a
// negative entry.
GraphSignal row_normalize_features(const GraphSignal& x);

enum class SynthKind { kPath, kRing, kGrid2d, kTwoCliques, kStar };

SynthKind parse_synth_kind(std::string_view name);

// path(n), ring(n), grid2d(rows, cols), two_cliques(k), star(n). Vertex
// numbering: grid cell (i, j) is i * cols + j; two_cliques puts the cliques
// on [0, k) and [k, 2k) bridged by (k - 1, k); star's center is 0.
SparseGraph synth_graph(SynthKind kind, Index size, Index size2 = 0);

// Dataset cache in the checkpoint container format.
void save_dataset_cache(const std::string& path, const Dataset& ds);
Dataset load_dataset_cache(const std::string& path);

}  // namespace sgnn
