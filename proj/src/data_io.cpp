#include "sgnn/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include "sgnn/checkpoint.hpp"

namespace sgnn {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos
                                         ? std::string_view::npos
                                         : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

std::string where(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line);
}

}  // namespace

const std::vector<std::string>& cora_class_names() {
  static const std::vector<std::string> names = {
      "Case_Based",           "Genetic_Algorithms", "Neural_Networks",
      "Probabilistic_Methods", "Reinforcement_Learning", "Rule_Learning",
      "Theory"};
  return names;
}

Dataset load_cora(const std::string& content_path, const std::string& cites_path,
                  const CoraOptions& options) {
  std::ifstream content(content_path);
  if (!content) fail(ErrorCode::kIo, "cannot open '" + content_path + "'");

  Dataset ds;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::unordered_map<std::string, Index> id_to_vertex;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(content, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto fields = split_tabs(text);
    if (fields.size() < 3) {
      fail(ErrorCode::kParse, where(content_path, line_no) +
                                  ": expected id, features and label");
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      fail(ErrorCode::kParse, where(content_path, line_no) + ": " +
                                  std::to_string(fields.size()) +
                                  " columns, expected " + std::to_string(width));
    }
    std::string id(fields.front());
    if (!id_to_vertex.emplace(id, static_cast<Index>(rows.size())).second) {
      fail(ErrorCode::kParse,
           where(content_path, line_no) + ": duplicate id '" + id + "'");
    }
    std::vector<double> values(width - 2);
    for (std::size_t j = 1; j + 1 < width; ++j) {
      const std::string_view f = fields[j];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), values[j - 1]);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        fail(ErrorCode::kParse, where(content_path, line_no) +
                                    ": feature column " + std::to_string(j) +
                                    " is not a number");
      }
    }
    rows.push_back(std::move(values));
    raw_labels.emplace_back(fields.back());
    ds.vertex_ids.push_back(std::move(id));
  }
  if (rows.empty()) fail(ErrorCode::kParse, "'" + content_path + "' has no rows");

  ds.class_names = options.classes;
  if (ds.class_names.empty()) {
    const std::set<std::string> seen(raw_labels.begin(), raw_labels.end());
    ds.class_names.assign(seen.begin(), seen.end());
  }
  std::map<std::string, Index> class_id;
  for (std::size_t c = 0; c < ds.class_names.size(); ++c) {
    class_id[ds.class_names[c]] = static_cast<Index>(c);
  }
  const Index n = static_cast<Index>(rows.size());
  ds.features.resize(n, static_cast<Index>(width - 2));
  ds.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) ds.features(i, j) = rows[i][j];
    const auto it = class_id.find(raw_labels[i]);
    if (it == class_id.end()) {
      fail(ErrorCode::kParse, "vertex '" + ds.vertex_ids[i] +
                                  "' has unknown class label '" +
                                  raw_labels[i] + "'");
    }
    ds.labels[i] = it->second;
  }

  std::ifstream cites(cites_path);
  if (!cites) fail(ErrorCode::kIo, "cannot open '" + cites_path + "'");
  std::set<std::pair<Index, Index>> pairs;
  line_no = 0;
  while (std::getline(cites, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto fields = split_tabs(text);
    if (fields.size() != 2) {
      fail(ErrorCode::kParse,
           where(cites_path, line_no) + ": expected two tab-separated ids");
    }
    const auto a = id_to_vertex.find(std::string(trim(fields[0])));
    const auto b = id_to_vertex.find(std::string(trim(fields[1])));
    if (a == id_to_vertex.end() || b == id_to_vertex.end()) {
      ++ds.skipped_edges;
      continue;
    }
    if (a->second == b->second) {
      ++ds.self_citations;
      continue;
    }
    pairs.emplace(std::min(a->second, b->second), std::max(a->second, b->second));
  }
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [u, v] : pairs) edges.push_back({u, v, 1.0});
  ds.graph = build_graph(edges, n);
  return ds;
}

Dataset planetoid_split(Dataset ds) {
  constexpr Index kPerClass = 20, kVal = 500, kTest = 1000;
  const Index n = ds.n_vertices();
  const Index classes = ds.n_classes();
  if (n < kPerClass * classes + kVal + kTest) {
    fail(ErrorCode::kInvalidArgument,
         "planetoid split needs at least " +
             std::to_string(kPerClass * classes + kVal + kTest) +
             " vertices, dataset has " + std::to_string(n));
  }
  std::vector<Index> taken(static_cast<std::size_t>(classes), 0);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  Split s;
  for (Index v = 0; v < n; ++v) {
    const Index c = ds.labels[v];
    if (taken[c] < kPerClass) {
      ++taken[c];
      s.train.push_back(v);
      used[v] = 1;
    }
  }
  for (Index c = 0; c < classes; ++c) {
    if (taken[c] < kPerClass) {
      fail(ErrorCode::kInvalidArgument,
           "class '" + ds.class_names[c] + "' has only " +
               std::to_string(taken[c]) + " vertices; 20 are needed");
    }
  }
  for (Index v = 0; v < n && static_cast<Index>(s.val.size()) < kVal; ++v) {
    if (!used[v]) {
      s.val.push_back(v);
      used[v] = 1;
    }
  }
  for (Index v = n; v-- > 0 && static_cast<Index>(s.test.size()) < kTest;) {
    if (!used[v]) s.test.push_back(v);
  }
  if (static_cast<Index>(s.test.size()) < kTest) {
    fail(ErrorCode::kInvalidArgument, "not enough vertices left for the test set");
  }
  std::reverse(s.test.begin(), s.test.end());
  ds.split = std::move(s);
  return ds;
}

Dataset range_split(Dataset ds) {
  require(ds.n_vertices() >= 1500, ErrorCode::kInvalidArgument,
          "range split needs at least 1500 vertices");
  Split s;
  for (Index v = 0; v < 140; ++v) s.train.push_back(v);
  for (Index v = 200; v < 500; ++v) s.val.push_back(v);
  for (Index v = 500; v < 1500; ++v) s.test.push_back(v);
  ds.split = std::move(s);
  return ds;
}

Dataset apply_split(Dataset ds, SplitMode mode) {
  return mode == SplitMode::kPlanetoid ? planetoid_split(std::move(ds))
                                       : range_split(std::move(ds));
}

GraphSignal row_normalize_features(const GraphSignal& x) {
  if ((x.array() < 0.0).any()) {
    fail(ErrorCode::kInvalidArgument,
         "row normalization expects nonnegative features");
  }
  GraphSignal out = x;
  for (Index i = 0; i < out.rows(); ++i) {
    const double s = out.row(i).sum();
    if (s > 0.0) out.row(i) /= s;
  }
  return out;
}

SynthKind parse_synth_kind(std::string_view name) {
  if (name == "path") return SynthKind::kPath;
  if (name == "ring") return SynthKind::kRing;
  if (name == "grid2d") return SynthKind::kGrid2d;
  if (name == "two_cliques") return SynthKind::kTwoCliques;
  if (name == "star") return SynthKind::kStar;
  fail(ErrorCode::kInvalidArgument, "unknown graph kind '" + std::string(name) + "'");
}

SparseGraph synth_graph(SynthKind kind, Index size, Index size2) {
  auto too_small = [](const char* what, Index min) {
    fail(ErrorCode::kInvalidArgument,
         std::string(what) + " needs size >= " + std::to_string(min));
  };
  std::vector<Edge> edges;
  Index n = 0;
  switch (kind) {
    case SynthKind::kPath:
      if (size < 2) too_small("path", 2);
      n = size;
      for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
      break;
    case SynthKind::kRing:
      if (size < 3) too_small("ring", 3);
      n = size;
      for (Index i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
      break;
    case SynthKind::kGrid2d:
      if (size < 1 || size2 < 1 || size * size2 < 2) too_small("grid2d (rows * cols)", 2);
      n = size * size2;
      for (Index i = 0; i < size; ++i) {
        for (Index j = 0; j < size2; ++j) {
          const Index v = i * size2 + j;
          if (j + 1 < size2) edges.push_back({v, v + 1});
          if (i + 1 < size) edges.push_back({v, v + size2});
        }
      }
      break;
    case SynthKind::kTwoCliques:
      if (size < 2) too_small("two_cliques", 2);
      n = 2 * size;
      for (Index base : {Index{0}, size}) {
        for (Index i = 0; i < size; ++i) {
          for (Index j = i + 1; j < size; ++j) edges.push_back({base + i, base + j});
        }
      }
      edges.push_back({size - 1, size});
      break;
    case SynthKind::kStar:
      if (size < 2) too_small("star", 2);
      n = size;
      for (Index i = 1; i < n; ++i) edges.push_back({0, i});
      break;
  }
  return build_graph(edges, n);
}

void save_dataset_cache(const std::string& path, const Dataset& ds) {
  Container c;
  c.meta["kind"] = "dataset";
  c.meta["class_names"] = ds.class_names;
  c.meta["vertex_ids"] = ds.vertex_ids;
  c.meta["skipped_edges"] = ds.skipped_edges;
  c.meta["self_citations"] = ds.self_citations;
  c.meta["n_vertices"] = ds.n_vertices();
  c.meta["split"] = {{"train", ds.split.train},
                     {"val", ds.split.val},
                     {"test", ds.split.test}};
  c.meta["labels"] = ds.labels;
  c.matrices.push_back({"features", ds.features});
  // Upper-triangle edge list as an E x 3 matrix (u, v, weight).
  std::vector<Edge> edges;
  for (Index u = 0; u < ds.graph.n_vertices(); ++u) {
    const auto nbrs = ds.graph.neighbors(u);
    const auto w = ds.graph.weights(u);
    for (std::size_t p = 0; p < nbrs.size(); ++p) {
      if (nbrs[p] >= u) edges.push_back({u, nbrs[p], w[p]});
    }
  }
  Matrix e(static_cast<Index>(edges.size()), 3);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    e(i, 0) = static_cast<double>(edges[i].u);
    e(i, 1) = static_cast<double>(edges[i].v);
    e(i, 2) = edges[i].weight;
  }
  c.matrices.push_back({"edges", e});
  write_container(path, c);
}

Dataset load_dataset_cache(const std::string& path) {
  const Container c = read_container(path);
  if (c.meta.value("kind", std::string()) != "dataset") {
    fail(ErrorCode::kParse, "'" + path + "' is not a dataset cache");
  }
  Dataset ds;
  try {
    ds.class_names = c.meta.at("class_names").get<std::vector<std::string>>();
    ds.vertex_ids = c.meta.at("vertex_ids").get<std::vector<std::string>>();
    ds.skipped_edges = c.meta.at("skipped_edges").get<Index>();
    ds.self_citations = c.meta.at("self_citations").get<Index>();
    ds.labels = c.meta.at("labels").get<std::vector<Index>>();
    const auto& split = c.meta.at("split");
    ds.split.train = split.at("train").get<std::vector<Index>>();
    ds.split.val = split.at("val").get<std::vector<Index>>();
    ds.split.test = split.at("test").get<std::vector<Index>>();
    const Index n = c.meta.at("n_vertices").get<Index>();
    ds.features = c.get("features");
    const Matrix& e = c.get("edges");
    std::vector<Edge> edges;
    for (Index i = 0; i < e.rows(); ++i) {
      edges.push_back({static_cast<Index>(e(i, 0)), static_cast<Index>(e(i, 1)),
                       e(i, 2)});
    }
    ds.graph = build_graph(edges, n);
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::kParse, "bad dataset cache '" + path + "': " + ex.what());
  }
  return ds;
}

}  // namespace sgnn
