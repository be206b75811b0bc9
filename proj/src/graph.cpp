#include "sgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>

namespace sgnn {

SparseGraph build_graph(std::span<const Edge> edges, Index n,
                        bool add_self_loops) {
  require(n >= 1, ErrorCode::kInvalidArgument,
          "a graph needs at least one vertex");
  // Per unordered pair, the summed weight given in each orientation. A list
  // that already carries both orientations of an edge is symmetric input,
  // so the two sides are not added together.
  std::map<std::pair<Index, Index>, std::pair<double, double>> pairs;
  for (const Edge& e : edges) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n) {
      fail(ErrorCode::kIndexOutOfRange,
           "edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
               ") references a vertex outside [0, " + std::to_string(n) + ")");
    }
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      fail(ErrorCode::kInvalidArgument,
           "edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
               ") has a negative or non-finite weight");
    }
    auto& w = pairs[{std::min(e.u, e.v), std::max(e.u, e.v)}];
    (e.u <= e.v ? w.first : w.second) += e.weight;
  }

  std::vector<Triplet> triplets;
  triplets.reserve(2 * pairs.size() + static_cast<std::size_t>(n));
  SparseGraph g;
  for (const auto& [key, w] : pairs) {
    const double weight = std::max(w.first, w.second);
    if (weight == 0.0) continue;
    ++g.n_edges_;
    triplets.push_back({key.first, key.second, weight});
    if (key.first != key.second) {
      triplets.push_back({key.second, key.first, weight});
    } else {
      g.has_self_loops_ = true;
    }
  }
  if (add_self_loops) {
    for (Index i = 0; i < n; ++i) {
      if (pairs.find({i, i}) == pairs.end()) ++g.n_edges_;
      triplets.push_back({i, i, 1.0});
    }
    g.has_self_loops_ = true;
  }
  g.adjacency_ = SparseSymMatrix(CsrMatrix::from_triplets(n, n, triplets));
  return g;
}

Vector degree_vector(const SparseGraph& g) {
  return g.adjacency().csr().row_sums();
}

std::string_view to_string(LaplacianKind kind) {
  switch (kind) {
    case LaplacianKind::kCombinatorial:
      return "comb";
    case LaplacianKind::kSymmetricNormalized:
      return "sym";
    case LaplacianKind::kRenormalized:
      return "renorm";
  }
  return "unknown";
}

LaplacianKind parse_laplacian_kind(std::string_view name) {
  if (name == "comb") return LaplacianKind::kCombinatorial;
  if (name == "sym") return LaplacianKind::kSymmetricNormalized;
  if (name == "renorm") return LaplacianKind::kRenormalized;
  fail(ErrorCode::kInvalidArgument,
       "unknown Laplacian kind '" + std::string(name) +
           "' (expected comb, sym or renorm)");
}

namespace {

Vector inverse_sqrt_degrees(const Vector& degrees) {
  Vector out(degrees.size());
  for (Index i = 0; i < degrees.size(); ++i) {
    if (!(degrees[i] > 0.0)) {
      fail(ErrorCode::kIsolatedVertex,
           "vertex " + std::to_string(i) +
               " has zero degree; normalized operators are undefined");
    }
    out[i] = 1.0 / std::sqrt(degrees[i]);
  }
  return out;
}

// D^-1/2 A D^-1/2
CsrMatrix normalized_adjacency(const SparseGraph& g) {
  const Vector s = inverse_sqrt_degrees(degree_vector(g));
  return g.adjacency().csr().scaled(s, s);
}

CsrMatrix renormalized(const CsrMatrix& a) {
  const CsrMatrix with_loops = add(a, CsrMatrix::identity(a.rows()));
  const Vector s = inverse_sqrt_degrees(with_loops.row_sums());
  return with_loops.scaled(s, s);
}

}  // namespace

SparseSymMatrix laplacian(const SparseGraph& g, LaplacianKind kind) {
  const Index n = g.n_vertices();
  switch (kind) {
    case LaplacianKind::kCombinatorial:
      return SparseSymMatrix(add(CsrMatrix::diagonal(degree_vector(g)),
                                 g.adjacency().csr(), 1.0, -1.0));
    case LaplacianKind::kSymmetricNormalized:
      return SparseSymMatrix(
          add(CsrMatrix::identity(n), normalized_adjacency(g), 1.0, -1.0));
    case LaplacianKind::kRenormalized:
      return SparseSymMatrix(renormalized(g.adjacency().csr()));
  }
  fail(ErrorCode::kInvalidArgument, "unknown Laplacian kind");
}

SparseSymMatrix first_order_propagation(const SparseGraph& g) {
  return SparseSymMatrix(
      add(CsrMatrix::identity(g.n_vertices()), normalized_adjacency(g)));
}

CsrMatrix IncidenceMatrix::to_csr() const {
  std::vector<Triplet> triplets;
  triplets.reserve(2 * columns_.size());
  for (std::size_t e = 0; e < columns_.size(); ++e) {
    const auto& c = columns_[e];
    triplets.push_back({c.u, static_cast<Index>(e), c.magnitude});
    triplets.push_back({c.v, static_cast<Index>(e), -c.magnitude});
  }
  return CsrMatrix::from_triplets(n_vertices_, n_edges(), triplets);
}

SparseSymMatrix IncidenceMatrix::gram() const {
  const CsrMatrix k = to_csr();
  return SparseSymMatrix(k.multiply(k.transpose()));
}

Vector IncidenceMatrix::gradient(const Vector& phi) const {
  require(phi.size() == n_vertices_, ErrorCode::kDimensionMismatch,
          "edge gradient: signal length differs from vertex count");
  Vector out(n_edges());
  for (std::size_t e = 0; e < columns_.size(); ++e) {
    const auto& c = columns_[e];
    out[static_cast<Index>(e)] = c.magnitude * (phi[c.u] - phi[c.v]);
  }
  return out;
}

IncidenceMatrix incidence_matrix(const SparseGraph& g) {
  IncidenceMatrix k(g.n_vertices());
  for (Index u = 0; u < g.n_vertices(); ++u) {
    const auto nbrs = g.neighbors(u);
    const auto w = g.weights(u);
    for (std::size_t p = 0; p < nbrs.size(); ++p) {
      if (nbrs[p] > u) k.columns_.push_back({u, nbrs[p], std::sqrt(w[p])});
    }
  }
  return k;
}

double dirichlet_energy(const SparseGraph& g, const Vector& phi) {
  require(phi.size() == g.n_vertices(), ErrorCode::kDimensionMismatch,
          "Dirichlet energy: signal length differs from vertex count");
  const SparseSymMatrix l = laplacian(g, LaplacianKind::kCombinatorial);
  return phi.dot(l.multiply(phi));
}

SparseSymMatrix sign_aggregator(const SparseGraph& g, int k,
                                const AggregatorOptions& options) {
  require(k >= 0, ErrorCode::kInvalidArgument,
          "aggregator order must be nonnegative");
  const Index n = g.n_vertices();
  if (k == 0) return SparseSymMatrix::identity(n);

  const Index budget = options.nnz_budget.value_or(
      10 * std::max<Index>(g.n_edges(), 1) * static_cast<Index>(k));
  const CsrMatrix& a = g.adjacency().csr();
  if (a.nnz() > budget) {
    fail(ErrorCode::kDensityExceeded,
         "adjacency already exceeds the nnz budget of " +
             std::to_string(budget));
  }
  CsrMatrix power = a;
  for (int i = 1; i < k; ++i) power = power.multiply(a, budget);
  if (options.binarize) power = power.pattern();
  // A^k is symmetric in exact arithmetic; averaging with the transpose
  // removes rounding asymmetry for non-integer weights.
  power = add(power, power.transpose(), 0.5, 0.5);
  return SparseSymMatrix(renormalized(power));
}

Matrix apply_sign_aggregator(const SparseGraph& g, int k, const Matrix& x) {
  require(k >= 0, ErrorCode::kInvalidArgument,
          "aggregator order must be nonnegative");
  require(x.rows() == g.n_vertices(), ErrorCode::kDimensionMismatch,
          "aggregator input must have one row per vertex");
  if (k == 0) return x;
  const CsrMatrix& a = g.adjacency().csr();

  // Row sums of A^k + I.
  Vector walks = Vector::Ones(g.n_vertices());
  for (int i = 0; i < k; ++i) walks = a.multiply(walks);
  const Vector s = (walks.array() + 1.0).rsqrt().matrix();

  const Matrix scaled = s.asDiagonal() * x;
  Matrix z = scaled;
  for (int i = 0; i < k; ++i) z = a.multiply(z);
  return s.asDiagonal() * (z + scaled);
}

Components connected_components(const SparseGraph& g) {
  Components out;
  out.labels.assign(static_cast<std::size_t>(g.n_vertices()), -1);
  std::deque<Index> queue;
  for (Index s = 0; s < g.n_vertices(); ++s) {
    if (out.labels[s] >= 0) continue;
    out.labels[s] = out.count;
    queue.push_back(s);
    while (!queue.empty()) {
      const Index u = queue.front();
      queue.pop_front();
      for (Index v : g.neighbors(u)) {
        if (out.labels[v] < 0) {
          out.labels[v] = out.count;
          queue.push_back(v);
        }
      }
    }
    ++out.count;
  }
  return out;
}

std::vector<Index> hop_distances(const SparseGraph& g, Index source) {
  require(source >= 0 && source < g.n_vertices(), ErrorCode::kIndexOutOfRange,
          "source vertex out of range");
  std::vector<Index> dist(static_cast<std::size_t>(g.n_vertices()), -1);
  std::deque<Index> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const Index u = queue.front();
    queue.pop_front();
    for (Index v : g.neighbors(u)) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

EdgeList read_edge_list(std::istream& in) {
  EdgeList out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string t; fields >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;
    if (tokens.size() > 3 || tokens.size() < 2) {
      fail(ErrorCode::kParse, "edge list line " + std::to_string(line_no) +
                                  ": expected 'u v [weight]'");
    }
    Edge e;
    try {
      std::size_t used = 0;
      e.u = std::stoll(tokens[0], &used);
      if (used != tokens[0].size()) throw std::invalid_argument("u");
      e.v = std::stoll(tokens[1], &used);
      if (used != tokens[1].size()) throw std::invalid_argument("v");
      if (tokens.size() == 3) {
        e.weight = std::stod(tokens[2], &used);
        if (used != tokens[2].size()) throw std::invalid_argument("w");
      }
    } catch (const std::exception&) {
      fail(ErrorCode::kParse, "edge list line " + std::to_string(line_no) +
                                  ": malformed number");
    }
    if (e.u < 0 || e.v < 0) {
      fail(ErrorCode::kParse, "edge list line " + std::to_string(line_no) +
                                  ": negative vertex index");
    }
    out.n_vertices = std::max({out.n_vertices, e.u + 1, e.v + 1});
    out.edges.push_back(e);
  }
  return out;
}

EdgeList read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open edge list '" + path + "'");
  return read_edge_list(in);
}

}  // namespace sgnn
