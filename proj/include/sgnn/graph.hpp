#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgnn/common.hpp"
#include "sgnn/csr_matrix.hpp"

namespace sgnn {

struct Edge {
  Index u;
  Index v;
  double weight = 1.0;
};

// Undirected weighted graph. The adjacency is stored in both directions, so
// the CSR buffers are a symmetric matrix with nonnegative entries.
class SparseGraph {
 public:
  SparseGraph() = default;

  Index n_vertices() const { return adjacency_.n(); }
  bool has_self_loops() const { return has_self_loops_; }
  const SparseSymMatrix& adjacency() const { return adjacency_; }
  // Number of undirected edges, self-loops included.
  Index n_edges() const { return n_edges_; }

  std::span<const Index> neighbors(Index v) const {
    return adjacency_.csr().row_indices(v);
  }
  std::span<const double> weights(Index v) const {
    return adjacency_.csr().row_values(v);
  }

  bool operator==(const SparseGraph& other) const = default;

 private:
  friend SparseGraph build_graph(std::span<const Edge>, Index, bool);

  SparseSymMatrix adjacency_;
  Index n_edges_ = 0;
  bool has_self_loops_ = false;
};

// Symmetrizes the edge list and sums duplicate (u, v) pairs, in either
// orientation. With add_self_loops every vertex gets an extra unit loop.
SparseGraph build_graph(std::span<const Edge> edges, Index n,
                        bool add_self_loops = false);

Vector degree_vector(const SparseGraph& g);

enum class LaplacianKind { kCombinatorial, kSymmetricNormalized, kRenormalized };

std::string_view to_string(LaplacianKind kind);
LaplacianKind parse_laplacian_kind(std::string_view name);

// kCombinatorial:       D - A
// kSymmetricNormalized: I - D^-1/2 A D^-1/2   (kIsolatedVertex on a zero degree)
// kRenormalized:        D~^-1/2 (A + I) D~^-1/2, D~ the row sums of A + I
SparseSymMatrix laplacian(const SparseGraph& g, LaplacianKind kind);

// I + D^-1/2 A D^-1/2, the first-order propagation matrix before the
// renormalization trick.
SparseSymMatrix first_order_propagation(const SparseGraph& g);

// Signed incidence matrix K (n_vertices x n_edges). Column e of edge (u, v),
// u < v, holds +sqrt(a_uv) at row u and -sqrt(a_uv) at row v. Self-loops
// have no column.
class IncidenceMatrix {
 public:
  struct Column {
    Index u;
    Index v;
    double magnitude;
  };

  explicit IncidenceMatrix(Index n_vertices) : n_vertices_(n_vertices) {}

  Index n_vertices() const { return n_vertices_; }
  Index n_edges() const { return static_cast<Index>(columns_.size()); }
  const std::vector<Column>& columns() const { return columns_; }

  CsrMatrix to_csr() const;
  // K K^T
  SparseSymMatrix gram() const;
  // K^T phi: the edge derivative sqrt(a_uv) (phi(u) - phi(v)).
  Vector gradient(const Vector& phi) const;

 private:
  friend IncidenceMatrix incidence_matrix(const SparseGraph& g);

  Index n_vertices_;
  std::vector<Column> columns_;
};

IncidenceMatrix incidence_matrix(const SparseGraph& g);

// phi^T L phi with L the combinatorial Laplacian.
double dirichlet_energy(const SparseGraph& g, const Vector& phi);

struct AggregatorOptions {
  // Use the 0/1 reachability pattern of A^k instead of walk counts.
  bool binarize = false;
  // Maximum stored entries of A^k; defaults to 10 * |E| * k.
  std::optional<Index> nnz_budget;
};

// A_0 = I; A_k = D~(k)^-1/2 (A^k + I) D~(k)^-1/2 with D~(k) the row sums of
// A^k + I. A^k is materialized by repeated sparse products.
SparseSymMatrix sign_aggregator(const SparseGraph& g, int k,
                                const AggregatorOptions& options = {});

// A_k * x without materializing A^k: k sparse products on the signal plus
// k sparse mat-vecs for the degrees. Equals sign_aggregator(g, k) * x for
// raw (walk-count) powers.
Matrix apply_sign_aggregator(const SparseGraph& g, int k, const Matrix& x);

struct Components {
  Index count = 0;
  std::vector<Index> labels;
};

// Breadth-first labeling in vertex order; labels are 0..count-1.
Components connected_components(const SparseGraph& g);

// Graph distance from `source` (-1 when unreachable).
std::vector<Index> hop_distances(const SparseGraph& g, Index source);

struct EdgeList {
  std::vector<Edge> edges;
  // One past the largest vertex index seen.
  Index n_vertices = 0;
};

// Whitespace separated `u v [weight]` lines, 0-based, '#' starts a comment.
EdgeList read_edge_list(std::istream& in);
EdgeList read_edge_list_file(const std::string& path);

}  // namespace sgnn
