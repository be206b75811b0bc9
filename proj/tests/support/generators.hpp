#pragma once

// Hand-rolled generators and independent oracles shared by the test suites.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "sgnn/common.hpp"
#include "sgnn/graph.hpp"
#include "sgnn/rng.hpp"

namespace sgnn::testing {

// Erdos-Renyi edges with probability p. With `connected`, a random spanning
// tree is added first. Weights are 1 or uniform in [0.5, 3).
inline std::vector<Edge> random_edges(Rng& rng, Index n, double p,
                                      bool connected, bool weighted) {
  std::vector<Edge> edges;
  auto weight = [&] { return weighted ? rng.uniform(0.5, 3.0) : 1.0; };
  std::vector<std::vector<char>> present(n, std::vector<char>(n, 0));
  if (connected) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    for (Index i = 1; i < n; ++i) {
      const Index u = order[i];
      const Index v = order[rng.below(i)];
      edges.push_back({u, v, weight()});
      present[u][v] = present[v][u] = 1;
    }
  }
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      if (!present[u][v] && rng.uniform() < p) {
        edges.push_back({u, v, weight()});
        present[u][v] = present[v][u] = 1;
      }
    }
  }
  return edges;
}

inline SparseGraph random_graph(Rng& rng, Index n, double p, bool connected,
                                bool weighted = false) {
  return build_graph(random_edges(rng, n, p, connected, weighted), n);
}

// Random connected graph with 2 <= n <= max_n and a random density.
inline SparseGraph random_connected_graph(Rng& rng, Index max_n,
                                          bool weighted = false) {
  const Index n = 2 + rng.below(max_n - 1);
  const double p = rng.uniform(0.05, 0.6);
  return random_graph(rng, n, p, true, weighted);
}

inline SparseGraph random_tree(Rng& rng, Index n) {
  return random_graph(rng, n, 0.0, true);
}

inline Matrix random_matrix(Rng& rng, Index rows, Index cols, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  }
  return m;
}

struct DenseEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns
};

// Cyclic Jacobi rotations on a dense symmetric matrix; an oracle that
// shares no code with the library eigensolvers.
inline DenseEigen jacobi_eigen(Matrix a, int max_sweeps = 100) {
  const Index n = a.rows();
  Matrix v = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30) break;
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](Index x, Index y) { return a(x, x) < a(y, y); });
  DenseEigen out{Vector(n), Matrix(n, n)};
  for (Index i = 0; i < n; ++i) {
    out.values[i] = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

}  // namespace sgnn::testing
