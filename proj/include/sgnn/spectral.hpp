#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sgnn/common.hpp"
#include "sgnn/csr_matrix.hpp"
#include "sgnn/graph.hpp"

namespace sgnn {

// Ascending eigenvalues and the matching column-orthonormal eigenvectors of
// a symmetric matrix. Each eigenvector's first entry with magnitude above
// 1e-12 is positive.
struct SpectralBasis {
  Vector eigenvalues;
  Matrix eigenvectors;  // n x d
  std::optional<LaplacianKind> source_kind;

  Index n() const { return eigenvectors.rows(); }
  Index d() const { return eigenvectors.cols(); }
};

struct EigenOptions {
  // Problems up to this size, and every full decomposition, use the dense
  // tridiagonal QR solver. Larger partial problems use Lanczos.
  Index dense_threshold = 2048;
  // Residual bound is residual_tolerance * max(1, |lambda|).
  double residual_tolerance = 1e-8;
  // Seed of the Lanczos start vector.
  std::uint64_t seed = 0x5eed;
};

// First d eigenpairs (all of them when d is omitted). Throws kConvergence,
// with the worst residual in the message, if any pair misses the residual
// bound.
SpectralBasis eigendecompose(const SparseSymMatrix& m,
                             std::optional<Index> d = std::nullopt,
                             const EigenOptions& options = {});

// Basis of laplacian(g, kind).
SpectralBasis laplacian_basis(const SparseGraph& g, LaplacianKind kind,
                              std::optional<Index> d = std::nullopt,
                              const EigenOptions& options = {});

// Flips each column so its first entry above 1e-12 in magnitude is positive.
void normalize_signs(Matrix& vectors);

// U^T x
Matrix gft(const SpectralBasis& basis, const Matrix& x);
// U xhat
Matrix igft(const SpectralBasis& basis, const Matrix& xhat);
// Keeps the d smallest-eigenvalue pairs.
SpectralBasis lowpass_truncate(const SpectralBasis& basis, Index d);

// Unit eigenvector of the combinatorial Laplacian for the second-smallest
// eigenvalue. Throws kNotConnected on disconnected graphs.
Vector fiedler_vector(const SparseGraph& g, const EigenOptions& options = {});

struct Partition {
  std::vector<Index> labels;
};

// label 1 where the Fiedler vector is > 1e-12, label 0 otherwise.
Partition spectral_bipartition(const SparseGraph& g,
                               const EigenOptions& options = {});

// cut(a, b) / min(vol(a), vol(b)), with vol the summed weighted degree.
double conductance(const SparseGraph& g, const Partition& part, Index a,
                   Index b);

}  // namespace sgnn
