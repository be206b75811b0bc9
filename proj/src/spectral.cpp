#include "sgnn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sgnn/rng.hpp"

namespace sgnn {

namespace {

constexpr double kSignThreshold = 1e-12;

double inf_norm(const CsrMatrix& m) {
  double best = 0.0;
  for (Index i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double v : m.row_values(i)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

// Largest ||M u - lambda u|| / max(1, |lambda|) over the basis columns.
double worst_residual(const SparseSymMatrix& m, const SpectralBasis& basis) {
  double worst = 0.0;
  const Matrix mu = m.multiply(basis.eigenvectors);
  for (Index j = 0; j < basis.d(); ++j) {
    const double lambda = basis.eigenvalues[j];
    const double r = (mu.col(j) - lambda * basis.eigenvectors.col(j)).norm();
    worst = std::max(worst, r / std::max(1.0, std::abs(lambda)));
  }
  return worst;
}

SpectralBasis dense_decomposition(const SparseSymMatrix& m, Index d) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.to_dense());
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::kConvergence,
         "dense symmetric eigensolver did not converge (n = " +
             std::to_string(m.n()) + ")");
  }
  SpectralBasis out;
  out.eigenvalues = solver.eigenvalues().head(d);
  out.eigenvectors = solver.eigenvectors().leftCols(d);
  return out;
}

// Lanczos with full reorthogonalization. Grows the Krylov space until the d
// smallest Ritz pairs meet the residual bound or the space is all of R^n.
class Lanczos {
 public:
  Lanczos(const SparseSymMatrix& m, const EigenOptions& options)
      : m_(m),
        options_(options),
        rng_(options.seed),
        scale_(std::max(inf_norm(m.csr()), 1.0)),
        q_(m.n(), 0) {}

  SpectralBasis solve(Index d) {
    const Index n = m_.n();
    Index steps = std::min(n, std::max<Index>(2 * d + 40, 80));
    double residual = 0.0;
    for (;;) {
      extend(steps);
      SpectralBasis basis = ritz_pairs(d);
      residual = worst_residual(m_, basis);
      if (residual <= options_.residual_tolerance) return basis;
      if (size() >= n) break;
      steps = std::min(n, 2 * steps);
    }
    std::ostringstream msg;
    msg << "Lanczos did not reach the residual bound after " << size()
        << " steps (worst scaled residual " << residual << ")";
    fail(ErrorCode::kConvergence, msg.str());
  }

 private:
  Index size() const { return static_cast<Index>(alpha_.size()); }

  // Unit vector orthogonal to the current basis, from fresh random draws.
  Vector fresh_direction() {
    for (int attempt = 0; attempt < 8; ++attempt) {
      Vector v(m_.n());
      for (Index i = 0; i < v.size(); ++i) v[i] = rng_.uniform(-1.0, 1.0);
      orthogonalize(v, size());
      const double norm = v.norm();
      if (norm > 1e-8) return v / norm;
    }
    fail(ErrorCode::kConvergence, "Lanczos could not find a new direction");
  }

  void orthogonalize(Vector& w, Index upto) const {
    if (upto == 0) return;
    for (int pass = 0; pass < 2; ++pass) {
      const auto basis = q_.leftCols(upto);
      w.noalias() -= basis * (basis.transpose() * w);
    }
  }

  void extend(Index steps) {
    const Index n = m_.n();
    q_.conservativeResize(n, steps);
    if (alpha_.empty()) q_.col(0) = fresh_direction();
    for (Index j = size(); j < steps; ++j) {
      Vector w = m_.multiply(Vector(q_.col(j)));
      const double a = q_.col(j).dot(w);
      alpha_.push_back(a);
      w -= a * q_.col(j);
      if (j > 0) w -= beta_[j - 1] * q_.col(j - 1);
      orthogonalize(w, j + 1);
      if (j + 1 == n) break;
      double b = w.norm();
      if (b <= 1e-10 * scale_) {
        // Invariant subspace found; continue in a fresh direction with a
        // zero coupling so T becomes block diagonal.
        b = 0.0;
        q_.col(j + 1) = fresh_direction();
      } else {
        q_.col(j + 1) = w / b;
      }
      beta_.push_back(b);
    }
  }

  SpectralBasis ritz_pairs(Index d) const {
    const Index m = size();
    Vector diag = Eigen::Map<const Vector>(alpha_.data(), m);
    Vector sub = Vector::Zero(std::max<Index>(m - 1, 0));
    for (Index i = 0; i + 1 < m; ++i) sub[i] = beta_[i];
    Eigen::SelfAdjointEigenSolver<Matrix> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (tri.info() != Eigen::Success) {
      fail(ErrorCode::kConvergence, "tridiagonal eigensolver failed");
    }
    SpectralBasis out;
    out.eigenvalues = tri.eigenvalues().head(d);
    out.eigenvectors = q_.leftCols(m) * tri.eigenvectors().leftCols(d);
    // Ritz vectors lose a little orthonormality; restore it column by
    // column (the pairs are already accurate, this only cleans rounding).
    for (Index j = 0; j < d; ++j) {
      for (Index k = 0; k < j; ++k) {
        out.eigenvectors.col(j) -=
            out.eigenvectors.col(k).dot(out.eigenvectors.col(j)) *
            out.eigenvectors.col(k);
      }
      out.eigenvectors.col(j).normalize();
    }
    return out;
  }

  const SparseSymMatrix& m_;
  EigenOptions options_;
  Rng rng_;
  double scale_;
  Matrix q_;
  std::vector<double> alpha_;
  std::vector<double> beta_;
};

}  // namespace

void normalize_signs(Matrix& vectors) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    for (Index i = 0; i < vectors.rows(); ++i) {
      const double v = vectors(i, j);
      if (std::abs(v) > kSignThreshold) {
        if (v < 0.0) vectors.col(j) *= -1.0;
        break;
      }
    }
  }
}

SpectralBasis eigendecompose(const SparseSymMatrix& m, std::optional<Index> d,
                             const EigenOptions& options) {
  const Index n = m.n();
  require(n >= 1, ErrorCode::kInvalidArgument,
          "cannot decompose an empty matrix");
  const Index want = d.value_or(n);
  if (want < 1 || want > n) {
    fail(ErrorCode::kInvalidArgument,
         "requested " + std::to_string(want) + " eigenpairs of a " +
             std::to_string(n) + "x" + std::to_string(n) + " matrix");
  }
  SpectralBasis basis;
  if (!d || n <= options.dense_threshold || want == n) {
    basis = dense_decomposition(m, want);
    const double residual = worst_residual(m, basis);
    if (residual > options.residual_tolerance) {
      std::ostringstream msg;
      msg << "dense eigensolver residual " << residual
          << " exceeds the bound " << options.residual_tolerance;
      fail(ErrorCode::kConvergence, msg.str());
    }
  } else {
    basis = Lanczos(m, options).solve(want);
  }
  normalize_signs(basis.eigenvectors);
  return basis;
}

SpectralBasis laplacian_basis(const SparseGraph& g, LaplacianKind kind,
                              std::optional<Index> d,
                              const EigenOptions& options) {
  SpectralBasis basis = eigendecompose(laplacian(g, kind), d, options);
  basis.source_kind = kind;
  return basis;
}

Matrix gft(const SpectralBasis& basis, const Matrix& x) {
  if (x.rows() != basis.n()) {
    fail(ErrorCode::kDimensionMismatch,
         "graph Fourier transform: signal has " + std::to_string(x.rows()) +
             " rows, basis has " + std::to_string(basis.n()) + " vertices");
  }
  return basis.eigenvectors.transpose() * x;
}

Matrix igft(const SpectralBasis& basis, const Matrix& xhat) {
  if (xhat.rows() != basis.d()) {
    fail(ErrorCode::kDimensionMismatch,
         "inverse graph Fourier transform: coefficients have " +
             std::to_string(xhat.rows()) + " rows, basis has " +
             std::to_string(basis.d()) + " vectors");
  }
  return basis.eigenvectors * xhat;
}

SpectralBasis lowpass_truncate(const SpectralBasis& basis, Index d) {
  if (d < 1 || d > basis.d()) {
    fail(ErrorCode::kInvalidArgument,
         "cannot keep " + std::to_string(d) + " of " +
             std::to_string(basis.d()) + " eigenpairs");
  }
  SpectralBasis out;
  out.eigenvalues = basis.eigenvalues.head(d);
  out.eigenvectors = basis.eigenvectors.leftCols(d);
  out.source_kind = basis.source_kind;
  return out;
}

Vector fiedler_vector(const SparseGraph& g, const EigenOptions& options) {
  require(g.n_vertices() >= 2, ErrorCode::kInvalidArgument,
          "the Fiedler vector needs at least two vertices");
  const Components cc = connected_components(g);
  if (cc.count != 1) {
    fail(ErrorCode::kNotConnected,
         "graph has " + std::to_string(cc.count) +
             " connected components; the Fiedler vector is degenerate");
  }
  const SpectralBasis basis =
      laplacian_basis(g, LaplacianKind::kCombinatorial, 2, options);
  Vector f = basis.eigenvectors.col(1);
  return f / f.norm();
}

Partition spectral_bipartition(const SparseGraph& g,
                               const EigenOptions& options) {
  const Vector f = fiedler_vector(g, options);
  Partition part;
  part.labels.resize(static_cast<std::size_t>(f.size()));
  for (Index i = 0; i < f.size(); ++i) {
    part.labels[i] = f[i] > kSignThreshold ? 1 : 0;
  }
  return part;
}

double conductance(const SparseGraph& g, const Partition& part, Index a,
                   Index b) {
  require(static_cast<Index>(part.labels.size()) == g.n_vertices(),
          ErrorCode::kDimensionMismatch,
          "partition must label every vertex");
  require(a != b, ErrorCode::kInvalidArgument,
          "conductance needs two distinct clusters");
  const Vector degrees = degree_vector(g);
  double cut = 0.0, vol_a = 0.0, vol_b = 0.0;
  Index size_a = 0, size_b = 0;
  for (Index u = 0; u < g.n_vertices(); ++u) {
    const Index lu = part.labels[u];
    if (lu == a) {
      ++size_a;
      vol_a += degrees[u];
      const auto nbrs = g.neighbors(u);
      const auto w = g.weights(u);
      for (std::size_t p = 0; p < nbrs.size(); ++p) {
        if (part.labels[nbrs[p]] == b) cut += w[p];
      }
    } else if (lu == b) {
      ++size_b;
      vol_b += degrees[u];
    }
  }
  require(size_a > 0 && size_b > 0, ErrorCode::kInvalidArgument,
          "conductance of an empty cluster is undefined");
  const double denom = std::min(vol_a, vol_b);
  require(denom > 0.0, ErrorCode::kNumeric,
          "conductance undefined: a cluster has zero volume");
  return cut / denom;
}

}  // namespace sgnn
