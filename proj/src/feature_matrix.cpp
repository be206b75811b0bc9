#include "sgnn/feature_matrix.hpp"

#include <string>

#include "sgnn/rng.hpp"

namespace sgnn {

namespace {

bool prefer_sparse(Index nnz, Index rows, Index cols) {
  const double total = static_cast<double>(rows) * static_cast<double>(cols);
  return total > 0 && static_cast<double>(nnz) <= FeatureMatrix::kSparseDensity * total;
}

}  // namespace

FeatureMatrix FeatureMatrix::from_dense(const Eigen::Ref<const Matrix>& m) {
  const Index nnz = (m.array() != 0.0).count();
  if (prefer_sparse(nnz, m.rows(), m.cols())) {
    return FeatureMatrix(CsrMatrix::from_dense(m));
  }
  return FeatureMatrix(RowMatrix(m));
}

FeatureMatrix FeatureMatrix::from_sparse(CsrMatrix m) {
  if (prefer_sparse(m.nnz(), m.rows(), m.cols())) {
    return FeatureMatrix(std::move(m));
  }
  return FeatureMatrix(RowMatrix(m.to_dense()));
}

Index FeatureMatrix::rows() const {
  return std::visit([](const auto& d) { return d.rows(); }, data_);
}

Index FeatureMatrix::cols() const {
  return std::visit([](const auto& d) { return d.cols(); }, data_);
}

Matrix FeatureMatrix::to_dense() const {
  if (is_sparse()) return sparse().to_dense();
  return Matrix(dense());
}

FeatureMatrix FeatureMatrix::gather_rows(std::span<const Index> rows) const {
  const Index n = this->rows();
  for (Index r : rows) {
    if (r < 0 || r >= n) {
      fail(ErrorCode::kIndexOutOfRange,
           "row " + std::to_string(r) + " outside a matrix of " +
               std::to_string(n) + " rows");
    }
  }
  if (!is_sparse()) {
    const RowMatrix& d = dense();
    RowMatrix out(static_cast<Index>(rows.size()), d.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = d.row(rows[i]);
    return FeatureMatrix(std::move(out));
  }
  const CsrMatrix& s = sparse();
  std::vector<Index> offsets(rows.size() + 1, 0);
  std::vector<Index> indices;
  std::vector<double> values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto ri = s.row_indices(rows[i]);
    const auto rv = s.row_values(rows[i]);
    indices.insert(indices.end(), ri.begin(), ri.end());
    values.insert(values.end(), rv.begin(), rv.end());
    offsets[i + 1] = static_cast<Index>(indices.size());
  }
  return FeatureMatrix(CsrMatrix(static_cast<Index>(rows.size()), s.cols(),
                                 std::move(offsets), std::move(indices),
                                 std::move(values)));
}

Matrix FeatureMatrix::multiply(const Matrix& w) const {
  if (w.rows() != cols()) {
    fail(ErrorCode::kDimensionMismatch,
         "feature product: " + std::to_string(rows()) + "x" +
             std::to_string(cols()) + " times " + std::to_string(w.rows()) +
             "x" + std::to_string(w.cols()));
  }
  RowMatrix out = RowMatrix::Zero(rows(), w.cols());
  if (is_sparse()) {
    // Row-major copy of w so that each row update is contiguous.
    const RowMatrix wr = w;
    const CsrMatrix& s = sparse();
    for (Index i = 0; i < s.rows(); ++i) {
      const auto ri = s.row_indices(i);
      const auto rv = s.row_values(i);
      for (std::size_t p = 0; p < ri.size(); ++p) {
        out.row(i) += rv[p] * wr.row(ri[p]);
      }
    }
  } else {
    const RowMatrix& d = dense();
    for (Index i = 0; i < d.rows(); ++i) {
      // Row-vector times matrix: Eigen's GEMV, whose accumulation order
      // depends only on the shape of w.
      out.row(i).noalias() = d.row(i) * w;
    }
  }
  return Matrix(out);
}

Matrix FeatureMatrix::transpose_multiply(const Matrix& g) const {
  if (g.rows() != rows()) {
    fail(ErrorCode::kDimensionMismatch,
         "transposed feature product: row counts differ (" +
             std::to_string(rows()) + " vs " + std::to_string(g.rows()) + ")");
  }
  const RowMatrix gr = g;
  RowMatrix out = RowMatrix::Zero(cols(), g.cols());
  if (is_sparse()) {
    const CsrMatrix& s = sparse();
    for (Index i = 0; i < s.rows(); ++i) {
      const auto ri = s.row_indices(i);
      const auto rv = s.row_values(i);
      for (std::size_t p = 0; p < ri.size(); ++p) {
        out.row(ri[p]) += rv[p] * gr.row(i);
      }
    }
  } else {
    const RowMatrix& d = dense();
    for (Index i = 0; i < d.rows(); ++i) {
      out.noalias() += d.row(i).transpose() * gr.row(i);
    }
  }
  return Matrix(out);
}

FeatureMatrix FeatureMatrix::dropout(double p, Rng& rng) const {
  require(p >= 0.0 && p < 1.0, ErrorCode::kInvalidArgument,
          "dropout probability must lie in [0, 1)");
  if (p == 0.0) return *this;
  const double scale = 1.0 / (1.0 - p);
  if (is_sparse()) {
    const CsrMatrix& s = sparse();
    std::vector<double> values(s.values());
    for (double& v : values) v = rng.uniform() < p ? 0.0 : v * scale;
    return FeatureMatrix(
        CsrMatrix(s.rows(), s.cols(), s.offsets(), s.indices(), std::move(values)));
  }
  RowMatrix out = dense();
  double* data = out.data();
  for (Index k = 0; k < out.size(); ++k) {
    data[k] = rng.uniform() < p ? 0.0 : data[k] * scale;
  }
  return FeatureMatrix(std::move(out));
}

FeatureMatrix FeatureMatrix::propagate(const CsrMatrix& m) const {
  if (m.cols() != rows()) {
    fail(ErrorCode::kDimensionMismatch,
         "propagation: matrix has " + std::to_string(m.cols()) +
             " columns but features have " + std::to_string(rows()) + " rows");
  }
  if (is_sparse()) return from_sparse(m.multiply(sparse()));
  return FeatureMatrix(m.multiply(dense()));
}

}  // namespace sgnn
