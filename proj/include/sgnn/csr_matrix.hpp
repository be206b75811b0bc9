#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sgnn/common.hpp"

namespace sgnn {

struct Triplet {
  Index row;
  Index col;
  double value;
};

// Compressed sparse row matrix with sorted, duplicate-free column indices
// in every row. Immutable after construction.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  // All-zero rows x cols matrix.
  CsrMatrix(Index rows, Index cols);
  // Validates the CSR buffers (monotone offsets, sorted unique in-range
  // columns, finite values).
  CsrMatrix(Index rows, Index cols, std::vector<Index> offsets,
            std::vector<Index> indices, std::vector<double> values);

  static CsrMatrix identity(Index n, double scale = 1.0);
  static CsrMatrix diagonal(const Vector& diag);
  // Duplicates are summed.
  static CsrMatrix from_triplets(Index rows, Index cols,
                                 std::span<const Triplet> triplets);
  // Keeps every entry that is not exactly zero.
  static CsrMatrix from_dense(const Eigen::Ref<const Matrix>& dense);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }

  const std::vector<Index>& offsets() const { return offsets_; }
  const std::vector<Index>& indices() const { return indices_; }
  const std::vector<double>& values() const { return values_; }

  std::span<const Index> row_indices(Index i) const {
    return {indices_.data() + offsets_[i],
            static_cast<std::size_t>(offsets_[i + 1] - offsets_[i])};
  }
  std::span<const double> row_values(Index i) const {
    return {values_.data() + offsets_[i],
            static_cast<std::size_t>(offsets_[i + 1] - offsets_[i])};
  }

  double coeff(Index i, Index j) const;
  Matrix to_dense() const;
  Vector row_sums() const;
  Vector diagonal_values() const;
  CsrMatrix transpose() const;

  // Sparse-dense product. Each output row is accumulated over the row's
  // nonzeros in ascending column order, so row results never depend on
  // other rows.
  Matrix multiply(const Matrix& x) const;
  RowMatrix multiply(const RowMatrix& x) const;
  Vector multiply(const Vector& x) const;

  // Sparse-sparse product (Gustavson). Throws kDensityExceeded as soon as
  // the result would exceed `nnz_budget` stored entries.
  CsrMatrix multiply(const CsrMatrix& other,
                     std::optional<Index> nnz_budget = std::nullopt) const;

  // diag(left) * this * diag(right)
  CsrMatrix scaled(const Vector& left, const Vector& right) const;
  CsrMatrix scaled(double factor) const;
  // Replaces every stored value by 1.
  CsrMatrix pattern() const;

  bool is_symmetric(double tol = 0.0) const;

  bool operator==(const CsrMatrix& other) const = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> offsets_{0};
  std::vector<Index> indices_;
  std::vector<double> values_;
};

// alpha * a + beta * b; entries that cancel to exactly zero are kept.
CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha = 1.0,
              double beta = 1.0);

// A CSR matrix known to be square and symmetric. Laplacians, propagation
// matrices and aggregators are all of this type.
class SparseSymMatrix {
 public:
  SparseSymMatrix() = default;
  // Throws kInvalidArgument unless `m` is square and symmetric within tol.
  explicit SparseSymMatrix(CsrMatrix m, double tol = 0.0);

  static SparseSymMatrix identity(Index n, double scale = 1.0);

  Index n() const { return m_.rows(); }
  const CsrMatrix& csr() const { return m_; }

  double coeff(Index i, Index j) const { return m_.coeff(i, j); }
  Matrix to_dense() const { return m_.to_dense(); }
  Matrix multiply(const Matrix& x) const {
    return m_.multiply(x);
  }
  Vector multiply(const Vector& x) const {
    return m_.multiply(x);
  }

  bool operator==(const SparseSymMatrix& other) const = default;

 private:
  CsrMatrix m_;
};

}  // namespace sgnn
