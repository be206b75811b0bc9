#pragma once

#include <span>
#include <variant>

#include "sgnn/common.hpp"
#include "sgnn/csr_matrix.hpp"

namespace sgnn {

class Rng;

// Row-major input to a dense layer, stored sparse when that pays off.
//
// Every product is computed one row at a time with a fixed accumulation
// order, so the result for a row is bitwise identical no matter which other
// rows are part of the same call. Minibatch exactness relies on this.
class FeatureMatrix {
 public:
  // Matrices whose fraction of nonzeros is at or below this are kept sparse.
  static constexpr double kSparseDensity = 0.25;

  FeatureMatrix() = default;
  explicit FeatureMatrix(RowMatrix dense) : data_(std::move(dense)) {}
  explicit FeatureMatrix(CsrMatrix sparse) : data_(std::move(sparse)) {}

  // Picks the storage from the density of `m`.
  static FeatureMatrix from_dense(const Eigen::Ref<const Matrix>& m);
  static FeatureMatrix from_sparse(CsrMatrix m);

  Index rows() const;
  Index cols() const;
  bool is_sparse() const { return std::holds_alternative<CsrMatrix>(data_); }
  const CsrMatrix& sparse() const { return std::get<CsrMatrix>(data_); }
  const RowMatrix& dense() const { return std::get<RowMatrix>(data_); }

  Matrix to_dense() const;
  FeatureMatrix gather_rows(std::span<const Index> rows) const;

  // this * w
  Matrix multiply(const Matrix& w) const;
  // this^T * g, accumulated over rows in ascending order.
  Matrix transpose_multiply(const Matrix& g) const;

  // Inverted dropout on the stored entries. For sparse storage only the
  // nonzeros draw a mask bit; dropping a zero has no effect anyway.
  FeatureMatrix dropout(double p, Rng& rng) const;

  // m * this for a square sparse propagation matrix m.
  FeatureMatrix propagate(const CsrMatrix& m) const;

 private:
  std::variant<RowMatrix, CsrMatrix> data_;
};

}  // namespace sgnn
