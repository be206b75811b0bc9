#include "sgnn/csr_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sgnn {

CsrMatrix::CsrMatrix(Index rows, Index cols)
    : rows_(rows), cols_(cols), offsets_(static_cast<std::size_t>(rows) + 1, 0) {
  require(rows >= 0 && cols >= 0, ErrorCode::kInvalidArgument,
          "matrix dimensions must be nonnegative");
}

CsrMatrix::CsrMatrix(Index rows, Index cols, std::vector<Index> offsets,
                     std::vector<Index> indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      offsets_(std::move(offsets)),
      indices_(std::move(indices)),
      values_(std::move(values)) {
  require(rows >= 0 && cols >= 0, ErrorCode::kInvalidArgument,
          "matrix dimensions must be nonnegative");
  require(offsets_.size() == static_cast<std::size_t>(rows) + 1,
          ErrorCode::kInvalidArgument, "CSR offsets must have rows+1 entries");
  require(indices_.size() == values_.size(), ErrorCode::kInvalidArgument,
          "CSR indices/values size mismatch");
  require(offsets_.front() == 0 &&
              offsets_.back() == static_cast<Index>(values_.size()),
          ErrorCode::kInvalidArgument, "CSR offsets do not span the values");
  for (Index i = 0; i < rows_; ++i) {
    require(offsets_[i] <= offsets_[i + 1], ErrorCode::kInvalidArgument,
            "CSR offsets must be nondecreasing");
    for (Index p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      require(indices_[p] >= 0 && indices_[p] < cols_,
              ErrorCode::kIndexOutOfRange, "CSR column index out of range");
      require(p == offsets_[i] || indices_[p - 1] < indices_[p],
              ErrorCode::kInvalidArgument,
              "CSR column indices must be strictly increasing within a row");
      require(std::isfinite(values_[p]), ErrorCode::kNumeric,
              "CSR values must be finite");
    }
  }
}

CsrMatrix CsrMatrix::identity(Index n, double scale) {
  return diagonal(Vector::Constant(n, scale));
}

CsrMatrix CsrMatrix::diagonal(const Vector& diag) {
  const Index n = diag.size();
  std::vector<Index> offsets(static_cast<std::size_t>(n) + 1);
  std::iota(offsets.begin(), offsets.end(), Index{0});
  std::vector<Index> indices(static_cast<std::size_t>(n));
  std::iota(indices.begin(), indices.end(), Index{0});
  std::vector<double> values(diag.data(), diag.data() + n);
  return CsrMatrix(n, n, std::move(offsets), std::move(indices),
                   std::move(values));
}

CsrMatrix CsrMatrix::from_triplets(Index rows, Index cols,
                                   std::span<const Triplet> triplets) {
  std::vector<Index> counts(static_cast<std::size_t>(rows) + 1, 0);
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      fail(ErrorCode::kIndexOutOfRange,
           "triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
               ") outside a " + std::to_string(rows) + "x" +
               std::to_string(cols) + " matrix");
    }
    ++counts[t.row + 1];
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());

  // Bucket by row, then sort and merge each row.
  std::vector<std::pair<Index, double>> bucket(triplets.size());
  std::vector<Index> cursor(counts.begin(), counts.end() - 1);
  for (const auto& t : triplets) bucket[cursor[t.row]++] = {t.col, t.value};

  std::vector<Index> offsets(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<Index> indices;
  std::vector<double> values;
  indices.reserve(triplets.size());
  values.reserve(triplets.size());
  for (Index i = 0; i < rows; ++i) {
    auto first = bucket.begin() + counts[i];
    auto last = bucket.begin() + counts[i + 1];
    std::stable_sort(first, last, [](const auto& a, const auto& b) {
      return a.first < b.first;
    });
    for (auto it = first; it != last; ++it) {
      if (!indices.empty() && static_cast<Index>(indices.size()) > offsets[i] &&
          indices.back() == it->first) {
        values.back() += it->second;
      } else {
        indices.push_back(it->first);
        values.push_back(it->second);
      }
    }
    offsets[i + 1] = static_cast<Index>(indices.size());
  }
  return CsrMatrix(rows, cols, std::move(offsets), std::move(indices),
                   std::move(values));
}

CsrMatrix CsrMatrix::from_dense(const Eigen::Ref<const Matrix>& dense) {
  const Index rows = dense.rows();
  const Index cols = dense.cols();
  std::vector<Index> offsets(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<Index> indices;
  std::vector<double> values;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const double v = dense(i, j);
      if (v != 0.0) {
        indices.push_back(j);
        values.push_back(v);
      }
    }
    offsets[i + 1] = static_cast<Index>(indices.size());
  }
  return CsrMatrix(rows, cols, std::move(offsets), std::move(indices),
                   std::move(values));
}

double CsrMatrix::coeff(Index i, Index j) const {
  require(i >= 0 && i < rows_ && j >= 0 && j < cols_,
          ErrorCode::kIndexOutOfRange, "coefficient index out of range");
  const auto cols = row_indices(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return values_[offsets_[i] + (it - cols.begin())];
}

Matrix CsrMatrix::to_dense() const {
  Matrix out = Matrix::Zero(rows_, cols_);
  for (Index i = 0; i < rows_; ++i) {
    for (Index p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      out(i, indices_[p]) = values_[p];
    }
  }
  return out;
}

Vector CsrMatrix::row_sums() const {
  Vector out = Vector::Zero(rows_);
  for (Index i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (Index p = offsets_[i]; p < offsets_[i + 1]; ++p) s += values_[p];
    out[i] = s;
  }
  return out;
}

Vector CsrMatrix::diagonal_values() const {
  const Index n = std::min(rows_, cols_);
  Vector out(n);
  for (Index i = 0; i < n; ++i) out[i] = coeff(i, i);
  return out;
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<Index> offsets(static_cast<std::size_t>(cols_) + 1, 0);
  for (Index c : indices_) ++offsets[c + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<Index> cursor(offsets.begin(), offsets.end() - 1);
  std::vector<Index> indices(indices_.size());
  std::vector<double> values(values_.size());
  for (Index i = 0; i < rows_; ++i) {
    for (Index p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      const Index dst = cursor[indices_[p]]++;
      indices[dst] = i;
      values[dst] = values_[p];
    }
  }
  return CsrMatrix(cols_, rows_, std::move(offsets), std::move(indices),
                   std::move(values));
}

Matrix CsrMatrix::multiply(const Matrix& x) const {
  if (x.rows() != cols_) {
    fail(ErrorCode::kDimensionMismatch,
         "sparse-dense product: " + std::to_string(rows_) + "x" +
             std::to_string(cols_) + " times " + std::to_string(x.rows()) +
             "x" + std::to_string(x.cols()));
  }
  Matrix out = Matrix::Zero(rows_, x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double* xc = x.col(j).data();
    double* oc = out.col(j).data();
    for (Index i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (Index p = offsets_[i]; p < offsets_[i + 1]; ++p) {
        s += values_[p] * xc[indices_[p]];
      }
      oc[i] = s;
    }
  }
  return out;
}

RowMatrix CsrMatrix::multiply(const RowMatrix& x) const {
  if (x.rows() != cols_) {
    fail(ErrorCode::kDimensionMismatch,
         "sparse-dense product: inner dimensions differ (" +
             std::to_string(cols_) + " vs " + std::to_string(x.rows()) + ")");
  }
  RowMatrix out = RowMatrix::Zero(rows_, x.cols());
  for (Index i = 0; i < rows_; ++i) {
    for (Index p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      out.row(i) += values_[p] * x.row(indices_[p]);
    }
  }
  return out;
}

Vector CsrMatrix::multiply(const Vector& x) const {
  require(x.size() == cols_, ErrorCode::kDimensionMismatch,
          "sparse matrix-vector product: size mismatch");
  Vector out(rows_);
  for (Index i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (Index p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      s += values_[p] * x[indices_[p]];
    }
    out[i] = s;
  }
  return out;
}

CsrMatrix CsrMatrix::multiply(const CsrMatrix& other,
                              std::optional<Index> nnz_budget) const {
  if (other.rows_ != cols_) {
    fail(ErrorCode::kDimensionMismatch,
         "sparse-sparse product: inner dimensions differ (" +
             std::to_string(cols_) + " vs " + std::to_string(other.rows_) +
             ")");
  }
  std::vector<Index> offsets(static_cast<std::size_t>(rows_) + 1, 0);
  std::vector<Index> indices;
  std::vector<double> values;
  std::vector<double> accum(static_cast<std::size_t>(other.cols_), 0.0);
  std::vector<Index> marker(static_cast<std::size_t>(other.cols_), -1);
  std::vector<Index> touched;
  for (Index i = 0; i < rows_; ++i) {
    touched.clear();
    for (Index p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      const Index k = indices_[p];
      const double a = values_[p];
      for (Index q = other.offsets_[k]; q < other.offsets_[k + 1]; ++q) {
        const Index j = other.indices_[q];
        if (marker[j] != i) {
          marker[j] = i;
          accum[j] = 0.0;
          touched.push_back(j);
        }
        accum[j] += a * other.values_[q];
      }
    }
    std::sort(touched.begin(), touched.end());
    if (nnz_budget &&
        static_cast<Index>(indices.size() + touched.size()) > *nnz_budget) {
      fail(ErrorCode::kDensityExceeded,
           "sparse product exceeds the nnz budget of " +
               std::to_string(*nnz_budget) + " entries at row " +
               std::to_string(i) + " of " + std::to_string(rows_));
    }
    for (Index j : touched) {
      indices.push_back(j);
      values.push_back(accum[j]);
    }
    offsets[i + 1] = static_cast<Index>(indices.size());
  }
  return CsrMatrix(rows_, other.cols_, std::move(offsets), std::move(indices),
                   std::move(values));
}

CsrMatrix CsrMatrix::scaled(const Vector& left, const Vector& right) const {
  require(left.size() == rows_ && right.size() == cols_,
          ErrorCode::kDimensionMismatch, "diagonal scaling size mismatch");
  std::vector<double> values(values_.size());
  for (Index i = 0; i < rows_; ++i) {
    for (Index p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      // Grouping the diagonal factors keeps symmetric scaling bitwise
      // symmetric.
      values[p] = values_[p] * (left[i] * right[indices_[p]]);
    }
  }
  return CsrMatrix(rows_, cols_, offsets_, indices_, std::move(values));
}

CsrMatrix CsrMatrix::scaled(double factor) const {
  std::vector<double> values(values_);
  for (double& v : values) v *= factor;
  return CsrMatrix(rows_, cols_, offsets_, indices_, std::move(values));
}

CsrMatrix CsrMatrix::pattern() const {
  return CsrMatrix(rows_, cols_, offsets_, indices_,
                   std::vector<double>(values_.size(), 1.0));
}

bool CsrMatrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  for (Index i = 0; i < rows_; ++i) {
    for (Index p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      const Index j = indices_[p];
      const auto cols = row_indices(j);
      auto it = std::lower_bound(cols.begin(), cols.end(), i);
      const double mirror = (it == cols.end() || *it != i)
                                ? 0.0
                                : values_[offsets_[j] + (it - cols.begin())];
      if (std::abs(mirror - values_[p]) > tol) return false;
    }
  }
  return true;
}

CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha,
              double beta) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          ErrorCode::kDimensionMismatch, "sparse sum: shape mismatch");
  std::vector<Index> offsets(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> indices;
  std::vector<double> values;
  indices.reserve(static_cast<std::size_t>(a.nnz() + b.nnz()));
  values.reserve(indices.capacity());
  for (Index i = 0; i < a.rows(); ++i) {
    const auto ai = a.row_indices(i);
    const auto av = a.row_values(i);
    const auto bi = b.row_indices(i);
    const auto bv = b.row_values(i);
    std::size_t p = 0, q = 0;
    while (p < ai.size() || q < bi.size()) {
      if (q == bi.size() || (p < ai.size() && ai[p] < bi[q])) {
        indices.push_back(ai[p]);
        values.push_back(alpha * av[p]);
        ++p;
      } else if (p == ai.size() || bi[q] < ai[p]) {
        indices.push_back(bi[q]);
        values.push_back(beta * bv[q]);
        ++q;
      } else {
        indices.push_back(ai[p]);
        values.push_back(alpha * av[p] + beta * bv[q]);
        ++p;
        ++q;
      }
    }
    offsets[i + 1] = static_cast<Index>(indices.size());
  }
  return CsrMatrix(a.rows(), a.cols(), std::move(offsets), std::move(indices),
                   std::move(values));
}

SparseSymMatrix::SparseSymMatrix(CsrMatrix m, double tol) : m_(std::move(m)) {
  require(m_.rows() == m_.cols(), ErrorCode::kInvalidArgument,
          "symmetric matrix must be square");
  require(m_.is_symmetric(tol), ErrorCode::kInvalidArgument,
          "matrix is not symmetric");
}

SparseSymMatrix SparseSymMatrix::identity(Index n, double scale) {
  return SparseSymMatrix(CsrMatrix::identity(n, scale));
}

}  // namespace sgnn
