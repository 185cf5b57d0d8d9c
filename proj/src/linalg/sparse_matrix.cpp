#include "nsp/linalg/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nsp/error.hpp"
#include "nsp/simd/kernels.hpp"

namespace nsp {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
  if (cols > std::numeric_limits<std::uint32_t>::max()) {
    throw ShapeError("SparseMatrix: column count exceeds 32-bit index range");
  }
  row_ptr_.reserve(rows + 1);
}

void SparseMatrix::push_row(std::vector<Entry> entries) {
  if (filled_rows() >= rows_) {
    throw ShapeError("SparseMatrix::push_row: matrix already has " + std::to_string(rows_) + " rows");
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.col < b.col; });
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Entry& e = entries[k];
    if (e.col >= cols_) {
      throw ShapeError("SparseMatrix::push_row: column " + std::to_string(e.col) +
                       " out of range for " + std::to_string(cols_) + " columns");
    }
    if (k > 0 && entries[k - 1].col == e.col) {
      throw ShapeError("SparseMatrix::push_row: duplicate column " + std::to_string(e.col));
    }
    if (!std::isfinite(e.value)) throw ShapeError("SparseMatrix::push_row: non-finite value");
  }
  for (const Entry& e : entries) {
    if (e.value == 0.0) continue;
    col_index_.push_back(e.col);
    values_.push_back(e.value);
  }
  row_ptr_.push_back(values_.size());
}

std::size_t SparseMatrix::max_row_nnz() const {
  std::size_t m = 0;
  for (std::size_t r = 0; r + 1 < row_ptr_.size(); ++r) m = std::max(m, row_ptr_[r + 1] - row_ptr_[r]);
  return m;
}

std::span<const std::uint32_t> SparseMatrix::row_columns(std::size_t r) const {
  return {col_index_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
}

std::span<const double> SparseMatrix::row_values(std::size_t r) const {
  return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
}

void SparseMatrix::require_complete(const char* op) const {
  if (filled_rows() != rows_) {
    throw ShapeError(std::string(op) + ": sparse matrix has " + std::to_string(filled_rows()) +
                     " of " + std::to_string(rows_) + " rows");
  }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  require_complete("SparseMatrix::multiply");
  if (x.size() != cols_) {
    throw ShapeError("SparseMatrix::multiply: vector length " + std::to_string(x.size()) +
                     " != cols " + std::to_string(cols_));
  }
  const auto& k = simd::active();
  std::vector<double> y(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    const std::size_t begin = row_ptr_[r];
    y[r] = k.gather_dot(values_.data() + begin, col_index_.data() + begin, x.data(),
                        row_ptr_[r + 1] - begin);
  }
  return y;
}

DenseMatrix SparseMatrix::multiply(const DenseMatrix& b) const {
  require_complete("SparseMatrix::multiply");
  if (b.rows() != cols_) {
    throw ShapeError("SparseMatrix::multiply: right-hand side has " + std::to_string(b.rows()) +
                     " rows, expected " + std::to_string(cols_));
  }
  const auto& k = simd::active();
  DenseMatrix c(rows_, b.cols());
  for (std::size_t r = 0; r < rows_; ++r) {
    double* out = c.row(r).data();
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      k.axpy(values_[p], b.row(col_index_[p]).data(), out, b.cols());
    }
  }
  return c;
}

DenseMatrix SparseMatrix::to_dense() const {
  require_complete("SparseMatrix::to_dense");
  DenseMatrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) d(r, col_index_[p]) = values_[p];
  return d;
}

std::vector<double> SparseMatrix::multiply_transposed(std::span<const double> y) const {
  require_complete("SparseMatrix::multiply_transposed");
  if (y.size() != rows_) {
    throw ShapeError("SparseMatrix::multiply_transposed: vector has " + std::to_string(y.size()) +
                     " entries, expected " + std::to_string(rows_));
  }
  std::vector<double> out(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out[col_index_[k]] += yr * values_[k];
  }
  return out;
}

double estimate_sigma_max(const SparseMatrix& a, std::size_t iterations) {
  if (a.rows() == 0 || a.cols() == 0 || a.nnz() == 0) return 0.0;
  std::vector<double> v(a.cols());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i % 7);
  double sigma = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    const double vn = std::sqrt(simd::sum_squares(v));
    if (vn == 0.0) return 0.0;
    for (double& x : v) x /= vn;
    const std::vector<double> av = a.multiply(v);
    sigma = std::sqrt(simd::sum_squares(av));
    v = a.multiply_transposed(av);
  }
  return sigma;
}

}  // namespace nsp
