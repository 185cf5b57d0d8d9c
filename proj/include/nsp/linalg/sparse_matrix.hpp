#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nsp/linalg/dense_matrix.hpp"

namespace nsp {

/// Row-compressed sparse matrix. Rows are appended in order; within a row,
/// column indices are strictly increasing and stored values are nonzero.
class SparseMatrix {
 public:
  struct Entry {
    std::uint32_t col;
    double value;
  };

  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols);

  /// Appends the next row. Entries are sorted by column; exact zeros are
  /// dropped. Duplicate or out-of-range columns and non-finite values throw.
  void push_row(std::vector<Entry> entries);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }
  /// Number of rows pushed so far; equals rows() once complete.
  std::size_t filled_rows() const noexcept { return row_ptr_.size() - 1; }
  std::size_t max_row_nnz() const;

  std::span<const std::uint32_t> row_columns(std::size_t r) const;
  std::span<const double> row_values(std::size_t r) const;

  std::vector<double> multiply(std::span<const double> x) const;
  /// A^T * y
  std::vector<double> multiply_transposed(std::span<const double> y) const;
  /// A * B for a dense right-hand side.
  DenseMatrix multiply(const DenseMatrix& b) const;

  DenseMatrix to_dense() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  void require_complete(const char* op) const;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> col_index_;
  std::vector<double> values_;
};

/// Largest singular value by power iteration on A^T A from a fixed start
/// vector. Approaches sigma_max from below; used for tolerance scaling.
double estimate_sigma_max(const SparseMatrix& a, std::size_t iterations = 100);

}  // namespace nsp
