#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace nsp {

/// Row-major matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  /// Throws ShapeError unless data.size() == rows * cols.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// Builds a rows x columns.size() matrix whose j-th column is columns[j].
  static DenseMatrix from_columns(std::size_t rows,
                                  const std::vector<std::vector<double>>& columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  std::vector<double> column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> values);

  DenseMatrix transposed() const;
  DenseMatrix left_columns(std::size_t count) const;

  /// M * x
  std::vector<double> multiply(std::span<const double> x) const;
  /// M^T * x
  std::vector<double> multiply_transposed(std::span<const double> x) const;

  bool all_finite() const;
  double max_abs() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

/// max_ij |a_ij - b_ij|; shapes must match.
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

/// ||U^T U - I||_max
double orthonormality_error(const DenseMatrix& u);

}  // namespace nsp
