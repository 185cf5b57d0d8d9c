#include "nsp/linalg/dense_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsp/error.hpp"
#include "nsp/simd/kernels.hpp"

namespace nsp {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("DenseMatrix: data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("DenseMatrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, std::move(data));
}

DenseMatrix DenseMatrix::from_columns(std::size_t rows,
                                      const std::vector<std::vector<double>>& columns) {
  DenseMatrix m(rows, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) m.set_column(j, columns[j]);
  return m;
}

std::vector<double> DenseMatrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = data_[r * cols_ + c];
  return out;
}

void DenseMatrix::set_column(std::size_t c, std::span<const double> values) {
  if (values.size() != rows_ || c >= cols_) {
    throw ShapeError("DenseMatrix::set_column: column " + std::to_string(c) + " of length " +
                     std::to_string(values.size()) + " does not fit " + std::to_string(rows_) +
                     "x" + std::to_string(cols_));
  }
  for (std::size_t r = 0; r < rows_; ++r) data_[r * cols_ + c] = values[r];
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

DenseMatrix DenseMatrix::left_columns(std::size_t count) const {
  if (count > cols_) throw ShapeError("DenseMatrix::left_columns: too many columns");
  DenseMatrix out(rows_, count);
  for (std::size_t r = 0; r < rows_; ++r)
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_), count, out.row(r).begin());
  return out;
}

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) {
    throw ShapeError("DenseMatrix::multiply: vector length " + std::to_string(x.size()) +
                     " != cols " + std::to_string(cols_));
  }
  const auto& k = simd::active();
  std::vector<double> y(rows_);
  for (std::size_t r = 0; r < rows_; ++r) y[r] = k.dot(data_.data() + r * cols_, x.data(), cols_);
  return y;
}

std::vector<double> DenseMatrix::multiply_transposed(std::span<const double> x) const {
  if (x.size() != rows_) {
    throw ShapeError("DenseMatrix::multiply_transposed: vector length " +
                     std::to_string(x.size()) + " != rows " + std::to_string(rows_));
  }
  const auto& k = simd::active();
  std::vector<double> y(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    if (x[r] != 0.0) k.axpy(x[r], data_.data() + r * cols_, y.data(), cols_);
  }
  return y;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::fabs(v));
  return m;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  const auto& k = simd::active();
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out = c.row(i).data();
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double s = a(i, p);
      if (s != 0.0) k.axpy(s, b.row(p).data(), out, b.cols());
    }
  }
  return c;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("max_abs_diff: matrix shapes differ");
  }
  return simd::max_abs_diff(a.data(), b.data());
}

double orthonormality_error(const DenseMatrix& u) {
  const std::size_t d = u.cols();
  const DenseMatrix ut = u.transposed();
  const auto& k = simd::active();
  double err = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      const double g = k.dot(ut.row(i).data(), ut.row(j).data(), u.rows());
      err = std::max(err, std::fabs(g - (i == j ? 1.0 : 0.0)));
    }
  }
  return err;
}

}  // namespace nsp
