#include <cmath>

#include "nsp/simd/kernels.hpp"

namespace nsp::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_strided_scalar(double alpha, const double* x, std::size_t stride,
                         double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i * stride];
}

double gather_dot_scalar(const double* values, const std::uint32_t* index,
                         const double* x, std::size_t nnz) {
  double s = 0.0;
  for (std::size_t k = 0; k < nnz; ++k) s += values[k] * x[index[k]];
  return s;
}

double sum_squares_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    // NaN propagates so that a corrupted vector never compares as equal.
    if (d > m || std::isnan(d)) m = d;
  }
  return m;
}

constexpr KernelTable kScalar{Isa::scalar,        dot_scalar,
                              axpy_scalar,        axpy_strided_scalar,
                              gather_dot_scalar,  sum_squares_scalar,
                              max_abs_diff_scalar};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace nsp::simd
