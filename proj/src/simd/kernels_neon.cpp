#include <arm_neon.h>

#include <cmath>

#include "nsp/simd/kernels.hpp"

namespace nsp::simd {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_strided_neon(double alpha, const double* x, std::size_t stride,
                       double* y, std::size_t n) {
  if (stride == 1) {
    axpy_neon(alpha, x, y, n);
    return;
  }
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i * stride];
}

double gather_dot_neon(const double* values, const std::uint32_t* index,
                       const double* x, std::size_t nnz) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 2 <= nnz; k += 2) {
    const double pair[2] = {x[index[k]], x[index[k + 1]]};
    acc = vfmaq_f64(acc, vld1q_f64(values + k), vld1q_f64(pair));
  }
  double s = vaddvq_f64(acc);
  for (; k < nnz; ++k) s += values[k] * x[index[k]];
  return s;
}

double sum_squares_neon(const double* x, std::size_t n) { return dot_neon(x, x, n); }

double max_abs_diff_neon(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    if (d > m || std::isnan(d)) m = d;
  }
  return m;
}

constexpr KernelTable kNeon{Isa::neon,        dot_neon,
                            axpy_neon,        axpy_strided_neon,
                            gather_dot_neon,  sum_squares_neon,
                            max_abs_diff_neon};

}  // namespace

const KernelTable* neon_kernels() noexcept { return &kNeon; }

}  // namespace nsp::simd
