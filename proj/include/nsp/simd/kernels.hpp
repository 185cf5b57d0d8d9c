#pragma once

// Data-parallel inner loops used by every module: dot products, axpy updates,
// strided axpy (direct convolution), gathered dot products (sparse rows), and
// reductions. Each kernel has a scalar reference and SIMD variants; the best
// variant supported by the running CPU is selected once at first use.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace nsp::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y[i] += alpha * x[i * stride]
  void (*axpy_strided)(double alpha, const double* x, std::size_t stride,
                       double* y, std::size_t n);
  // sum_k values[k] * x[index[k]]
  double (*gather_dot)(const double* values, const std::uint32_t* index,
                       const double* x, std::size_t nnz);
  double (*sum_squares)(const double* x, std::size_t n);
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;

/// nullptr when the variant was not compiled into this build.
const KernelTable* avx2_kernels() noexcept;
const KernelTable* neon_kernels() noexcept;

/// True when the variant is compiled in and the running CPU can execute it.
bool isa_supported(Isa isa) noexcept;

/// Throws nsp::Error if the variant is unavailable on this machine.
const KernelTable& kernels_for(Isa isa);

/// Best supported variant; fixed for the lifetime of the process.
const KernelTable& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sum_squares(std::span<const double> x) {
  return active().sum_squares(x.data(), x.size());
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  return active().max_abs_diff(a.data(), b.data(), a.size());
}

}  // namespace nsp::simd
