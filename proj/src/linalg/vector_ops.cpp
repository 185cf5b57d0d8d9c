#include "nsp/linalg/vector_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsp/error.hpp"
#include "nsp/simd/kernels.hpp"

namespace nsp {
namespace {

void require_same_length(std::span<const double> a, std::span<const double> b,
                         const char* op) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(op) + ": length mismatch (" +
                     std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "dot");
  return simd::dot(a, b);
}

double norm2(std::span<const double> x) { return std::sqrt(simd::sum_squares(x)); }

double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "max_abs_diff");
  return simd::max_abs_diff(a, b);
}

std::vector<double> add(std::span<const double> a, std::span<const double> b) {
  return add_scaled(a, 1.0, b);
}

std::vector<double> subtract(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "subtract");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

std::vector<double> scaled(std::span<const double> x, double alpha) {
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v *= alpha;
  return out;
}

std::vector<double> add_scaled(std::span<const double> a, double alpha,
                               std::span<const double> b) {
  require_same_length(a, b, "add_scaled");
  std::vector<double> out(a.begin(), a.end());
  simd::axpy(alpha, b, out);
  return out;
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

double mean_squared_error(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "mean_squared_error");
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

}  // namespace nsp
