#include "nsp/privacy/privacy.hpp"

#include <cmath>

#include "nsp/error.hpp"
#include "nsp/linalg/vector_ops.hpp"
#include "nsp/rng.hpp"
#include "nsp/simd/kernels.hpp"

namespace nsp {
namespace {

void require_compatible(const Image& x, const NullspaceBasis& basis, const char* op) {
  if (x.pixels.size() != basis.ambient_dim) {
    throw ShapeError(std::string(op) + ": image has " + std::to_string(x.pixels.size()) +
                     " pixels, basis ambient dimension is " + std::to_string(basis.ambient_dim));
  }
}

void require_nonempty(const NullspaceBasis& basis, const char* op) {
  if (basis.dim == 0) {
    throw EmptySubspaceError(std::string(op) + ": the harmless subspace is {0}, no perturbation exists");
  }
}

double penalty(std::span<const double> x_hat) {
  double p = 0.0;
  for (double v : x_hat) {
    if (v < 0.0 || v > 1.0) p += std::abs(v);
  }
  return p;
}

}  // namespace

void PrivacyConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) throw Error("privacy: step_size must be positive");
  if (!(penalty_weight >= 0.0) || !std::isfinite(penalty_weight)) {
    throw Error("privacy: penalty_weight must be non-negative");
  }
  if (!(init_coeff_scale >= 0.0) || !std::isfinite(init_coeff_scale)) {
    throw Error("privacy: init_coeff_scale must be non-negative");
  }
}

double privacy_objective(const Image& x, const NullspaceBasis& basis, std::span<const double> c,
                         double penalty_weight) {
  require_compatible(x, basis, "privacy_objective");
  const auto shift = basis.basis.multiply(c);
  const double n = static_cast<double>(x.pixels.size());
  return simd::sum_squares(shift) / n - penalty_weight * penalty(add(x.pixels, shift));
}

PrivacyResult maximize_dissimilarity(const Image& x, const NullspaceBasis& basis, const Network& net,
                                     const PrivacyConfig& cfg) {
  require_nonempty(basis, "maximize_dissimilarity");
  require_compatible(x, basis, "maximize_dissimilarity");
  if (x.pixels.size() != net.input_shape().size()) {
    throw ShapeError("maximize_dissimilarity: image does not match the network input");
  }
  cfg.validate();

  const std::size_t n = x.pixels.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const DenseMatrix& u = basis.basis;

  Rng rng(cfg.seed);
  std::vector<double> c = rng.gaussian_vector(basis.dim, cfg.init_coeff_scale);
  std::vector<double> grad(basis.dim);
  std::vector<double> x_hat;
  PrivacyResult result;
  result.objective.reserve(cfg.max_iters + 1);

  for (std::size_t t = 0;; ++t) {
    const auto shift = u.multiply(c);
    x_hat = add(x.pixels, shift);
    const double value = simd::sum_squares(shift) * inv_n - cfg.penalty_weight * penalty(x_hat);
    if (!std::isfinite(value)) {
      throw DivergenceError("privacy objective became non-finite at iteration " + std::to_string(t) +
                            "; try a smaller step_size");
    }
    result.objective.push_back(value);
    if (t == cfg.max_iters) break;

    // dF/dc = (2/n) c - lambda U^T g, g = -1 below 0, +1 above 1.
    for (std::size_t j = 0; j < c.size(); ++j) grad[j] = 2.0 * inv_n * c[j];
    if (cfg.penalty_weight > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        const double g = x_hat[i] < 0.0 ? -1.0 : (x_hat[i] > 1.0 ? 1.0 : 0.0);
        if (g != 0.0) simd::axpy(-cfg.penalty_weight * g, u.row(i), grad);
      }
    }
    double step = cfg.step_size;
    if (cfg.normalized_steps) {
      const double norm = norm2(grad);
      if (norm == 0.0) continue;
      step *= (1.0 - static_cast<double>(t) / static_cast<double>(cfg.max_iters)) / norm;
    }
    simd::axpy(step, grad, c);
  }

  result.image = Image(x.shape, std::move(x_hat));
  result.coefficients = std::move(c);
  result.mse = mean_squared_error(result.image.pixels, x.pixels);
  result.max_bound_violation = max_bound_violation(result.image);
  result.output_deviation = norm_inf(subtract(forward(net, result.image.pixels).logits(),
                                              forward(net, x.pixels).logits()));
  return result;
}

Image reconstruct(const Image& x_hat, const NullspaceBasis& basis, std::span<const double> c) {
  require_compatible(x_hat, basis, "reconstruct");
  if (c.size() != basis.dim) {
    throw ShapeError("reconstruct: " + std::to_string(c.size()) + " coefficients for a " +
                     std::to_string(basis.dim) + "-dimensional basis");
  }
  if (basis.dim == 0) return x_hat;
  return Image(x_hat.shape, subtract(x_hat.pixels, basis.basis.multiply(c)));
}

std::vector<Image> sample_reconstructions(const Image& x_hat, const NullspaceBasis& basis, std::size_t k,
                                          std::uint64_t seed, double coeff_scale) {
  require_nonempty(basis, "sample_reconstructions");
  require_compatible(x_hat, basis, "sample_reconstructions");
  std::vector<Image> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    Rng rng(derive_seed(seed, streams::kReconstruction, j));
    out.push_back(reconstruct(x_hat, basis, rng.gaussian_vector(basis.dim, coeff_scale)));
  }
  return out;
}

}  // namespace nsp
