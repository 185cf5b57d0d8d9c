#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nsp/net/network.hpp"
#include "nsp/nullspace/nullspace.hpp"
#include "nsp/privacy/image.hpp"

namespace nsp {

struct PrivacyConfig {
  std::size_t max_iters = 500;
  double step_size = 1.0;
  double penalty_weight = 10.0;
  /// c starts as init_coeff_scale * N(0, I). Zero starts at the original image.
  double init_coeff_scale = 0.1;
  std::uint64_t seed = 0;
  /// When set, each step moves step_size * (1 - t / max_iters) along the unit
  /// gradient direction; otherwise c += step_size * gradient.
  bool normalized_steps = true;

  /// Throws Error on non-positive or non-finite settings.
  void validate() const;
};

struct PrivacyResult {
  Image image;                      // x_hat = x + U c, never clamped
  std::vector<double> coefficients;  // c
  double mse = 0.0;                  // ||x_hat - x||^2 / n
  double max_bound_violation = 0.0;
  double output_deviation = 0.0;     // ||f(x_hat) - f(x)||_inf
  std::vector<double> objective;     // value before each step, then the final value
};

/// (1/n) ||U c||^2 - penalty_weight * sum_i (|x_hat_i| if x_hat_i < 0 or > 1).
double privacy_objective(const Image& x, const NullspaceBasis& basis, std::span<const double> c,
                         double penalty_weight);

/// Gradient ascent on c for privacy_objective. `basis` must be the harmless
/// basis of the layer reading the network input. Throws EmptySubspaceError
/// when d = 0 and DivergenceError if the objective stops being finite.
PrivacyResult maximize_dissimilarity(const Image& x, const NullspaceBasis& basis, const Network& net,
                                     const PrivacyConfig& cfg);

/// x_hat - U c.
Image reconstruct(const Image& x_hat, const NullspaceBasis& basis, std::span<const double> c);

/// k candidate originals x_hat - U c_j with c_j ~ coeff_scale * N(0, I),
/// seeded per j. All share the network output of x_hat.
std::vector<Image> sample_reconstructions(const Image& x_hat, const NullspaceBasis& basis, std::size_t k,
                                          std::uint64_t seed, double coeff_scale = 1.0);

}  // namespace nsp
