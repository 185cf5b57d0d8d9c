#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "nsp/cli/report.hpp"
#include "nsp/net/network.hpp"
#include "nsp/nullspace/nullspace.hpp"
#include "nsp/privacy/image.hpp"
#include "nsp/privacy/privacy.hpp"

namespace nsp::cli {

// ---- End-to-end RMSE of perturbations injected into the network.

struct RmseOptions {
  std::size_t inputs = 8;
  std::vector<double> scales{1, 2, 4, 8, 16, 32};
  double linf = 8.0 / 255.0;
  /// Feature index whose reading layer has d = 0; the least-harmful direction
  /// is injected there. Unset skips the least-harmful rows.
  std::optional<std::size_t> least_harmful_layer = 6;
};

struct RmseRun {
  /// kinds: harmless, gaussian (input, l2-matched to harmless),
  /// least_harmful and gaussian_feature (both at least_harmful_layer).
  RmseReport report;
  Section section;
};

RmseRun run_rmse_battery(const Network& net, const NullspaceBasis& input_basis, std::uint64_t seed,
                     const RmseOptions& options = {});

Table rmse_table(const RmseReport& report);

/// Orthonormality and residual of a basis against its layer.
Section check_basis_section(const NullspaceBasis& basis, const EquivalentMatrix& eq);

// ---- Least-harmful direction on full-column-rank matrices.

Section run_least_harmful_suite(std::uint64_t seed, std::size_t matrices = 10, std::size_t samples = 10000);

// ---- Decomposition laws, classification, minimal norm.

Section run_decomposition_suite(std::uint64_t seed, std::size_t trials = 1000);

// ---- Contour grid of ||A(a d_orth + b d_par)||_2.

struct ContourGrid {
  std::vector<double> a;  // orthogonal multiplier, rows
  std::vector<double> b;  // parallel multiplier, columns
  std::vector<double> values;  // row-major a.size() x b.size()
  double orthogonal_norm = 0.0;  // ||A d_orth||

  double at(std::size_t i, std::size_t j) const { return values[i * b.size() + j]; }
};

/// a in linspace(0, 2, points), b in linspace(-2, 2, points). Throws
/// EmptySubspaceError when the layer has d = 0.
ContourGrid contour_grid(const EquivalentMatrix& eq, const NullspaceBasis& basis, std::uint64_t seed,
                         std::size_t points = 21);
Section check_contour(const ContourGrid& grid);
/// Columns a, b, value.
Table contour_table(const ContourGrid& grid);

// ---- Privacy batch.

struct PrivacyRow {
  std::size_t index = 0;
  double mse = 0.0;
  double ssim = 0.0;
  double ssim_gaussian = 0.0;  // ssim(x + g, x) with ||g|| = ||x_hat - x||
  double output_deviation = 0.0;
  double violation = 0.0;
  bool argmax_agree = false;
  double reconstruction_deviation = 0.0;  // worst ||f(r_j) - f(x_hat)||_inf
  bool reconstructions_distinct = false;
};

struct PrivacyOutputs {
  const Image& original;
  const PrivacyResult& result;
  const std::vector<Image>& reconstructions;
};

struct PrivacyBatch {
  std::vector<PrivacyRow> rows;
  Section section;
};

/// Seeded synthetic inputs for the batch.
std::vector<Image> synthetic_batch(const TensorShape& shape, std::uint64_t seed, std::size_t count);

/// Runs maximize_dissimilarity on every image with cfg.seed derived per image,
/// then samples `reconstructions` candidate originals. `sink` sees each
/// image's outputs before they are discarded.
PrivacyBatch run_privacy_batch(const Network& net, const NullspaceBasis& input_basis,
                               const std::vector<Image>& images, std::uint64_t seed,
                               const PrivacyConfig& cfg = {}, std::size_t reconstructions = 16,
                               const std::function<void(std::size_t, const PrivacyOutputs&)>& sink = {});

inline constexpr double kPrivacyMinMse = 0.05;

/// Columns index, mse, ssim, ssim_gaussian, output_deviation, violation,
/// argmax_agree.
Table privacy_table(const std::vector<PrivacyRow>& rows);

// ---- SSIM.

/// 3x12x10 pair defined in closed form; its SSIM is pinned against a
/// brute-force reference.
std::pair<Image, Image> ssim_golden_pair();
inline constexpr double kSsimGolden = -0.042691517684297846;

Section run_ssim_suite(std::uint64_t seed);

}  // namespace nsp::cli
