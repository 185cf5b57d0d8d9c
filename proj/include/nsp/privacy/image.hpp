#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "nsp/layer/layer_spec.hpp"

namespace nsp {

/// Float image in CHW order. Pixel values are nominally in [0, 1] but may
/// leave that range (harmless perturbations are never clamped).
struct Image {
  TensorShape shape;
  std::vector<double> pixels;

  Image() = default;
  Image(TensorShape s, std::vector<double> p);
  explicit Image(TensorShape s) : shape(s), pixels(s.size(), 0.0) {}

  double& at(std::size_t c, std::size_t y, std::size_t x) { return pixels[(c * shape.height + y) * shape.width + x]; }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return pixels[(c * shape.height + y) * shape.width + x];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Smooth image with values strictly inside (0.15, 0.85): a per-channel offset
/// plus four random plane waves, squashed by tanh.
Image synthetic_image(TensorShape shape, std::uint64_t seed);

/// Largest distance of any pixel outside [0, 1]; 0 when all are inside.
double max_bound_violation(const Image& img);

/// Affine map of the pixel range onto [0, 1] (constant images map to 0.5).
Image normalized_for_viewing(const Image& img);

/// Binary PPM (P6) for 3 channels, PGM (P5) for 1; 8-bit,
/// value round(clamp(v, 0, 1) * 255).
void write_ppm(const std::filesystem::path& path, const Image& img);
/// Reads P6/P5 with maxval <= 255 into values v / maxval.
Image read_ppm(const std::filesystem::path& path);

/// Exact float64 round trip through an NSPW blob with one tensor "image".
void write_image_blob(const std::filesystem::path& path, const Image& img);
Image read_image_blob(const std::filesystem::path& path);

}  // namespace nsp
