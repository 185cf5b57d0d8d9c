#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace nsp {

// All randomness flows from one root seed. Sub-seeds are derived as
// splitmix64(root, stream, index) so every trial is reproducible on its own.
namespace streams {
inline constexpr std::uint64_t kWeights = 0x57;
inline constexpr std::uint64_t kInputs = 0x1a;
inline constexpr std::uint64_t kPerturbations = 0x9e;
inline constexpr std::uint64_t kTrials = 0x3c;
inline constexpr std::uint64_t kPrivacy = 0x71;
inline constexpr std::uint64_t kReconstruction = 0xd2;
inline constexpr std::uint64_t kLayers = 0x4b;
}  // namespace streams

std::uint64_t splitmix64(std::uint64_t x) noexcept;

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream,
                          std::uint64_t index = 0) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double gaussian() { return normal_(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  void fill_gaussian(std::span<double> out, double scale = 1.0) {
    for (double& v : out) v = scale * normal_(engine_);
  }

  std::vector<double> gaussian_vector(std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    fill_gaussian(v, scale);
    return v;
  }

  /// Uniformly distributed point on the unit sphere in R^n.
  std::vector<double> unit_vector(std::size_t n);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace nsp
