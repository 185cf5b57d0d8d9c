#include "nsp/rng.hpp"

#include <cmath>

namespace nsp {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream,
                          std::uint64_t index) noexcept {
  return splitmix64(splitmix64(splitmix64(root) ^ stream) + index);
}

std::vector<double> Rng::unit_vector(std::size_t n) {
  std::vector<double> v(n);
  if (n == 0) return v;
  double norm2 = 0.0;
  // A Gaussian draw of exactly zero norm has probability zero; retry anyway.
  while (norm2 == 0.0) {
    fill_gaussian(v);
    norm2 = 0.0;
    for (double x : v) norm2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

}  // namespace nsp
