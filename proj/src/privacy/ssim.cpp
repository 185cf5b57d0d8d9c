#include "nsp/privacy/ssim.hpp"

#include <string>

#include "nsp/error.hpp"

namespace nsp {
namespace {

// (h + 1) x (w + 1) summed-area table of f(a, b) over one channel.
template <class F>
std::vector<double> summed_area(const double* a, const double* b, std::size_t h, std::size_t w, F f) {
  std::vector<double> t((h + 1) * (w + 1), 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    double row = 0.0;
    for (std::size_t x = 0; x < w; ++x) {
      row += f(a[y * w + x], b[y * w + x]);
      t[(y + 1) * (w + 1) + x + 1] = t[y * (w + 1) + x + 1] + row;
    }
  }
  return t;
}

double window_sum(const std::vector<double>& t, std::size_t w, std::size_t y, std::size_t x, std::size_t k) {
  const std::size_t s = w + 1;
  return t[(y + k) * s + x + k] - t[y * s + x + k] - t[(y + k) * s + x] + t[y * s + x];
}

}  // namespace

double ssim(const Image& a, const Image& b, const SsimParams& p) {
  if (a.shape != b.shape) throw ShapeError("ssim: images have different shapes");
  const std::size_t h = a.shape.height;
  const std::size_t w = a.shape.width;
  const std::size_t k = p.window;
  if (k == 0 || h < k || w < k || a.shape.channels == 0) {
    throw ShapeError("ssim: image " + std::to_string(h) + "x" + std::to_string(w) + " is smaller than the " +
                     std::to_string(k) + "x" + std::to_string(k) + " window");
  }
  const double inv_area = 1.0 / static_cast<double>(k * k);
  double total = 0.0;
  for (std::size_t c = 0; c < a.shape.channels; ++c) {
    const double* pa = a.pixels.data() + c * h * w;
    const double* pb = b.pixels.data() + c * h * w;
    const auto sa = summed_area(pa, pb, h, w, [](double u, double) { return u; });
    const auto sb = summed_area(pa, pb, h, w, [](double, double v) { return v; });
    const auto saa = summed_area(pa, pb, h, w, [](double u, double) { return u * u; });
    const auto sbb = summed_area(pa, pb, h, w, [](double, double v) { return v * v; });
    const auto sab = summed_area(pa, pb, h, w, [](double u, double v) { return u * v; });
    for (std::size_t y = 0; y + k <= h; ++y) {
      for (std::size_t x = 0; x + k <= w; ++x) {
        const double mu_a = window_sum(sa, w, y, x, k) * inv_area;
        const double mu_b = window_sum(sb, w, y, x, k) * inv_area;
        const double var_a = window_sum(saa, w, y, x, k) * inv_area - mu_a * mu_a;
        const double var_b = window_sum(sbb, w, y, x, k) * inv_area - mu_b * mu_b;
        const double cov = window_sum(sab, w, y, x, k) * inv_area - mu_a * mu_b;
        const double num = (2.0 * (mu_a * mu_b) + p.c1) * (2.0 * cov + p.c2);
        const double den = (mu_a * mu_a + mu_b * mu_b + p.c1) * (var_a + var_b + p.c2);
        total += num / den;
      }
    }
  }
  const double windows = static_cast<double>(a.shape.channels * (h - k + 1) * (w - k + 1));
  return total / windows;
}

}  // namespace nsp
