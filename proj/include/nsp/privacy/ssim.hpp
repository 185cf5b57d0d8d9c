#pragma once

#include "nsp/privacy/image.hpp"

namespace nsp {

struct SsimParams {
  std::size_t window = 8;  // uniform window, stride 1
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
};

/// Mean SSIM over all window positions and channels, dynamic range 1,
/// population (biased) variances. Throws ShapeError on shape mismatch or
/// images smaller than the window.
double ssim(const Image& a, const Image& b, const SsimParams& params = {});

}  // namespace nsp
