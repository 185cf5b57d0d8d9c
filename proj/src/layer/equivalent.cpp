#include "nsp/layer/equivalent.hpp"

#include <algorithm>
#include <cmath>

#include "nsp/error.hpp"
#include "nsp/rng.hpp"
#include "nsp/simd/kernels.hpp"

namespace nsp {

const char* layer_kind_name(LayerKind kind) noexcept {
  return kind == LayerKind::conv ? "conv" : "fc";
}

EquivalentMatrix build_conv_equivalent(const ConvLayerSpec& spec) {
  spec.validate();
  const TensorShape in = spec.input_shape();
  const TensorShape out = spec.output_shape();
  if (in.size() > UINT32_MAX) throw ShapeError("build_conv_equivalent: input too large");

  const auto pad = static_cast<std::ptrdiff_t>(spec.zero_padding);
  const auto stride = static_cast<std::ptrdiff_t>(spec.stride);
  const auto in_h = static_cast<std::ptrdiff_t>(spec.in_height);
  const auto in_w = static_cast<std::ptrdiff_t>(spec.in_width);

  SparseMatrix a(out.size(), in.size());
  std::vector<SparseMatrix::Entry> row;
  row.reserve(spec.in_channels * spec.kernel_h * spec.kernel_w);
  for (std::size_t j = 0; j < spec.out_channels; ++j) {
    for (std::size_t oy = 0; oy < out.height; ++oy) {
      for (std::size_t ox = 0; ox < out.width; ++ox) {
        row.clear();
        const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(oy) * stride - pad;
        const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(ox) * stride - pad;
        for (std::size_t c = 0; c < spec.in_channels; ++c) {
          for (std::size_t ky = 0; ky < spec.kernel_h; ++ky) {
            const std::ptrdiff_t y = y0 + static_cast<std::ptrdiff_t>(ky);
            if (y < 0 || y >= in_h) continue;
            for (std::size_t kx = 0; kx < spec.kernel_w; ++kx) {
              const std::ptrdiff_t x = x0 + static_cast<std::ptrdiff_t>(kx);
              if (x < 0 || x >= in_w) continue;
              const std::size_t col = (c * spec.in_height + static_cast<std::size_t>(y)) * spec.in_width +
                                      static_cast<std::size_t>(x);
              row.push_back({static_cast<std::uint32_t>(col), spec.kernel(j, c, ky, kx)});
            }
          }
        }
        a.push_row(row);
      }
    }
  }
  return {std::move(a), LayerKind::conv, in, out};
}

EquivalentMatrix build_fc_equivalent(const FcLayerSpec& spec) {
  spec.validate();
  if (spec.in_features > UINT32_MAX) throw ShapeError("build_fc_equivalent: input too large");
  SparseMatrix a(spec.out_features, spec.in_features);
  std::vector<SparseMatrix::Entry> row;
  row.reserve(spec.in_features);
  for (std::size_t o = 0; o < spec.out_features; ++o) {
    row.clear();
    for (std::size_t i = 0; i < spec.in_features; ++i) {
      row.push_back({static_cast<std::uint32_t>(i), spec.weight(i, o)});
    }
    a.push_row(row);
  }
  return {std::move(a), LayerKind::fc, spec.input_shape(), spec.output_shape()};
}

EquivalentMatrix build_equivalent(const LayerSpec& spec) {
  if (const auto* conv = std::get_if<ConvLayerSpec>(&spec)) return build_conv_equivalent(*conv);
  return build_fc_equivalent(std::get<FcLayerSpec>(spec));
}

std::vector<double> conv_forward(const ConvLayerSpec& spec, std::span<const double> input,
                                 bool include_bias) {
  const TensorShape in = spec.input_shape();
  if (input.size() != in.size()) {
    throw ShapeError("conv_forward: input has " + std::to_string(input.size()) +
                     " values, expected " + std::to_string(in.size()));
  }
  const std::size_t out_h = spec.out_height();
  const std::size_t out_w = spec.out_width();
  const auto pad = static_cast<std::ptrdiff_t>(spec.zero_padding);
  const auto stride = static_cast<std::ptrdiff_t>(spec.stride);
  const auto in_h = static_cast<std::ptrdiff_t>(spec.in_height);
  const auto in_w = static_cast<std::ptrdiff_t>(spec.in_width);
  const auto& axpy_strided = simd::active().axpy_strided;

  std::vector<double> out(spec.out_channels * out_h * out_w, 0.0);
  for (std::size_t j = 0; j < spec.out_channels; ++j) {
    double* plane = out.data() + j * out_h * out_w;
    for (std::size_t c = 0; c < spec.in_channels; ++c) {
      const double* channel = input.data() + c * spec.in_height * spec.in_width;
      for (std::size_t ky = 0; ky < spec.kernel_h; ++ky) {
        for (std::size_t kx = 0; kx < spec.kernel_w; ++kx) {
          const double k = spec.kernel(j, c, ky, kx);
          if (k == 0.0) continue;
          const auto dx = static_cast<std::ptrdiff_t>(kx) - pad;
          // Output columns whose input column x = ox * stride + dx is in range.
          std::ptrdiff_t ox_lo = 0;
          if (dx < 0) ox_lo = (-dx + stride - 1) / stride;
          std::ptrdiff_t ox_hi = static_cast<std::ptrdiff_t>(out_w);  // exclusive
          if (in_w - 1 - dx < 0) {
            ox_hi = 0;
          } else {
            ox_hi = std::min(ox_hi, (in_w - 1 - dx) / stride + 1);
          }
          if (ox_lo >= ox_hi) continue;
          for (std::size_t oy = 0; oy < out_h; ++oy) {
            const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy) * stride - pad +
                                     static_cast<std::ptrdiff_t>(ky);
            if (y < 0 || y >= in_h) continue;
            const double* src = channel + y * in_w + ox_lo * stride + dx;
            axpy_strided(k, src, static_cast<std::size_t>(stride),
                         plane + oy * out_w + ox_lo, static_cast<std::size_t>(ox_hi - ox_lo));
          }
        }
      }
    }
    if (include_bias && spec.bias) {
      const double b = (*spec.bias)[j];
      for (std::size_t i = 0; i < out_h * out_w; ++i) plane[i] += b;
    }
  }
  return out;
}

std::vector<double> fc_forward(const FcLayerSpec& spec, std::span<const double> input,
                               bool include_bias) {
  if (input.size() != spec.in_features) {
    throw ShapeError("fc_forward: input has " + std::to_string(input.size()) +
                     " values, expected " + std::to_string(spec.in_features));
  }
  std::vector<double> out = spec.weight.multiply_transposed(input);
  if (include_bias && spec.bias) {
    for (std::size_t o = 0; o < out.size(); ++o) out[o] += (*spec.bias)[o];
  }
  return out;
}

std::vector<double> layer_forward(const LayerSpec& spec, std::span<const double> input,
                                  bool include_bias) {
  if (const auto* conv = std::get_if<ConvLayerSpec>(&spec)) {
    return conv_forward(*conv, input, include_bias);
  }
  return fc_forward(std::get<FcLayerSpec>(spec), input, include_bias);
}

double verify_equivalence(const EquivalentMatrix& eq, const LayerSpec& spec,
                          std::size_t samples, std::uint64_t seed) {
  if (eq.input_shape != input_shape(spec) || eq.output_shape != output_shape(spec)) {
    throw ShapeError("verify_equivalence: matrix shapes do not match the layer spec");
  }
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    Rng rng(derive_seed(seed, streams::kInputs, s));
    const std::vector<double> x = rng.gaussian_vector(eq.input_shape.size());
    const std::vector<double> via_matrix = eq.matrix.multiply(x);
    const std::vector<double> direct = layer_forward(spec, x, false);
    worst = std::max(worst, simd::max_abs_diff(via_matrix, direct));
  }
  return worst;
}

namespace {

// Every input position along the axis is read by some window, and no window
// reads padding only.
bool axis_fully_covered(std::size_t in, std::size_t kernel, std::size_t stride,
                        std::size_t padding, std::size_t out) {
  const std::size_t last = (out - 1) * stride + kernel;  // padded coordinates
  return last >= in + padding && padding < kernel;
}

}  // namespace

DimensionPrediction predict_nullspace_dim(const LayerSpec& spec) {
  validate(spec);
  DimensionPrediction p;
  p.input_dim = input_shape(spec).size();
  p.output_dim = output_shape(spec).size();
  p.dim = p.input_dim > p.output_dim ? p.input_dim - p.output_dim : 0;
  if (const auto* conv = std::get_if<ConvLayerSpec>(&spec)) {
    if (conv->kernel_h < conv->stride || conv->kernel_w < conv->stride) {
      p.guaranteed = false;
      p.reason = "kernel smaller than stride";
    } else if (!axis_fully_covered(conv->in_height, conv->kernel_h, conv->stride,
                                   conv->zero_padding, conv->out_height()) ||
               !axis_fully_covered(conv->in_width, conv->kernel_w, conv->stride,
                                   conv->zero_padding, conv->out_width())) {
      p.guaranteed = false;
      p.reason = "input rows or columns outside every receptive field";
    }
  }
  return p;
}

}  // namespace nsp
