#include "nsp/layer/layer_spec.hpp"

#include <cmath>
#include <string>

#include "nsp/error.hpp"
#include "nsp/linalg/vector_ops.hpp"
#include "nsp/rng.hpp"

namespace nsp {
namespace {

std::size_t output_extent(std::size_t in, std::size_t kernel, std::size_t padding,
                          std::size_t stride, const char* name) {
  if (stride == 0) throw ShapeError("ConvLayerSpec: stride must be >= 1");
  if (kernel == 0) throw ShapeError(std::string("ConvLayerSpec: ") + name + " kernel extent must be >= 1");
  const std::size_t padded = in + 2 * padding;
  if (padded < kernel) {
    throw ShapeError(std::string("ConvLayerSpec: ") + name + " kernel extent " +
                     std::to_string(kernel) + " exceeds padded input extent " +
                     std::to_string(padded));
  }
  return (padded - kernel) / stride + 1;
}

}  // namespace

std::size_t ConvLayerSpec::out_height() const {
  return output_extent(in_height, kernel_h, zero_padding, stride, "height");
}

std::size_t ConvLayerSpec::out_width() const {
  return output_extent(in_width, kernel_w, zero_padding, stride, "width");
}

void ConvLayerSpec::validate() const {
  if (in_channels == 0) throw ShapeError("ConvLayerSpec: in_channels must be >= 1");
  if (in_height == 0) throw ShapeError("ConvLayerSpec: in_height must be >= 1");
  if (in_width == 0) throw ShapeError("ConvLayerSpec: in_width must be >= 1");
  if (out_channels == 0) throw ShapeError("ConvLayerSpec: out_channels must be >= 1");
  (void)out_height();
  (void)out_width();
  const std::size_t expected = out_channels * in_channels * kernel_h * kernel_w;
  if (kernels.size() != expected) {
    throw ShapeError("ConvLayerSpec: kernels holds " + std::to_string(kernels.size()) +
                     " values, expected out_channels*in_channels*kernel_h*kernel_w = " +
                     std::to_string(expected));
  }
  if (!all_finite(kernels)) throw ShapeError("ConvLayerSpec: kernels contain non-finite values");
  if (bias) {
    if (bias->size() != out_channels) {
      throw ShapeError("ConvLayerSpec: bias has " + std::to_string(bias->size()) +
                       " entries, expected out_channels = " + std::to_string(out_channels));
    }
    if (!all_finite(*bias)) throw ShapeError("ConvLayerSpec: bias contains non-finite values");
  }
}

void FcLayerSpec::validate() const {
  if (in_features == 0) throw ShapeError("FcLayerSpec: in_features must be >= 1");
  if (out_features == 0) throw ShapeError("FcLayerSpec: out_features must be >= 1");
  if (weight.rows() != in_features || weight.cols() != out_features) {
    throw ShapeError("FcLayerSpec: weight is " + std::to_string(weight.rows()) + "x" +
                     std::to_string(weight.cols()) + ", expected in_features x out_features = " +
                     std::to_string(in_features) + "x" + std::to_string(out_features));
  }
  if (!weight.all_finite()) throw ShapeError("FcLayerSpec: weight contains non-finite values");
  if (bias) {
    if (bias->size() != out_features) {
      throw ShapeError("FcLayerSpec: bias has " + std::to_string(bias->size()) +
                       " entries, expected out_features = " + std::to_string(out_features));
    }
    if (!all_finite(*bias)) throw ShapeError("FcLayerSpec: bias contains non-finite values");
  }
}

TensorShape input_shape(const LayerSpec& spec) {
  return std::visit([](const auto& s) { return s.input_shape(); }, spec);
}

TensorShape output_shape(const LayerSpec& spec) {
  return std::visit([](const auto& s) { return s.output_shape(); }, spec);
}

void validate(const LayerSpec& spec) {
  std::visit([](const auto& s) { s.validate(); }, spec);
}

ConvLayerSpec with_random_kernels(ConvLayerSpec spec, std::uint64_t seed, bool with_bias) {
  const std::size_t fan_in = std::max<std::size_t>(spec.in_channels * spec.kernel_h * spec.kernel_w, 1);
  Rng rng(seed);
  spec.kernels = rng.gaussian_vector(spec.out_channels * fan_in,
                                     1.0 / std::sqrt(static_cast<double>(fan_in)));
  spec.bias.reset();
  if (with_bias) spec.bias = rng.gaussian_vector(spec.out_channels, 0.1);
  spec.validate();
  return spec;
}

ConvLayerSpec random_conv_spec(const ConvGeometry& g, std::uint64_t seed, bool with_bias) {
  ConvLayerSpec spec;
  spec.in_channels = g.in_channels;
  spec.in_height = g.in_height;
  spec.in_width = g.in_width;
  spec.out_channels = g.out_channels;
  spec.kernel_h = g.kernel;
  spec.kernel_w = g.kernel;
  spec.stride = g.stride;
  spec.zero_padding = g.padding;
  return with_random_kernels(std::move(spec), seed, with_bias);
}

FcLayerSpec random_fc_spec(std::size_t in_features, std::size_t out_features,
                           std::uint64_t seed, bool with_bias) {
  FcLayerSpec spec;
  spec.in_features = in_features;
  spec.out_features = out_features;
  Rng rng(seed);
  spec.weight = DenseMatrix(in_features, out_features,
                            rng.gaussian_vector(in_features * out_features,
                                                1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(in_features, 1)))));
  if (with_bias) spec.bias = rng.gaussian_vector(out_features, 0.1);
  spec.validate();
  return spec;
}

}  // namespace nsp
