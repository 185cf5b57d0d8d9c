#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsp/layer/layer_spec.hpp"
#include "nsp/linalg/sparse_matrix.hpp"

namespace nsp {

enum class LayerKind { conv, fc };

const char* layer_kind_name(LayerKind kind) noexcept;

/// A with A * vec(z_in) = vec(layer(z_in)) for the bias-free part of a layer.
/// Inputs and outputs are flattened channel, then row, then column.
struct EquivalentMatrix {
  SparseMatrix matrix;
  LayerKind layer_kind = LayerKind::fc;
  TensorShape input_shape;
  TensorShape output_shape;
};

/// Row j * H_out * W_out + i holds kernel j at receptive-field position i;
/// padded positions get no entry.
EquivalentMatrix build_conv_equivalent(const ConvLayerSpec& spec);

/// A = W^T.
EquivalentMatrix build_fc_equivalent(const FcLayerSpec& spec);

EquivalentMatrix build_equivalent(const LayerSpec& spec);

/// Sliding-window convolution. Adds the bias only when include_bias is set.
std::vector<double> conv_forward(const ConvLayerSpec& spec, std::span<const double> input,
                                 bool include_bias = true);

/// W^T x (+ b).
std::vector<double> fc_forward(const FcLayerSpec& spec, std::span<const double> input,
                               bool include_bias = true);

std::vector<double> layer_forward(const LayerSpec& spec, std::span<const double> input,
                                  bool include_bias = true);

/// Max |A x - layer(x)| over `samples` seeded Gaussian inputs, bias suppressed.
double verify_equivalence(const EquivalentMatrix& eq, const LayerSpec& spec,
                          std::size_t samples, std::uint64_t seed);

struct DimensionPrediction {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::size_t dim = 0;  // max(0, input_dim - output_dim)
  bool guaranteed = true;
  std::string reason;  // empty when guaranteed
};

/// Dimension from geometry alone. Marked unguaranteed when a kernel extent is
/// smaller than the stride or some input rows/columns fall outside every
/// receptive field; callers should then rely on the numerical nullity.
DimensionPrediction predict_nullspace_dim(const LayerSpec& spec);

}  // namespace nsp
