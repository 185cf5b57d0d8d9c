#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nsp/layer/layer_spec.hpp"

namespace nsp {

struct ReluLayer {
  friend bool operator==(const ReluLayer&, const ReluLayer&) = default;
};

enum class PoolKind { average, max };

/// Unpadded pooling, applied per channel.
struct PoolLayer {
  PoolKind kind = PoolKind::average;
  std::size_t window = 2;
  std::size_t stride = 2;
  friend bool operator==(const PoolLayer&, const PoolLayer&) = default;
};

struct FlattenLayer {
  friend bool operator==(const FlattenLayer&, const FlattenLayer&) = default;
};

/// Architecture-only descriptions; input sizes follow from the previous layer.
struct ConvTemplate {
  std::size_t out_channels = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
  std::size_t zero_padding = 0;
  bool bias = false;
  friend bool operator==(const ConvTemplate&, const ConvTemplate&) = default;
};

struct FcTemplate {
  std::size_t out_features = 0;
  bool bias = false;
  friend bool operator==(const FcTemplate&, const FcTemplate&) = default;
};

using LayerTemplate = std::variant<ConvTemplate, FcTemplate, ReluLayer, PoolLayer, FlattenLayer>;

struct NetworkSpec {
  TensorShape input_shape;
  std::vector<LayerTemplate> layers;
  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

using NetLayer = std::variant<ConvLayerSpec, FcLayerSpec, ReluLayer, PoolLayer, FlattenLayer>;

/// Layers are numbered 1..L; z^(0) is the input and z^(l) the output of layer
/// l, so layers[l] maps z^(l) to z^(l+1).
class Network {
 public:
  /// Validates the shape chain; throws ShapeError on the first mismatch.
  Network(TensorShape input_shape, std::vector<NetLayer> layers);

  std::size_t depth() const noexcept { return layers_.size(); }
  const std::vector<NetLayer>& layers() const noexcept { return layers_; }
  /// Shape of z^(l), l = 0..depth().
  const TensorShape& shape(std::size_t l) const { return shapes_.at(l); }
  const TensorShape& input_shape() const noexcept { return shapes_.front(); }
  const TensorShape& output_shape() const noexcept { return shapes_.back(); }

  /// The linear layer reading z^(l). Throws if layers[l] is not conv or fc.
  LayerSpec linear_layer_reading(std::size_t l) const;
  /// Indices l such that layers[l] is conv or fc, in order.
  std::vector<std::size_t> linear_feature_indices() const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::vector<NetLayer> layers_;
  std::vector<TensorShape> shapes_;
};

/// Throws ShapeError on an invalid chain or when no linear layer is present.
void validate(const NetworkSpec& spec);

/// Weights ~ N(0, 1/fan_in) and biases ~ N(0, 0.01), seeded per layer.
Network init_network(const NetworkSpec& spec, std::uint64_t seed);

struct FeatureTrace {
  std::vector<std::vector<double>> activations;  // z^(0) .. z^(L)
  const std::vector<double>& logits() const { return activations.back(); }
};

FeatureTrace forward(const Network& net, std::span<const double> x);

/// Applies layers l+1..L to z = z^(l).
std::vector<double> forward_from_layer(const Network& net, std::size_t l, std::span<const double> z);

std::size_t argmax(std::span<const double> v);

struct RmseRow {
  std::string kind;
  double scale = 0.0;
  double rmse = 0.0;
};

struct RmseReport {
  std::vector<RmseRow> rows;
  void append(const RmseReport& other);
};

/// For each scale s: mean over inputs of ||f(z + s delta) - f(z)||_2 / sqrt(n_out),
/// with z = z^(inject_layer) of each input.
RmseReport rmse_report(const Network& net, const std::vector<std::vector<double>>& inputs,
                       std::span<const double> delta, std::span<const double> scales,
                       std::size_t inject_layer, const std::string& kind);

/// 3x32x32 -> conv 10@7x7/2 pad 3 -> relu -> conv 8@3x3/2 pad 1 -> relu ->
/// avgpool 2/2 -> flatten -> fc 128 -> relu -> fc 10, all with biases.
NetworkSpec desk_network_spec();

nlohmann::json to_json(const NetworkSpec& spec);
NetworkSpec network_spec_from_json(const nlohmann::json& doc);
NetworkSpec load_network_spec(const std::filesystem::path& path);

/// Writes the trained-or-random parameters as an NSPW blob, one tensor per
/// weight or bias, named "layer<i>.kernels", "layer<i>.weight", "layer<i>.bias".
void save_weights(const std::filesystem::path& path, const Network& net);
/// Rebuilds a network from its spec and a blob written by save_weights.
Network load_weights(const std::filesystem::path& path, const NetworkSpec& spec);

}  // namespace nsp
