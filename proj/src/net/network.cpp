#include "nsp/net/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "nsp/error.hpp"
#include "nsp/io/nspw.hpp"
#include "nsp/layer/equivalent.hpp"
#include "nsp/linalg/vector_ops.hpp"
#include "nsp/rng.hpp"

namespace nsp {
namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::string layer_label(std::size_t index) { return "layer " + std::to_string(index + 1); }

TensorShape pool_output(const PoolLayer& p, const TensorShape& in, std::size_t index) {
  if (p.window == 0 || p.stride == 0) {
    throw ShapeError(layer_label(index) + ": pool window and stride must be >= 1");
  }
  if (in.height < p.window || in.width < p.window) {
    throw ShapeError(layer_label(index) + ": pool window " + std::to_string(p.window) +
                     " exceeds feature map " + std::to_string(in.height) + "x" + std::to_string(in.width));
  }
  return {in.channels, (in.height - p.window) / p.stride + 1, (in.width - p.window) / p.stride + 1};
}

// Shape after one layer; checks that the layer accepts `in`.
TensorShape next_shape(const NetLayer& layer, const TensorShape& in, std::size_t index) {
  return std::visit(
      Overloaded{
          [&](const ConvLayerSpec& c) {
            c.validate();
            if (c.input_shape() != in) {
              throw ShapeError(layer_label(index) + ": conv expects input " +
                               std::to_string(c.in_channels) + "x" + std::to_string(c.in_height) + "x" +
                               std::to_string(c.in_width) + ", previous layer gives " +
                               std::to_string(in.channels) + "x" + std::to_string(in.height) + "x" +
                               std::to_string(in.width));
            }
            return c.output_shape();
          },
          [&](const FcLayerSpec& f) {
            f.validate();
            if (!in.is_flat()) throw ShapeError(layer_label(index) + ": fc needs a flat input; add a flatten layer");
            if (f.in_features != in.size()) {
              throw ShapeError(layer_label(index) + ": fc expects " + std::to_string(f.in_features) +
                               " inputs, previous layer gives " + std::to_string(in.size()));
            }
            return f.output_shape();
          },
          [&](const ReluLayer&) { return in; },
          [&](const PoolLayer& p) { return pool_output(p, in, index); },
          [&](const FlattenLayer&) { return TensorShape{in.size(), 1, 1}; },
      },
      layer);
}

std::vector<double> relu(std::span<const double> z) {
  std::vector<double> out(z.begin(), z.end());
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  return out;
}

std::vector<double> pool(const PoolLayer& p, const TensorShape& in, std::span<const double> z) {
  const TensorShape out = pool_output(p, in, 0);
  std::vector<double> result(out.size());
  const double inv_area = 1.0 / static_cast<double>(p.window * p.window);
  for (std::size_t c = 0; c < out.channels; ++c) {
    const double* plane = z.data() + c * in.height * in.width;
    for (std::size_t oy = 0; oy < out.height; ++oy) {
      for (std::size_t ox = 0; ox < out.width; ++ox) {
        double acc = p.kind == PoolKind::average ? 0.0 : -INFINITY;
        for (std::size_t dy = 0; dy < p.window; ++dy) {
          const double* row = plane + (oy * p.stride + dy) * in.width + ox * p.stride;
          for (std::size_t dx = 0; dx < p.window; ++dx) {
            acc = p.kind == PoolKind::average ? acc + row[dx] : std::max(acc, row[dx]);
          }
        }
        result[(c * out.height + oy) * out.width + ox] = p.kind == PoolKind::average ? acc * inv_area : acc;
      }
    }
  }
  return result;
}

std::vector<double> apply(const NetLayer& layer, const TensorShape& in, std::span<const double> z) {
  return std::visit(Overloaded{
                        [&](const ConvLayerSpec& c) { return conv_forward(c, z); },
                        [&](const FcLayerSpec& f) { return fc_forward(f, z); },
                        [&](const ReluLayer&) { return relu(z); },
                        [&](const PoolLayer& p) { return pool(p, in, z); },
                        [&](const FlattenLayer&) { return std::vector<double>(z.begin(), z.end()); },
                    },
                    layer);
}

bool is_linear(const NetLayer& layer) {
  return std::holds_alternative<ConvLayerSpec>(layer) || std::holds_alternative<FcLayerSpec>(layer);
}

}  // namespace

Network::Network(TensorShape input_shape, std::vector<NetLayer> layers) : layers_(std::move(layers)) {
  if (input_shape.size() == 0) throw ShapeError("network input shape must be non-empty");
  shapes_.push_back(input_shape);
  for (std::size_t i = 0; i < layers_.size(); ++i) shapes_.push_back(next_shape(layers_[i], shapes_.back(), i));
  if (std::none_of(layers_.begin(), layers_.end(), is_linear)) {
    throw ShapeError("network needs at least one conv or fc layer");
  }
}

LayerSpec Network::linear_layer_reading(std::size_t l) const {
  if (l >= layers_.size()) {
    throw ShapeError("no layer reads z^(" + std::to_string(l) + "); network depth is " +
                     std::to_string(layers_.size()));
  }
  if (const auto* c = std::get_if<ConvLayerSpec>(&layers_[l])) return *c;
  if (const auto* f = std::get_if<FcLayerSpec>(&layers_[l])) return *f;
  throw ShapeError(layer_label(l) + " is not linear (conv or fc)");
}

std::vector<std::size_t> Network::linear_feature_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (is_linear(layers_[i])) out.push_back(i);
  }
  return out;
}

namespace {

// Instantiates one template against its input shape.
NetLayer instantiate(const LayerTemplate& t, const TensorShape& in, std::uint64_t seed, std::size_t index) {
  return std::visit(Overloaded{
                        [&](const ConvTemplate& c) -> NetLayer {
                          ConvLayerSpec s;
                          s.in_channels = in.channels;
                          s.in_height = in.height;
                          s.in_width = in.width;
                          s.out_channels = c.out_channels;
                          s.kernel_h = c.kernel_h;
                          s.kernel_w = c.kernel_w;
                          s.stride = c.stride;
                          s.zero_padding = c.zero_padding;
                          try {
                            return with_random_kernels(std::move(s), seed, c.bias);
                          } catch (const ShapeError& e) {
                            throw ShapeError(layer_label(index) + ": " + e.what());
                          }
                        },
                        [&](const FcTemplate& f) -> NetLayer {
                          if (!in.is_flat()) {
                            throw ShapeError(layer_label(index) + ": fc needs a flat input; add a flatten layer");
                          }
                          if (f.out_features == 0) throw ShapeError(layer_label(index) + ": out_features must be >= 1");
                          return random_fc_spec(in.size(), f.out_features, seed, f.bias);
                        },
                        [&](const ReluLayer& r) -> NetLayer { return r; },
                        [&](const PoolLayer& p) -> NetLayer { return p; },
                        [&](const FlattenLayer& f) -> NetLayer { return f; },
                    },
                    t);
}

}  // namespace

void validate(const NetworkSpec& spec) { (void)init_network(spec, 0); }

Network init_network(const NetworkSpec& spec, std::uint64_t seed) {
  std::vector<NetLayer> layers;
  TensorShape shape = spec.input_shape;
  if (shape.size() == 0) throw ShapeError("network input shape must be non-empty");
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    layers.push_back(instantiate(spec.layers[i], shape, derive_seed(seed, streams::kWeights, i), i));
    shape = next_shape(layers.back(), shape, i);
  }
  return Network(spec.input_shape, std::move(layers));
}

FeatureTrace forward(const Network& net, std::span<const double> x) {
  if (x.size() != net.input_shape().size()) {
    throw ShapeError("forward: input has " + std::to_string(x.size()) + " values, network expects " +
                     std::to_string(net.input_shape().size()));
  }
  FeatureTrace trace;
  trace.activations.reserve(net.depth() + 1);
  trace.activations.emplace_back(x.begin(), x.end());
  for (std::size_t i = 0; i < net.depth(); ++i) {
    trace.activations.push_back(apply(net.layers()[i], net.shape(i), trace.activations.back()));
  }
  return trace;
}

std::vector<double> forward_from_layer(const Network& net, std::size_t l, std::span<const double> z) {
  if (l > net.depth()) {
    throw ShapeError("forward_from_layer: index " + std::to_string(l) + " exceeds depth " +
                     std::to_string(net.depth()));
  }
  if (z.size() != net.shape(l).size()) {
    throw ShapeError("forward_from_layer: z^(" + std::to_string(l) + ") has " + std::to_string(z.size()) +
                     " values, expected " + std::to_string(net.shape(l).size()));
  }
  std::vector<double> cur(z.begin(), z.end());
  for (std::size_t i = l; i < net.depth(); ++i) cur = apply(net.layers()[i], net.shape(i), cur);
  return cur;
}

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw ShapeError("argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

void RmseReport::append(const RmseReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

RmseReport rmse_report(const Network& net, const std::vector<std::vector<double>>& inputs,
                       std::span<const double> delta, std::span<const double> scales,
                       std::size_t inject_layer, const std::string& kind) {
  if (inject_layer > net.depth()) throw ShapeError("rmse_report: injection index beyond network depth");
  if (delta.size() != net.shape(inject_layer).size()) {
    throw ShapeError("rmse_report: perturbation has " + std::to_string(delta.size()) +
                     " values, z^(" + std::to_string(inject_layer) + ") has " +
                     std::to_string(net.shape(inject_layer).size()));
  }
  if (inputs.empty()) throw Error("rmse_report: no inputs");
  struct Clean {
    std::vector<double> z;
    std::vector<double> logits;
  };
  std::vector<Clean> clean;
  clean.reserve(inputs.size());
  for (const auto& x : inputs) {
    FeatureTrace t = forward(net, x);
    clean.push_back({std::move(t.activations[inject_layer]), std::move(t.activations.back())});
  }
  const double root_n = std::sqrt(static_cast<double>(net.output_shape().size()));
  RmseReport report;
  for (double s : scales) {
    double total = 0.0;
    for (const Clean& c : clean) {
      const auto logits = forward_from_layer(net, inject_layer, add_scaled(c.z, s, delta));
      total += norm2(subtract(logits, c.logits)) / root_n;
    }
    report.rows.push_back({kind, s, total / static_cast<double>(clean.size())});
  }
  return report;
}

NetworkSpec desk_network_spec() {
  NetworkSpec s;
  s.input_shape = {3, 32, 32};
  s.layers = {
      ConvTemplate{10, 7, 7, 2, 3, true},
      ReluLayer{},
      ConvTemplate{8, 3, 3, 2, 1, true},
      ReluLayer{},
      PoolLayer{PoolKind::average, 2, 2},
      FlattenLayer{},
      FcTemplate{128, true},
      ReluLayer{},
      FcTemplate{10, true},
  };
  return s;
}

// ---- JSON ------------------------------------------------------------------

namespace {

std::size_t count_at(const json& doc, const char* name, std::size_t index) {
  if (!doc.contains(name)) {
    throw FormatError(layer_label(index) + ": missing field '" + name + "'");
  }
  const json& v = doc.at(name);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw FormatError(layer_label(index) + ": field '" + name + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

bool flag_at(const json& doc, const char* name) {
  if (!doc.contains(name)) return false;
  if (!doc.at(name).is_boolean()) throw FormatError(std::string("field '") + name + "' must be true or false");
  return doc.at(name).get<bool>();
}

}  // namespace

json to_json(const NetworkSpec& spec) {
  json layers = json::array();
  for (const LayerTemplate& t : spec.layers) {
    layers.push_back(std::visit(
        Overloaded{
            [](const ConvTemplate& c) {
              return json{{"kind", "conv"},         {"out_channels", c.out_channels},
                          {"kernel_h", c.kernel_h}, {"kernel_w", c.kernel_w},
                          {"stride", c.stride},     {"zero_padding", c.zero_padding},
                          {"bias", c.bias}};
            },
            [](const FcTemplate& f) { return json{{"kind", "fc"}, {"out_features", f.out_features}, {"bias", f.bias}}; },
            [](const ReluLayer&) { return json{{"kind", "relu"}}; },
            [](const PoolLayer& p) {
              return json{{"kind", p.kind == PoolKind::average ? "avgpool" : "maxpool"},
                          {"window", p.window},
                          {"stride", p.stride}};
            },
            [](const FlattenLayer&) { return json{{"kind", "flatten"}}; },
        },
        t));
  }
  return json{{"input_shape", {spec.input_shape.channels, spec.input_shape.height, spec.input_shape.width}},
              {"layers", std::move(layers)}};
}

NetworkSpec network_spec_from_json(const json& doc) {
  if (!doc.is_object()) throw FormatError("network: document must be a JSON object");
  if (!doc.contains("input_shape") || !doc.at("input_shape").is_array() || doc.at("input_shape").size() != 3) {
    throw FormatError("network: 'input_shape' must be [channels, height, width]");
  }
  NetworkSpec spec;
  const json& shape = doc.at("input_shape");
  for (const json& v : shape) {
    if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) {
      throw FormatError("network: 'input_shape' entries must be positive integers");
    }
  }
  spec.input_shape = {shape[0].get<std::size_t>(), shape[1].get<std::size_t>(), shape[2].get<std::size_t>()};
  if (!doc.contains("layers") || !doc.at("layers").is_array()) throw FormatError("network: missing 'layers' array");
  const json& layers = doc.at("layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const json& l = layers[i];
    if (!l.is_object() || !l.contains("kind") || !l.at("kind").is_string()) {
      throw FormatError(layer_label(i) + ": missing string field 'kind'");
    }
    const std::string kind = l.at("kind").get<std::string>();
    if (kind == "conv") {
      ConvTemplate c;
      c.out_channels = count_at(l, "out_channels", i);
      c.kernel_h = count_at(l, "kernel_h", i);
      c.kernel_w = count_at(l, "kernel_w", i);
      c.stride = l.contains("stride") ? count_at(l, "stride", i) : 1;
      c.zero_padding = l.contains("zero_padding") ? count_at(l, "zero_padding", i) : 0;
      c.bias = flag_at(l, "bias");
      spec.layers.emplace_back(c);
    } else if (kind == "fc") {
      spec.layers.emplace_back(FcTemplate{count_at(l, "out_features", i), flag_at(l, "bias")});
    } else if (kind == "relu") {
      spec.layers.emplace_back(ReluLayer{});
    } else if (kind == "avgpool" || kind == "maxpool") {
      PoolLayer p;
      p.kind = kind == "avgpool" ? PoolKind::average : PoolKind::max;
      p.window = count_at(l, "window", i);
      p.stride = l.contains("stride") ? count_at(l, "stride", i) : p.window;
      spec.layers.emplace_back(p);
    } else if (kind == "flatten") {
      spec.layers.emplace_back(FlattenLayer{});
    } else {
      throw FormatError(layer_label(i) + ": unknown kind '" + kind + "'");
    }
  }
  validate(spec);
  return spec;
}

NetworkSpec load_network_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open network file " + path.string());
  try {
    return network_spec_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw FormatError("network file " + path.string() + ": " + e.what());
  }
}

// ---- NSPW weights ----------------------------------------------------------

void save_weights(const std::filesystem::path& path, const Network& net) {
  std::vector<io::Tensor> tensors;
  for (std::size_t i = 0; i < net.depth(); ++i) {
    const std::string prefix = "layer" + std::to_string(i + 1);
    if (const auto* c = std::get_if<ConvLayerSpec>(&net.layers()[i])) {
      tensors.push_back({prefix + ".kernels", {c->out_channels, c->in_channels, c->kernel_h, c->kernel_w}, c->kernels});
      if (c->bias) tensors.push_back({prefix + ".bias", {c->out_channels}, *c->bias});
    } else if (const auto* f = std::get_if<FcLayerSpec>(&net.layers()[i])) {
      const auto w = f->weight.data();
      tensors.push_back({prefix + ".weight", {f->in_features, f->out_features}, {w.begin(), w.end()}});
      if (f->bias) tensors.push_back({prefix + ".bias", {f->out_features}, *f->bias});
    }
  }
  io::write_nspw(path, tensors);
}

Network load_weights(const std::filesystem::path& path, const NetworkSpec& spec) {
  const std::vector<io::Tensor> tensors = io::read_nspw(path);
  Network shaped = init_network(spec, 0);
  std::vector<NetLayer> layers = shaped.layers();
  auto take = [&](const std::string& name, std::size_t expected) -> std::vector<double> {
    const io::Tensor& t = io::find_tensor(tensors, name);
    if (t.data.size() != expected) {
      throw FormatError("tensor '" + name + "' has " + std::to_string(t.data.size()) + " values, expected " +
                        std::to_string(expected));
    }
    return t.data;
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string prefix = "layer" + std::to_string(i + 1);
    if (auto* c = std::get_if<ConvLayerSpec>(&layers[i])) {
      c->kernels = take(prefix + ".kernels", c->kernels.size());
      if (c->bias) c->bias = take(prefix + ".bias", c->out_channels);
    } else if (auto* f = std::get_if<FcLayerSpec>(&layers[i])) {
      f->weight = DenseMatrix(f->in_features, f->out_features, take(prefix + ".weight", f->in_features * f->out_features));
      if (f->bias) f->bias = take(prefix + ".bias", f->out_features);
    }
  }
  return Network(spec.input_shape, std::move(layers));
}

}  // namespace nsp
