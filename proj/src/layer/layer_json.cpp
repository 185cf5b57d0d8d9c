#include "nsp/layer/layer_json.hpp"

#include <fstream>
#include <string>

#include "nsp/error.hpp"

namespace nsp {
namespace {

using nlohmann::json;

std::size_t count_field(const json& doc, const char* name) {
  if (!doc.contains(name)) throw FormatError(std::string("layer: missing field '") + name + "'");
  const json& v = doc.at(name);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw FormatError(std::string("layer: field '") + name + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::size_t count_field_or(const json& doc, const char* name, std::size_t fallback) {
  return doc.contains(name) ? count_field(doc, name) : fallback;
}

double number(const json& v, const char* field) {
  if (!v.is_number()) throw FormatError(std::string("layer: '") + field + "' holds a non-number");
  return v.get<double>();
}

const json& array_of(const json& v, std::size_t size, const char* field) {
  if (!v.is_array() || v.size() != size) {
    throw ShapeError(std::string("layer: '") + field + "' must be an array of length " +
                     std::to_string(size));
  }
  return v;
}

std::optional<std::vector<double>> read_bias(const json& doc, std::size_t size) {
  if (!doc.contains("bias") || doc.at("bias").is_null()) return std::nullopt;
  const json& b = array_of(doc.at("bias"), size, "bias");
  std::vector<double> out;
  out.reserve(size);
  for (const json& v : b) out.push_back(number(v, "bias"));
  return out;
}

ConvLayerSpec conv_from_json(const json& doc, std::uint64_t seed) {
  ConvGeometry g;
  g.in_channels = count_field(doc, "in_channels");
  g.in_height = count_field(doc, "in_height");
  g.in_width = count_field(doc, "in_width");
  g.out_channels = count_field(doc, "out_channels");
  const std::size_t kh = count_field(doc, "kernel_h");
  const std::size_t kw = count_field(doc, "kernel_w");
  g.stride = count_field_or(doc, "stride", 1);
  g.padding = count_field_or(doc, "zero_padding", 0);

  ConvLayerSpec spec;
  spec.in_channels = g.in_channels;
  spec.in_height = g.in_height;
  spec.in_width = g.in_width;
  spec.out_channels = g.out_channels;
  spec.kernel_h = kh;
  spec.kernel_w = kw;
  spec.stride = g.stride;
  spec.zero_padding = g.padding;

  if (!doc.contains("kernels")) {
    spec = with_random_kernels(std::move(spec), seed);
  } else {
    spec.kernels.reserve(g.out_channels * g.in_channels * kh * kw);
    for (const json& per_out : array_of(doc.at("kernels"), g.out_channels, "kernels")) {
      for (const json& per_in : array_of(per_out, g.in_channels, "kernels[j]")) {
        for (const json& krow : array_of(per_in, kh, "kernels[j][c]")) {
          for (const json& v : array_of(krow, kw, "kernels[j][c][y]")) {
            spec.kernels.push_back(number(v, "kernels"));
          }
        }
      }
    }
  }
  spec.bias = read_bias(doc, g.out_channels);
  spec.validate();
  return spec;
}

FcLayerSpec fc_from_json(const json& doc, std::uint64_t seed) {
  const std::size_t n_in = count_field(doc, "in_features");
  const std::size_t n_out = count_field(doc, "out_features");
  FcLayerSpec spec;
  if (doc.contains("weight")) {
    spec.in_features = n_in;
    spec.out_features = n_out;
    std::vector<double> data;
    data.reserve(n_in * n_out);
    for (const json& row : array_of(doc.at("weight"), n_in, "weight")) {
      for (const json& v : array_of(row, n_out, "weight[i]")) data.push_back(number(v, "weight"));
    }
    spec.weight = DenseMatrix(n_in, n_out, std::move(data));
  } else {
    spec = random_fc_spec(n_in, n_out, seed);
  }
  spec.bias = read_bias(doc, n_out);
  spec.validate();
  return spec;
}

}  // namespace

json to_json(const ConvLayerSpec& spec) {
  json kernels = json::array();
  for (std::size_t j = 0; j < spec.out_channels; ++j) {
    json per_out = json::array();
    for (std::size_t c = 0; c < spec.in_channels; ++c) {
      json per_in = json::array();
      for (std::size_t y = 0; y < spec.kernel_h; ++y) {
        json row = json::array();
        for (std::size_t x = 0; x < spec.kernel_w; ++x) row.push_back(spec.kernel(j, c, y, x));
        per_in.push_back(std::move(row));
      }
      per_out.push_back(std::move(per_in));
    }
    kernels.push_back(std::move(per_out));
  }
  json doc = {{"kind", "conv"},
              {"in_channels", spec.in_channels},
              {"in_height", spec.in_height},
              {"in_width", spec.in_width},
              {"out_channels", spec.out_channels},
              {"kernel_h", spec.kernel_h},
              {"kernel_w", spec.kernel_w},
              {"stride", spec.stride},
              {"zero_padding", spec.zero_padding},
              {"kernels", std::move(kernels)}};
  if (spec.bias) doc["bias"] = *spec.bias;
  return doc;
}

json to_json(const FcLayerSpec& spec) {
  json weight = json::array();
  for (std::size_t i = 0; i < spec.in_features; ++i) {
    const auto row = spec.weight.row(i);
    weight.push_back(std::vector<double>(row.begin(), row.end()));
  }
  json doc = {{"kind", "fc"},
              {"in_features", spec.in_features},
              {"out_features", spec.out_features},
              {"weight", std::move(weight)}};
  if (spec.bias) doc["bias"] = *spec.bias;
  return doc;
}

json to_json(const LayerSpec& spec) {
  return std::visit([](const auto& s) { return to_json(s); }, spec);
}

LayerSpec layer_from_json(const json& doc, std::uint64_t seed) {
  if (!doc.is_object()) throw FormatError("layer: document must be a JSON object");
  if (!doc.contains("kind") || !doc.at("kind").is_string()) {
    throw FormatError("layer: missing string field 'kind' (\"conv\" or \"fc\")");
  }
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "conv") return conv_from_json(doc, seed);
  if (kind == "fc") return fc_from_json(doc, seed);
  throw FormatError("layer: unknown kind '" + kind + "'");
}

LayerSpec load_layer(const std::filesystem::path& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open layer file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("layer file " + path.string() + ": " + e.what());
  }
  return layer_from_json(doc, seed);
}

void save_layer(const std::filesystem::path& path, const LayerSpec& spec) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write layer file " + path.string());
  out << to_json(spec).dump(2) << '\n';
}

}  // namespace nsp
