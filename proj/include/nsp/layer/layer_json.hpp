#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "nsp/layer/layer_spec.hpp"

namespace nsp {

// Layer documents carry "kind": "conv" | "fc" plus the spec fields by name.
// Conv kernels are nested [C_out][C_in][h][w]; FC weights are [N_in][N_out].
// When kernels/weight are absent they are drawn from `seed` (1/sqrt(fan_in)
// Gaussian), so a document may describe geometry only.

nlohmann::json to_json(const ConvLayerSpec& spec);
nlohmann::json to_json(const FcLayerSpec& spec);
nlohmann::json to_json(const LayerSpec& spec);

/// Throws FormatError on missing/mistyped fields and ShapeError on bad geometry.
LayerSpec layer_from_json(const nlohmann::json& doc, std::uint64_t seed = 0);

LayerSpec load_layer(const std::filesystem::path& path, std::uint64_t seed = 0);
void save_layer(const std::filesystem::path& path, const LayerSpec& spec);

}  // namespace nsp
