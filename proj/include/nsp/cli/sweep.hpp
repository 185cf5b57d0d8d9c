#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nsp/cli/report.hpp"
#include "nsp/layer/layer_spec.hpp"

namespace nsp::cli {

struct FcGeometry {
  std::size_t in_features = 0;
  std::size_t out_features = 0;
};

using SweepGeometry = std::variant<ConvGeometry, FcGeometry>;

std::string describe(const SweepGeometry& g);

/// Parses "conv:CxHxW:OUT:KERNEL:STRIDE:PAD" or "fc:IN:OUT".
SweepGeometry parse_geometry(const std::string& text);

/// The built-in sweep: FC 784 -> {98, 196, 392, 784, 1568}, the three cited
/// 32x32 convolutions, and small conv/FC families on both sides of the
/// in = out boundary. Every entry has kernel >= stride and full coverage.
std::vector<SweepGeometry> default_sweep();

struct SweepRow {
  std::string label;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::size_t predicted = 0;
  bool guaranteed = true;
  std::string note;  // why the prediction is unguaranteed, or the geometry error
  std::optional<std::size_t> numerical;
  double equivalence_error = 0.0;
  bool valid = true;

  bool agree() const { return valid && numerical && *numerical == predicted; }
};

/// Lowers each geometry with seeded random weights, computes the numerical
/// nullity and the lowering residual over `samples` inputs. Invalid
/// geometries are recorded and skipped.
std::vector<SweepRow> run_dim_sweep(const std::vector<SweepGeometry>& geometries, std::uint64_t seed,
                                    std::size_t samples = 100);

/// Columns in_dim, out_dim, predicted, numerical, agree.
Table sweep_table(const std::vector<SweepRow>& rows);

/// Exact nullity agreement on every guaranteed row, and at least
/// `min_guaranteed` such rows.
Section check_sweep_nullity(const std::vector<SweepRow>& rows, double seconds, std::size_t min_guaranteed = 50);
/// Lowering residual <= 1e-12 on every row.
Section check_sweep_equivalence(const std::vector<SweepRow>& rows);

}  // namespace nsp::cli
