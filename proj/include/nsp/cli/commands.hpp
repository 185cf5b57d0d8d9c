#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nsp/cli/report.hpp"
#include "nsp/privacy/privacy.hpp"

namespace nsp::cli {

struct CommonOptions {
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
  ReportFormat format = ReportFormat::csv;
};

struct LowerOptions {
  std::filesystem::path layer;
};

struct SweepOptions {
  /// Geometry strings as accepted by parse_geometry; empty means the default sweep.
  std::vector<std::string> geometries;
  std::size_t samples = 100;
};

struct VerifyOptions {
  std::optional<std::filesystem::path> net;
  bool tamper_basis = false;
  bool skip_sweep = false;
};

struct ContourOptions {
  std::optional<std::filesystem::path> layer;
  std::optional<std::filesystem::path> net;
  /// Feature index of the layer to map; defaults to the last linear layer.
  std::optional<std::size_t> feature;
  std::size_t points = 21;
};

struct PrivacyOptions {
  std::optional<std::filesystem::path> net;
  std::vector<std::filesystem::path> images;  // PPM inputs; empty means synthetic
  std::size_t count = 20;
  std::size_t reconstructions = 16;
  PrivacyConfig config;
};

// Each command writes its files under common.out, logs to `log`, and returns
// the process exit code.
int cmd_lower(const CommonOptions& common, const LowerOptions& options, std::ostream& log);
int cmd_dim_sweep(const CommonOptions& common, const SweepOptions& options, std::ostream& log);
int cmd_verify(const CommonOptions& common, const VerifyOptions& options, std::ostream& log);
int cmd_contour(const CommonOptions& common, const ContourOptions& options, std::ostream& log);
int cmd_privacy(const CommonOptions& common, const PrivacyOptions& options, std::ostream& log);

/// One line per section: PASS/FAIL, name, headline check and elapsed time.
void print_section(std::ostream& log, const Section& s);

}  // namespace nsp::cli
