#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace nsp::cli {

enum class ReportFormat { csv, json };

ReportFormat parse_format(const std::string& text);
const char* extension(ReportFormat f) noexcept;

/// 17 significant digits, enough to round-trip any double.
std::string fmt17(double v);

/// One measured quantity against its tolerance.
struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

/// Checks that measured <= tolerance.
Check at_most(std::string name, double measured, double tolerance, std::string detail = {});
/// Pass/fail check where measured is a count of failures (tolerance 0).
Check no_failures(std::string name, std::size_t failures, std::size_t trials, std::string detail = {});
Check holds(std::string name, bool ok, std::string detail = {});

struct Section {
  std::string name;
  std::vector<Check> checks;
  double seconds = 0.0;

  bool passed() const;
  /// Worst failing check, or the first check when all pass.
  const Check* headline() const;
};

nlohmann::json to_json(const Check& c);
nlohmann::json to_json(const Section& s);

/// Simple CSV table; cells are written verbatim.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::filesystem::path& path, const Table& table);
nlohmann::json table_to_json(const Table& table);
void write_table(const std::filesystem::path& stem, const Table& table, ReportFormat format);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace nsp::cli
