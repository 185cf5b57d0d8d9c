#include "nsp/cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "nsp/error.hpp"

namespace nsp::cli {

ReportFormat parse_format(const std::string& text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  throw Error("unknown report format '" + text + "' (expected csv or json)");
}

const char* extension(ReportFormat f) noexcept { return f == ReportFormat::csv ? ".csv" : ".json"; }

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Check at_most(std::string name, double measured, double tolerance, std::string detail) {
  return {std::move(name), measured, tolerance, measured <= tolerance, std::move(detail)};
}

Check no_failures(std::string name, std::size_t failures, std::size_t trials, std::string detail) {
  if (detail.empty()) detail = std::to_string(failures) + " of " + std::to_string(trials) + " trials failed";
  return {std::move(name), static_cast<double>(failures), 0.0, failures == 0, std::move(detail)};
}

Check holds(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok ? 0.0 : 1.0, 0.0, ok, std::move(detail)};
}

bool Section::passed() const {
  for (const Check& c : checks) {
    if (!c.passed) return false;
  }
  return !checks.empty();
}

const Check* Section::headline() const {
  for (const Check& c : checks) {
    if (!c.passed) return &c;
  }
  return checks.empty() ? nullptr : &checks.front();
}

namespace {

// NaN and infinities have no JSON spelling.
nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return fmt17(v);
}

}  // namespace

nlohmann::json to_json(const Check& c) {
  nlohmann::json j = {{"name", c.name}, {"measured", number(c.measured)}, {"tolerance", number(c.tolerance)},
                      {"passed", c.passed}};
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

nlohmann::json to_json(const Section& s) {
  nlohmann::json checks = nlohmann::json::array();
  for (const Check& c : s.checks) checks.push_back(to_json(c));
  return {{"name", s.name}, {"passed", s.passed()}, {"checks", std::move(checks)}};
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
  if (!out) throw Error("failed writing " + path.string());
}

nlohmann::json table_to_json(const Table& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < table.header.size() && i < row.size(); ++i) {
      const std::string& cell = row[i];
      if (cell == "true" || cell == "false") {
        obj[table.header[i]] = cell == "true";
        continue;
      }
      // Cells that are JSON numbers stay numbers; everything else is a string.
      const nlohmann::json parsed = nlohmann::json::parse(cell, nullptr, false);
      obj[table.header[i]] = parsed.is_number() ? parsed : nlohmann::json(cell);
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

void write_table(const std::filesystem::path& stem, const Table& table, ReportFormat format) {
  std::filesystem::path path = stem;
  path += extension(format);
  if (format == ReportFormat::csv) {
    write_csv(path, table);
  } else {
    write_json(path, table_to_json(table));
  }
}

}  // namespace nsp::cli
