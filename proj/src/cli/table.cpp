#include "ptlz/cli/table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ptlz/errors.hpp"

namespace ptlz::cli {

namespace {

std::string cell_text(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

nlohmann::ordered_json cell_json(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) {
    if (std::isfinite(*d)) return *d;
    return format_double(*d);  // JSON has no literal for nan / inf
  }
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
  return std::get<std::string>(cell);
}

}  // namespace

void Table::add_row(std::vector<Cell> row) {
  require(row.size() == columns.size(), "Table::add_row: row width differs from the header");
  rows.push_back(std::move(row));
}

std::string to_string(OutputFormat format) { return format == OutputFormat::json ? "json" : "csv"; }

OutputFormat output_format_from_string(const std::string& name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw ValidationError("unknown output format: " + name);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, x);
  return std::string(buffer, result.ptr);
}

void write_csv(const Table& table, std::ostream& out) {
  for (const auto& [key, value] : table.metadata) out << "# " << key << '=' << value << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << cell_text(row[c]);
    out << '\n';
  }
}

void write_json(const Table& table, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["name"] = table.name;
  doc["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : table.metadata) doc["metadata"][key] = value;
  doc["columns"] = table.columns;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (const auto& cell : row) r.push_back(cell_json(cell));
    doc["rows"].push_back(std::move(r));
  }
  out << doc.dump(1) << '\n';
}

void write_table(const Table& table, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::json)
    write_json(table, out);
  else
    write_csv(table, out);
}

void write_table(const Table& table, OutputFormat format, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  write_table(table, format, file);
  file.flush();
  if (!file) throw IoError("failed writing " + path.string());
}

}  // namespace ptlz::cli
