#pragma once

// Column-oriented result tables and their CSV / JSON writers. Doubles are
// printed in the shortest form that parses back to the same value.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ptlz::cli {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::string name;
  std::vector<std::pair<std::string, std::string>> metadata;  // written as '# key=value'
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

enum class OutputFormat { csv, json };

std::string to_string(OutputFormat format);
OutputFormat output_format_from_string(const std::string& name);

/// Shortest round-trip representation; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double x);

void write_csv(const Table& table, std::ostream& out);
void write_json(const Table& table, std::ostream& out);
void write_table(const Table& table, OutputFormat format, std::ostream& out);
/// Throws IoError when the file cannot be written.
void write_table(const Table& table, OutputFormat format, const std::filesystem::path& path);

}  // namespace ptlz::cli
