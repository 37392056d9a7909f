#pragma once

// Run configuration: a scenario, a flat key/value parameter map, an output
// path and a format. Files use one `key = value` per line with '#' comments.
// Resolution order is defaults < config file < command-line flags.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ptlz/cli/table.hpp"

namespace ptlz::cli {

enum class Scenario {
  spectrum_scan,
  two_level_sweep,
  ptr_curve,
  lattice_evolution,
  dispersion_scan,
  lattice_transmission_scan
};

/// Subcommand name: spectrum, sweep, ptr-curve, lattice, dispersion, lattice-scan.
std::string subcommand_name(Scenario scenario);
Scenario scenario_from_subcommand(const std::string& name);
const std::vector<Scenario>& all_scenarios();

enum class ParamKind { real, integer, choice };

struct ParamSpec {
  std::string name;
  ParamKind kind;
  std::string default_value;
  std::string help;
  std::vector<std::string> choices;  // ParamKind::choice only
};

/// Every parameter a scenario accepts, including the common seed / threads keys.
const std::vector<ParamSpec>& parameter_specs(Scenario scenario);

struct RunConfig {
  Scenario scenario = Scenario::spectrum_scan;
  std::map<std::string, std::string> parameters;  // canonical text values
  std::filesystem::path output_path;
  OutputFormat format = OutputFormat::csv;

  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  const std::string& choice(const std::string& key) const;

  bool operator==(const RunConfig&) const = default;
};

/// Raw `key = value` pairs; rejects malformed lines and duplicate keys.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path);

/// Parses a real number in full (scientific notation accepted).
double parse_real(const std::string& text, const std::string& key);

/// Fills defaults, applies `file` then `flags`, rejects unknown keys and
/// ill-typed values, and canonicalises numbers. The reserved keys `scenario`,
/// `format` and `output` set the corresponding RunConfig fields.
RunConfig resolve_config(Scenario scenario, const std::map<std::string, std::string>& file,
                         const std::map<std::string, std::string>& flags);

/// Text that resolve_config parses back to an identical RunConfig.
std::string serialize_config(const RunConfig& config);

/// Parameters written into output metadata (everything except threads).
std::vector<std::pair<std::string, std::string>> metadata_entries(const RunConfig& config);

}  // namespace ptlz::cli
