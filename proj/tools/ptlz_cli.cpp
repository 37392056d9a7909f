// ptlz: data files for the PT-symmetric Landau-Zener model and lattice.
// Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "ptlz/cli/run_config.hpp"
#include "ptlz/cli/scenarios.hpp"
#include "ptlz/errors.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ptlz::cli;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;
constexpr const char* kOutputDirVariable = "PTLZ_OUTPUT_DIR";

struct Subcommand {
  Scenario scenario;
  CLI::App* app;
  std::map<std::string, CLI::Option*> parameter_options;
};

struct CommonOptions {
  std::string out;
  std::string format;
  std::string config;
  std::string seed;
  std::string threads;
  bool print_config = false;
};

std::string scenario_description(Scenario scenario) {
  switch (scenario) {
    case Scenario::spectrum_scan: return "eigenvalues of the two-level Hamiltonian against v";
    case Scenario::two_level_sweep: return "time-resolved two-level sweep";
    case Scenario::ptr_curve: return "transmission against sweep rate: closed form and integration";
    case Scenario::lattice_evolution: return "Gaussian beam in the tilted PT lattice: densities and branch split";
    case Scenario::dispersion_scan: return "Bloch band dispersion E(k)";
    case Scenario::lattice_transmission_scan: return "lattice branch split against force";
  }
  return {};
}

fs::path default_output(const RunConfig& config) {
  const std::string name = subcommand_name(config.scenario) + "." + to_string(config.format);
  if (const char* dir = std::getenv(kOutputDirVariable); dir && *dir) return fs::path(dir) / name;
  return name;
}

/// Secondary tables go next to the main file: out.csv -> out.<name>.csv.
fs::path sibling_path(const fs::path& main, const std::string& name) {
  fs::path p = main;
  p.replace_extension();
  p += "." + name + main.extension().string();
  return p;
}

void write_outputs(const std::vector<Table>& tables, const RunConfig& config) {
  const fs::path main = config.output_path.empty() ? default_output(config) : config.output_path;
  if (main == "-") {
    for (const auto& t : tables) write_table(t, config.format, std::cout);
    return;
  }
  if (main.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(main.parent_path(), ec);
    if (ec) throw ptlz::IoError("cannot create directory " + main.parent_path().string() + ": " + ec.message());
  }
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const fs::path path = i == 0 ? main : sibling_path(main, tables[i].name);
    write_table(tables[i], config.format, path);
    std::cerr << "wrote " << path.string() << '\n';
  }
}

int run(int argc, char** argv) {
  CLI::App app{"PT-symmetric Landau-Zener transitions: spectra, sweeps, transmission curves, lattice runs"};
  app.require_subcommand(1);

  CommonOptions common;
  std::vector<Subcommand> subcommands;
  for (Scenario scenario : all_scenarios()) {
    CLI::App* sub = app.add_subcommand(subcommand_name(scenario), scenario_description(scenario));
    Subcommand entry{scenario, sub, {}};
    sub->add_option("--out", common.out, "output file ('-' for stdout; default $PTLZ_OUTPUT_DIR/<name>)");
    sub->add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--config", common.config, "key = value file; flags override it");
    sub->add_option("--seed", common.seed, "random seed");
    sub->add_option("--threads", common.threads, "worker threads (0: all cores)");
    sub->add_flag("--print-config", common.print_config, "print the resolved configuration and exit");
    for (const ParamSpec& spec : parameter_specs(scenario)) {
      if (spec.name == "seed" || spec.name == "threads") continue;
      std::string help = spec.help + " [" + spec.default_value + "]";
      if (spec.kind == ParamKind::choice) {
        help += " {";
        for (std::size_t i = 0; i < spec.choices.size(); ++i) help += (i ? "," : "") + spec.choices[i];
        help += "}";
      }
      entry.parameter_options[spec.name] = sub->add_option("--" + spec.name)->description(help);
    }
    subcommands.push_back(std::move(entry));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  for (const Subcommand& sub : subcommands) {
    if (!sub.app->parsed()) continue;

    std::map<std::string, std::string> flags;
    for (const auto& [name, option] : sub.parameter_options)
      if (option->count() > 0) flags[name] = option->as<std::string>();
    if (!common.seed.empty()) flags["seed"] = common.seed;
    if (!common.threads.empty()) flags["threads"] = common.threads;
    if (!common.format.empty()) flags["format"] = common.format;
    if (!common.out.empty()) flags["output"] = common.out;

    const auto file = common.config.empty() ? std::map<std::string, std::string>{}
                                            : read_key_value_file(common.config);
    const RunConfig config = resolve_config(sub.scenario, file, flags);
    if (common.print_config) {
      std::cout << serialize_config(config);
      return 0;
    }
    write_outputs(run_scenario(config), config);
    return 0;
  }
  return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ptlz::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ptlz::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ptlz::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
