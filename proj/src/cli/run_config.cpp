#include "ptlz/cli/run_config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ptlz/errors.hpp"

namespace ptlz::cli {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

ParamSpec real(std::string name, std::string value, std::string help) {
  return {std::move(name), ParamKind::real, std::move(value), std::move(help), {}};
}
ParamSpec integer(std::string name, std::string value, std::string help) {
  return {std::move(name), ParamKind::integer, std::move(value), std::move(help), {}};
}
ParamSpec choice(std::string name, std::string value, std::string help, std::vector<std::string> choices) {
  return {std::move(name), ParamKind::choice, std::move(value), std::move(help), std::move(choices)};
}

void append_common(std::vector<ParamSpec>& specs) {
  specs.push_back(integer("seed", "0", "seed for random initial states; recorded in the output"));
  specs.push_back(integer("threads", "1", "worker threads for sweep points (0: hardware concurrency)"));
}

void append_integrator(std::vector<ParamSpec>& specs, const std::string& max_step, const std::string& initial_step) {
  specs.push_back(choice("method", "adaptive_embedded_rk45", "time integrator", {"adaptive_embedded_rk45", "fixed_rk4"}));
  specs.push_back(real("rtol", "1e-09", "relative tolerance (adaptive)"));
  specs.push_back(real("atol", "1e-12", "absolute tolerance (adaptive)"));
  specs.push_back(real("max_step", max_step, "largest time step"));
  specs.push_back(real("initial_step", initial_step, "first trial step; the fixed step for fixed_rk4"));
}

void append_beam(std::vector<ParamSpec>& specs) {
  specs.push_back(real("q0", "-15", "beam centre (sites)"));
  specs.push_back(real("k0", "3.141592653589793", "beam momentum"));
  specs.push_back(real("sigma_sq", "20", "beam width sigma^2"));
}

std::vector<ParamSpec> build_specs(Scenario scenario) {
  std::vector<ParamSpec> s;
  switch (scenario) {
    case Scenario::spectrum_scan:
      s = {real("gamma", "1", "gain/loss rate"), real("v_min", "-3", "first detuning"),
           real("v_max", "3", "last detuning"), integer("n_points", "601", "number of detunings (>= 2)"),
           real("ep_tol", "1e-08", "exceptional-point tolerance")};
      break;
    case Scenario::two_level_sweep:
      s = {real("gamma", "1", "gain/loss rate"),
           real("alpha", "0.5", "sweep rate"),
           real("v_initial", "-5", "starting detuning"),
           real("v_final", "5", "final detuning"),
           choice("initial", "eigenstate_minus", "initial state",
                  {"eigenstate_plus", "eigenstate_minus", "diabatic_2", "random"}),
           choice("coupling", "pt_imaginary", "coupling i*gamma or the Hermitian gamma",
                  {"pt_imaginary", "hermitian_real"})};
      append_integrator(s, "0.5", "0.001");
      break;
    case Scenario::ptr_curve:
      s = {real("gamma", "1", "gain/loss rate"),
           real("alpha_min", "0.05", "smallest sweep rate"),
           real("alpha_max", "50", "largest sweep rate"),
           integer("n_points", "20", "number of sweep rates"),
           choice("spacing", "log", "sweep-rate spacing", {"log", "linear"}),
           choice("mode", "both", "which transmissions to compute", {"analytic", "numeric", "both"}),
           real("range_factor", "20", "numeric runs cover v in [-f gamma, f gamma]")};
      append_integrator(s, "0.5", "0.001");
      break;
    case Scenario::lattice_evolution:
      s = {real("gamma", "0.2", "lattice gain/loss Gamma"), real("force", "0.1", "static force F (> 0)")};
      append_beam(s);
      s.push_back(real("periods", "0.5", "run length in Bloch periods 2 pi / F"));
      s.push_back(integer("n_frames", "40", "density frames after t = 0"));
      append_integrator(s, "0.25", "0.01");
      break;
    case Scenario::dispersion_scan:
      s = {real("gamma", "0.2", "lattice gain/loss Gamma"), integer("n_k", "401", "points over [-pi, pi] (>= 2)")};
      break;
    case Scenario::lattice_transmission_scan:
      s = {real("gamma", "0.2", "lattice gain/loss Gamma"), real("f_min", "0.02", "smallest force"),
           real("f_max", "0.5", "largest force"), integer("n_points", "15", "number of forces (log-spaced)")};
      append_beam(s);
      append_integrator(s, "0.25", "0.01");
      break;
  }
  append_common(s);
  return s;
}

const ParamSpec& find_spec(Scenario scenario, const std::string& key) {
  for (const auto& spec : parameter_specs(scenario))
    if (spec.name == key) return spec;
  throw ValidationError("unknown parameter '" + key + "' for " + subcommand_name(scenario));
}

std::int64_t parse_integer(const std::string& text, const std::string& key) {
  const double x = parse_real(text, key);
  if (x != std::floor(x) || std::abs(x) > 9.0e15)
    throw ValidationError("parameter '" + key + "' must be an integer, got '" + text + "'");
  return static_cast<std::int64_t>(x);
}

std::string canonical(const ParamSpec& spec, const std::string& raw) {
  const std::string text = trim(raw);
  switch (spec.kind) {
    case ParamKind::real:
      return format_double(parse_real(text, spec.name));
    case ParamKind::integer:
      return std::to_string(parse_integer(text, spec.name));
    case ParamKind::choice:
      for (const auto& c : spec.choices)
        if (c == text) return text;
      throw ValidationError("parameter '" + spec.name + "' has no option '" + text + "'");
  }
  throw ValidationError("unreachable parameter kind");
}

}  // namespace

std::string subcommand_name(Scenario scenario) {
  switch (scenario) {
    case Scenario::spectrum_scan: return "spectrum";
    case Scenario::two_level_sweep: return "sweep";
    case Scenario::ptr_curve: return "ptr-curve";
    case Scenario::lattice_evolution: return "lattice";
    case Scenario::dispersion_scan: return "dispersion";
    case Scenario::lattice_transmission_scan: return "lattice-scan";
  }
  throw ValidationError("unknown scenario");
}

const std::vector<Scenario>& all_scenarios() {
  static const std::vector<Scenario> all{Scenario::spectrum_scan,     Scenario::two_level_sweep,
                                         Scenario::ptr_curve,         Scenario::lattice_evolution,
                                         Scenario::dispersion_scan,   Scenario::lattice_transmission_scan};
  return all;
}

Scenario scenario_from_subcommand(const std::string& name) {
  for (Scenario s : all_scenarios())
    if (subcommand_name(s) == name) return s;
  throw ValidationError("unknown scenario: " + name);
}

const std::vector<ParamSpec>& parameter_specs(Scenario scenario) {
  static const std::map<Scenario, std::vector<ParamSpec>> table = [] {
    std::map<Scenario, std::vector<ParamSpec>> t;
    for (Scenario s : all_scenarios()) t[s] = build_specs(s);
    return t;
  }();
  return table.at(scenario);
}

double RunConfig::real(const std::string& key) const { return parse_real(parameters.at(key), key); }

std::int64_t RunConfig::integer(const std::string& key) const { return parse_integer(parameters.at(key), key); }

const std::string& RunConfig::choice(const std::string& key) const { return parameters.at(key); }

double parse_real(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double x = std::numeric_limits<double>::quiet_NaN();
  try {
    x = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size() || !std::isfinite(x))
    throw ValidationError("parameter '" + key + "' must be a finite number, got '" + text + "'");
  return x;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw ValidationError("config line " + std::to_string(number) + ": empty key");
    if (!out.emplace(key, value).second) throw ValidationError("config: duplicate key '" + key + "'");
  }
  return out;
}

std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot read config file " + path.string());
  std::ostringstream text;
  text << file.rdbuf();
  return parse_key_values(text.str());
}

RunConfig resolve_config(Scenario scenario, const std::map<std::string, std::string>& file,
                         const std::map<std::string, std::string>& flags) {
  RunConfig config;
  config.scenario = scenario;
  for (const auto& spec : parameter_specs(scenario)) config.parameters[spec.name] = spec.default_value;

  for (const auto* layer : {&file, &flags}) {
    for (const auto& [key, value] : *layer) {
      if (key == "scenario") {
        if (scenario_from_subcommand(value) != scenario)
          throw ValidationError("config is for scenario '" + value + "', not " + subcommand_name(scenario));
      } else if (key == "format") {
        config.format = output_format_from_string(value);
      } else if (key == "output") {
        config.output_path = value;
      } else {
        config.parameters[key] = canonical(find_spec(scenario, key), value);
      }
    }
  }
  return config;
}

std::string serialize_config(const RunConfig& config) {
  std::ostringstream out;
  out << "scenario = " << subcommand_name(config.scenario) << '\n';
  out << "format = " << to_string(config.format) << '\n';
  if (!config.output_path.empty()) out << "output = " << config.output_path.string() << '\n';
  for (const auto& [key, value] : config.parameters) out << key << " = " << value << '\n';
  return out.str();
}

std::vector<std::pair<std::string, std::string>> metadata_entries(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out{{"scenario", subcommand_name(config.scenario)}};
  for (const auto& [key, value] : config.parameters)
    if (key != "threads") out.emplace_back(key, value);
  return out;
}

}  // namespace ptlz::cli
