#pragma once

#include <vector>

#include "ptlz/cli/run_config.hpp"
#include "ptlz/cli/table.hpp"
#include "ptlz/ode.hpp"

namespace ptlz::cli {

/// Tables produced by a run; the first is the main output. Scenarios that run
/// independent points (ptr-curve, lattice-scan) spread them over `threads`
/// workers, and results do not depend on the thread count.
std::vector<Table> run_scenario(const RunConfig& config);

Table run_spectrum_scan(const RunConfig& config);
Table run_two_level_sweep(const RunConfig& config);
Table run_ptr_curve(const RunConfig& config);
/// Density frames (time, site, density, log_norm) and a one-row branch summary at T/2.
std::vector<Table> run_lattice_evolution(const RunConfig& config);
Table run_dispersion_scan(const RunConfig& config);
Table run_lattice_transmission_scan(const RunConfig& config);

IntegratorConfig integrator_from(const RunConfig& config);

}  // namespace ptlz::cli
