#include "ptlz/cli/scenarios.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <numbers>
#include <thread>

#include "ptlz/bloch.hpp"
#include "ptlz/lattice.hpp"
#include "ptlz/propagator.hpp"
#include "ptlz/two_level.hpp"

namespace ptlz::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Table make_table(const RunConfig& config, std::string name, std::vector<std::string> columns) {
  Table t;
  t.name = std::move(name);
  t.metadata = metadata_entries(config);
  t.columns = std::move(columns);
  return t;
}

std::vector<double> spaced(double lo, double hi, std::int64_t n, bool logarithmic) {
  require(n >= 2, "need at least two points");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(n - 1);
    out[static_cast<std::size_t>(i)] =
        logarithmic ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo);
  }
  out.back() = hi;
  return out;
}

/// Evaluates fn(i) for i < n on up to `threads` workers; rethrows the first
/// failure by index so errors do not depend on scheduling.
template <typename T>
std::vector<T> parallel_map(std::size_t n, std::int64_t threads, const std::function<T(std::size_t)>& fn) {
  std::vector<T> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(n, 1));
  auto work = [&](std::size_t first) {
    for (std::size_t i = first; i < n; i += workers) {
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

GaussianBeam beam_from(const RunConfig& config) {
  GaussianBeam beam{config.real("q0"), config.real("k0"), config.real("sigma_sq")};
  beam.validate();
  return beam;
}

InitialState initial_from(const std::string& name) {
  if (name == "eigenstate_plus") return InitialState::eigenstate_plus;
  if (name == "eigenstate_minus") return InitialState::eigenstate_minus;
  if (name == "diabatic_2") return InitialState::diabatic_2;
  return InitialState::random;
}

std::string to_string(BranchMethod method) {
  return method == BranchMethod::two_gaussian_fit ? "two_gaussian_fit" : "minimum_between_peaks";
}

}  // namespace

IntegratorConfig integrator_from(const RunConfig& config) {
  IntegratorConfig c;
  c.method = integration_method_from_string(config.choice("method"));
  c.rel_tolerance = config.real("rtol");
  c.abs_tolerance = config.real("atol");
  c.max_step = config.real("max_step");
  c.initial_step = config.real("initial_step");
  c.validate();
  return c;
}

Table run_spectrum_scan(const RunConfig& config) {
  const double gamma = config.real("gamma");
  const double ep_tol = config.real("ep_tol");
  const auto vs = spaced(config.real("v_min"), config.real("v_max"), config.integer("n_points"), false);
  require(gamma > 0.0, "gamma must be positive");

  Table t = make_table(config, "spectrum",
                       {"v", "re_lambda_plus", "im_lambda_plus", "re_lambda_minus", "im_lambda_minus", "overlap"});
  for (double v : vs) {
    const auto s = spectrum(v, gamma, ep_tol);
    t.add_row({v, s.lambda_plus.real(), s.lambda_plus.imag(), s.lambda_minus.real(), s.lambda_minus.imag(),
               s.overlap});
  }
  return t;
}

Table run_two_level_sweep(const RunConfig& config) {
  const TwoLevelParams<double> params{config.real("gamma"), config.real("alpha"), config.real("v_initial"),
                                      config.real("v_final")};
  params.validate();
  const CouplingMode mode =
      config.choice("coupling") == "hermitian_real" ? CouplingMode::hermitian_real : CouplingMode::pt_imaginary;
  const InitialState kind = initial_from(config.choice("initial"));
  const auto seed = static_cast<std::uint64_t>(config.integer("seed"));

  const StateVector2 initial = make_initial_state(kind, params, seed, mode);
  const SweepTrace trace = propagate_sweep(params, initial, integrator_from(config), mode);

  Table t = make_table(config, "sweep", {"t", "v", "p_plus", "p_minus", "log_norm"});
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& p = trace.populations[i];
    t.add_row({trace.times[i], trace.v_values[i], p ? p->plus : kNaN, p ? p->minus : kNaN, trace.log_norm[i]});
  }
  if (kind == InitialState::diabatic_2 && mode == CouplingMode::pt_imaginary && params.v_final > params.gamma)
    t.metadata.emplace_back("numerical_transmission", format_double(numerical_transmission(trace)));
  return t;
}

Table run_ptr_curve(const RunConfig& config) {
  const double gamma = config.real("gamma");
  const double alpha_min = config.real("alpha_min");
  const double alpha_max = config.real("alpha_max");
  require(gamma > 0.0, "gamma must be positive");
  require(alpha_min > 0.0 && alpha_max > alpha_min, "need 0 < alpha_min < alpha_max");
  const auto alphas = spaced(alpha_min, alpha_max, config.integer("n_points"), config.choice("spacing") == "log");
  const std::string mode = config.choice("mode");
  const bool analytic = mode != "numeric";
  const bool numeric = mode != "analytic";
  const double range_factor = config.real("range_factor");
  const IntegratorConfig integrator = integrator_from(config);

  std::vector<double> numeric_values(alphas.size(), kNaN);
  if (numeric) {
    numeric_values = parallel_map<double>(alphas.size(), config.integer("threads"), [&](std::size_t i) {
      return sweep_transmission(gamma, alphas[i], integrator, range_factor);
    });
  }

  std::vector<std::string> columns{"alpha"};
  if (analytic) columns.push_back("p_tr_analytic");
  if (numeric) columns.push_back("p_tr_numeric");
  if (analytic && numeric) columns.push_back("abs_diff");
  Table t = make_table(config, "ptr_curve", columns);
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    std::vector<Cell> row{alphas[i]};
    const double exact = analytic_transmission(gamma, alphas[i]).p_tr;
    if (analytic) row.emplace_back(exact);
    if (numeric) row.emplace_back(numeric_values[i]);
    if (analytic && numeric) row.emplace_back(std::abs(numeric_values[i] - exact));
    t.add_row(std::move(row));
  }
  return t;
}

std::vector<Table> run_lattice_evolution(const RunConfig& config) {
  const double gamma = config.real("gamma");
  const double force = config.real("force");
  require(force > 0.0, "force must be positive");
  const GaussianBeam beam = beam_from(config);
  const double periods = config.real("periods");
  const std::int64_t n_frames = config.integer("n_frames");
  require(periods > 0.0, "periods must be positive");
  require(n_frames >= 1, "n_frames must be at least 1");
  const IntegratorConfig integrator = integrator_from(config);

  const double t_final = periods * bloch_period(force);
  const LatticeParams params = auto_lattice_params(beam, gamma, force, t_final);
  const auto samples = evolve(gaussian_beam_state(beam, params), params, t_final, integrator,
                              t_final / static_cast<double>(n_frames));

  Table density = make_table(config, "density", {"time", "site", "density", "log_norm"});
  for (const auto& sample : samples) {
    const Eigen::VectorXd d = sample.density();
    for (Eigen::Index n = 0; n < d.size(); ++n)
      density.add_row({sample.time, static_cast<std::int64_t>(params.site_offset + n), d(n), sample.log_norm});
  }

  Table summary = make_table(config, "summary",
                             {"force", "gamma", "upper_fraction", "p_tr_formula", "abs_diff", "split_site", "method"});
  try {
    const LatticeTransmission r = lattice_transmission(gamma, force, beam, integrator);
    summary.add_row({force, gamma, r.upper_fraction, r.p_tr_formula, r.abs_diff,
                     static_cast<std::int64_t>(r.split_index), to_string(r.method)});
  } catch (const BranchDetectionError&) {
    summary.add_row({force, gamma, kNaN, effective_lz_params(gamma, force).p_tr, kNaN, std::int64_t{0},
                     std::string("unresolved")});
  }
  return {std::move(density), std::move(summary)};
}

Table run_dispersion_scan(const RunConfig& config) {
  const double gamma = config.real("gamma");
  require(gamma >= 0.0, "gamma must be non-negative");
  const auto ks = spaced(-std::numbers::pi, std::numbers::pi, config.integer("n_k"), false);

  Table t = make_table(config, "dispersion",
                       {"k", "re_E_plus", "im_E_plus", "re_E_minus", "im_E_minus", "re_E_taylor_plus",
                        "im_E_taylor_plus"});
  for (double k : ks) {
    const auto [ep, em] = dispersion(k, gamma);
    // Linearised detuning around k = pi/2 in the two-level eigenvalue.
    const double v = 2.0 * (k - std::numbers::pi / 2.0);
    const auto taylor = principal_root((v - gamma) * (v + gamma));
    t.add_row({k, ep.real(), ep.imag(), em.real(), em.imag(), taylor.real(), taylor.imag()});
  }
  return t;
}

Table run_lattice_transmission_scan(const RunConfig& config) {
  const double gamma = config.real("gamma");
  const double f_min = config.real("f_min");
  const double f_max = config.real("f_max");
  require(f_min > 0.0 && f_max > f_min, "need 0 < f_min < f_max");
  const auto forces = spaced(f_min, f_max, config.integer("n_points"), true);
  const GaussianBeam beam = beam_from(config);
  const IntegratorConfig integrator = integrator_from(config);

  const auto results = parallel_map<LatticeTransmission>(forces.size(), config.integer("threads"), [&](std::size_t i) {
    return lattice_transmission(gamma, forces[i], beam, integrator);
  });

  Table t = make_table(config, "lattice_scan",
                       {"force", "upper_fraction", "p_tr_formula", "abs_diff", "split_site", "method"});
  for (const auto& r : results)
    t.add_row({r.force, r.upper_fraction, r.p_tr_formula, r.abs_diff, static_cast<std::int64_t>(r.split_index),
               to_string(r.method)});
  return t;
}

std::vector<Table> run_scenario(const RunConfig& config) {
  switch (config.scenario) {
    case Scenario::spectrum_scan: return {run_spectrum_scan(config)};
    case Scenario::two_level_sweep: return {run_two_level_sweep(config)};
    case Scenario::ptr_curve: return {run_ptr_curve(config)};
    case Scenario::lattice_evolution: return run_lattice_evolution(config);
    case Scenario::dispersion_scan: return {run_dispersion_scan(config)};
    case Scenario::lattice_transmission_scan: return {run_lattice_transmission_scan(config)};
  }
  throw ValidationError("unknown scenario");
}

}  // namespace ptlz::cli
