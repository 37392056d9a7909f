#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ptlz/ode.hpp"
#include "ptlz/two_level.hpp"

namespace ptlz {

using Vector2cd = Vector2c<double>;

/// Unit-norm amplitudes plus a log scale: physical state = amplitudes * e^{log_norm}.
struct StateVector2 {
  Vector2cd amplitudes{0.0, 1.0};
  double log_norm = 0.0;

  static StateVector2 from_physical(const Vector2cd& psi);
  Vector2cd physical() const;
  /// log |psi_i|^2 of the physical amplitudes.
  std::array<double, 2> log_mod_sq() const;
};

enum class CouplingMode { pt_imaginary, hermitian_real };

enum class InitialState { eigenstate_plus, eigenstate_minus, diabatic_2, random };

struct Populations {
  double plus;
  double minus;
};

/// Sampled at integrator-accepted steps (plus the initial point).
struct SweepTrace {
  CouplingMode mode = CouplingMode::pt_imaginary;
  TwoLevelParams<double> params;
  std::vector<double> times;
  std::vector<double> v_values;
  /// Empty where the eigenbasis is defective (at an exceptional point).
  std::vector<std::optional<Populations>> populations;
  std::vector<double> log_norm;
  /// log |psi_1|^2, log |psi_2|^2 in physical scale.
  std::vector<std::array<double, 2>> log_diabatic_mod_sq;
  /// log |c_+|^2, log |c_-|^2 in physical scale, psi = c_+ R_+ + c_- R_- with unit-norm R.
  std::vector<std::optional<std::array<double, 2>>> log_eigen_mod_sq;
  StateVector2 final_state;

  std::size_t size() const { return times.size(); }
};

/// Instantaneous Hamiltonian at detuning v in the given coupling mode.
Matrix2c<double> sweep_hamiltonian(double v, double gamma, CouplingMode mode);

/// Eigenbasis in either mode; empty at a PT exceptional point.
std::optional<EigenBasis<double>> instantaneous_basis(double v, double gamma, CouplingMode mode,
                                                      double ep_tolerance = kDefaultEpTolerance);

std::pair<double, double> instantaneous_populations(const StateVector2& state, const SpectralData<double>& spectral);

SweepTrace propagate_sweep(const TwoLevelParams<double>& params, const StateVector2& initial,
                           const IntegratorConfig& config, CouplingMode mode = CouplingMode::pt_imaginary);

/// Instantaneous eigenstate at v_initial that continues into diabatic state 2
/// as |v| grows: the finite-time stand-in for psi(t -> -inf) = (0, 1).
StateVector2 transmission_initial_state(const TwoLevelParams<double>& params,
                                        CouplingMode mode = CouplingMode::pt_imaginary);

StateVector2 make_initial_state(InitialState kind, const TwoLevelParams<double>& params, std::uint64_t seed = 0,
                                CouplingMode mode = CouplingMode::pt_imaginary);

/// Unit state with independent standard complex Gaussian components.
StateVector2 random_state(std::uint64_t seed);

/// Asymptotic log |psi_1|^2 and log |psi_2|^2 at the end of the trace, read in
/// the instantaneous eigenbasis (whose vectors tend to the diabatic basis as |v| grows).
std::array<double, 2> asymptotic_log_mod_sq(const SweepTrace& trace);

/// Transmission into diabatic state 2, from asymptotic_log_mod_sq. PT traces only.
double numerical_transmission(const SweepTrace& trace);

/// The raw finite-time ratio |psi_2|^2 / (|psi_1|^2 + |psi_2|^2) at t_f.
double diabatic_ratio(const SweepTrace& trace);

/// Final (p_plus, p_minus). Meaningful as an equal-redistribution check when
/// pi gamma^2 / alpha > 5; see is_adiabatic_regime.
std::pair<double, double> adiabatic_redistribution_check(const TwoLevelParams<double>& params,
                                                         const StateVector2& initial, const IntegratorConfig& config);

bool is_adiabatic_regime(const TwoLevelParams<double>& params);

struct ConvergedTransmission {
  double p_tr;
  double v_range;  // final half-width |v_initial| = v_final
  int doublings;
};

/// Runs with v in [-f gamma, f gamma], doubling f until numerical_transmission
/// moves by less than `tolerance`.
ConvergedTransmission converged_transmission(double gamma, double alpha, const IntegratorConfig& config,
                                             double tolerance = 1e-4, double initial_range_factor = 20.0,
                                             int max_doublings = 6);

/// Transmission run with the default v-range [-f gamma, f gamma].
double sweep_transmission(double gamma, double alpha, const IntegratorConfig& config, double range_factor = 20.0);

}  // namespace ptlz
