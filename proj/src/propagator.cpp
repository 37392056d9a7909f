#include "ptlz/propagator.hpp"

#include <cmath>
#include <random>

namespace ptlz {

namespace {

constexpr std::complex<double> kI(0.0, 1.0);

double safe_log_norm_sq(std::complex<double> c) { return std::log(std::norm(c)); }

void record(SweepTrace& trace, double t, const Vector2cd& amplitudes, double log_norm) {
  const double v = trace.params.alpha * t;
  trace.times.push_back(t);
  trace.v_values.push_back(v);
  trace.log_norm.push_back(log_norm);
  trace.log_diabatic_mod_sq.push_back(
      {safe_log_norm_sq(amplitudes(0)) + 2.0 * log_norm, safe_log_norm_sq(amplitudes(1)) + 2.0 * log_norm});

  const auto basis = instantaneous_basis(v, trace.params.gamma, trace.mode);
  if (!basis) {
    trace.populations.emplace_back(std::nullopt);
    trace.log_eigen_mod_sq.emplace_back(std::nullopt);
    return;
  }
  const Vector2cd coeff = basis->left.adjoint() * amplitudes;
  const double plus = std::norm(coeff(0));
  const double minus = std::norm(coeff(1));
  trace.populations.push_back(Populations{plus / (plus + minus), minus / (plus + minus)});
  trace.log_eigen_mod_sq.push_back(
      std::array<double, 2>{std::log(plus) + 2.0 * log_norm, std::log(minus) + 2.0 * log_norm});
}

}  // namespace

StateVector2 StateVector2::from_physical(const Vector2cd& psi) {
  const double n = psi.norm();
  require(n > 0 && std::isfinite(n), "StateVector2: state must have finite nonzero norm");
  return StateVector2{psi / n, std::log(n)};
}

Vector2cd StateVector2::physical() const { return amplitudes * std::exp(log_norm); }

std::array<double, 2> StateVector2::log_mod_sq() const {
  return {safe_log_norm_sq(amplitudes(0)) + 2.0 * log_norm, safe_log_norm_sq(amplitudes(1)) + 2.0 * log_norm};
}

Matrix2c<double> sweep_hamiltonian(double v, double gamma, CouplingMode mode) {
  if (mode == CouplingMode::pt_imaginary) return hamiltonian(v, gamma);
  Matrix2c<double> h;
  h << -v, gamma, gamma, v;
  return h;
}

std::optional<EigenBasis<double>> instantaneous_basis(double v, double gamma, CouplingMode mode,
                                                      double ep_tolerance) {
  if (mode == CouplingMode::pt_imaginary) return spectrum(v, gamma, ep_tolerance).basis;
  const double s = std::hypot(v, gamma);
  return detail::eigenbasis<double>(sweep_hamiltonian(v, gamma, mode), s, -s);
}

std::pair<double, double> instantaneous_populations(const StateVector2& state, const SpectralData<double>& spectral) {
  return ptlz::instantaneous_populations<double>(state.amplitudes, spectral);
}

SweepTrace propagate_sweep(const TwoLevelParams<double>& params, const StateVector2& initial,
                           const IntegratorConfig& config, CouplingMode mode) {
  params.validate();
  config.validate();
  require(std::abs(initial.amplitudes.norm() - 1.0) < 1e-10, "propagate_sweep: initial amplitudes must be unit-norm");
  require(std::isfinite(initial.log_norm), "propagate_sweep: initial log_norm must be finite");

  SweepTrace trace;
  trace.mode = mode;
  trace.params = params;

  const double alpha = params.alpha;
  const double gamma = params.gamma;
  const std::complex<double> coupling = mode == CouplingMode::pt_imaginary ? kI * gamma : gamma;

  // i psi' = H(alpha t) psi
  auto rhs = [&](double t, const Vector2cd& y, Vector2cd& dydt) {
    const double v = alpha * t;
    dydt(0) = -kI * (-v * y(0) + coupling * y(1));
    dydt(1) = -kI * (coupling * y(0) + v * y(1));
  };

  Vector2cd y = initial.amplitudes;
  double log_norm = initial.log_norm;
  double t = params.t_initial();
  record(trace, t, y, log_norm);

  RungeKuttaStepper<Vector2cd> stepper(config);
  stepper.advance(y, t, params.t_final(), rhs, [&](double t_now, Vector2cd& state) {
    const double n = state.norm();
    state /= n;
    log_norm += std::log(n);
    if (!std::isfinite(log_norm)) throw NumericalError("log-norm overflow");
    record(trace, t_now, state, log_norm);
  });

  trace.final_state = StateVector2{y, log_norm};
  return trace;
}

StateVector2 transmission_initial_state(const TwoLevelParams<double>& params, CouplingMode mode) {
  params.validate();
  const auto basis = instantaneous_basis(params.v_initial, params.gamma, mode);
  if (!basis) throw DefectivePointError("transmission_initial_state: v_initial sits on an exceptional point");
  const int dominant = std::abs(basis->right(1, 0)) >= std::abs(basis->right(1, 1)) ? 0 : 1;
  return StateVector2{basis->right.col(dominant), 0.0};
}

StateVector2 random_state(std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector2cd psi;
  for (int i = 0; i < 2; ++i) {
    const double re = normal(engine);
    const double im = normal(engine);
    psi(i) = {re, im};
  }
  return StateVector2{psi.normalized(), 0.0};
}

StateVector2 make_initial_state(InitialState kind, const TwoLevelParams<double>& params, std::uint64_t seed,
                                CouplingMode mode) {
  switch (kind) {
    case InitialState::diabatic_2:
      return StateVector2{};
    case InitialState::random:
      return random_state(seed);
    case InitialState::eigenstate_plus:
    case InitialState::eigenstate_minus: {
      params.validate();
      const auto basis = instantaneous_basis(params.v_initial, params.gamma, mode);
      if (!basis) throw DefectivePointError("initial eigenstate requested at an exceptional point");
      return StateVector2{basis->right.col(kind == InitialState::eigenstate_plus ? 0 : 1), 0.0};
    }
  }
  throw ValidationError("unknown initial state");
}

std::array<double, 2> asymptotic_log_mod_sq(const SweepTrace& trace) {
  require(trace.size() > 0, "asymptotic_log_mod_sq: empty trace");
  const auto& last = trace.log_eigen_mod_sq.back();
  if (!last) throw DefectivePointError("asymptotic_log_mod_sq: trace ends on an exceptional point");
  const auto basis = instantaneous_basis(trace.v_values.back(), trace.params.gamma, trace.mode);
  const int toward_2 = std::abs(basis->right(1, 0)) >= std::abs(basis->right(1, 1)) ? 0 : 1;
  return {(*last)[1 - toward_2], (*last)[toward_2]};
}

double numerical_transmission(const SweepTrace& trace) {
  require(trace.size() > 0, "numerical_transmission: empty trace");
  require(trace.mode == CouplingMode::pt_imaginary, "numerical_transmission: expects a PT-mode trace");
  require(trace.v_values.back() > trace.params.gamma, "numerical_transmission: trace must end above +gamma");
  const auto log_mod = asymptotic_log_mod_sq(trace);
  return transmission_from_log_amplitudes(log_mod[0], log_mod[1]);
}

double diabatic_ratio(const SweepTrace& trace) {
  require(trace.size() > 0, "diabatic_ratio: empty trace");
  const auto& last = trace.log_diabatic_mod_sq.back();
  return transmission_from_log_amplitudes(last[0], last[1]);
}

std::pair<double, double> adiabatic_redistribution_check(const TwoLevelParams<double>& params,
                                                         const StateVector2& initial, const IntegratorConfig& config) {
  const SweepTrace trace = propagate_sweep(params, initial, config);
  const auto& last = trace.populations.back();
  if (!last) throw DefectivePointError("adiabatic_redistribution_check: sweep ends on an exceptional point");
  return {last->plus, last->minus};
}

bool is_adiabatic_regime(const TwoLevelParams<double>& params) {
  return pi_v<double>() * params.gamma * params.gamma / params.alpha > 5.0;
}

double sweep_transmission(double gamma, double alpha, const IntegratorConfig& config, double range_factor) {
  require(range_factor > 1.0, "sweep_transmission: range factor must exceed 1");
  const TwoLevelParams<double> params{gamma, alpha, -range_factor * gamma, range_factor * gamma};
  params.validate_transmission();
  return numerical_transmission(propagate_sweep(params, transmission_initial_state(params), config));
}

ConvergedTransmission converged_transmission(double gamma, double alpha, const IntegratorConfig& config,
                                             double tolerance, double initial_range_factor, int max_doublings) {
  double factor = initial_range_factor;
  double previous = sweep_transmission(gamma, alpha, config, factor);
  for (int doublings = 1; doublings <= max_doublings; ++doublings) {
    factor *= 2.0;
    const double current = sweep_transmission(gamma, alpha, config, factor);
    if (std::abs(current - previous) < tolerance) return {current, factor * gamma, doublings};
    previous = current;
  }
  throw NumericalError("converged_transmission: no convergence after range doublings");
}

}  // namespace ptlz
