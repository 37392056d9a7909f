#include "ptlz/bloch.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace ptlz {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::complex<double> kI(0.0, 1.0);

}  // namespace

MomentumGrid::MomentumGrid(long n_k) : n_k_(n_k) {
  require(n_k >= 2 && n_k % 2 == 0, "MomentumGrid: n_k must be even and positive");
}

double MomentumGrid::spacing() const { return 2.0 * kPi / static_cast<double>(n_k_); }

double MomentumGrid::k(long m) const { return spacing() * static_cast<double>(m - n_k_ / 2); }

Eigen::VectorXd MomentumGrid::k_values() const {
  Eigen::VectorXd out(n_k_);
  for (long m = 0; m < n_k_; ++m) out(m) = k(m);
  return out;
}

long MomentumGrid::reduced_begin() const { return (n_k_ + 3) / 4; }  // ceil(n_k / 4)

Eigen::VectorXcd to_quasimomentum(const Eigen::VectorXcd& amplitudes, long first_site, const MomentumGrid& grid) {
  const long n_sites = amplitudes.size();
  const long n_k = grid.size();
  if (n_k < n_sites) throw ValidationError("to_quasimomentum: grid has fewer points than the chain has sites");

  // e^{-i k_m j} = (-1)^j e^{-2 pi i m j / n_k} with j = first_site + n.
  Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(n_k);
  for (long n = 0; n < n_sites; ++n) padded(n) = ((first_site + n) % 2 == 0 ? 1.0 : -1.0) * amplitudes(n);

  Eigen::FFT<double> fft;
  Eigen::VectorXcd spectrum(n_k);
  fft.fwd(spectrum, padded);

  const double scale = 1.0 / std::sqrt(2.0 * kPi);
  const long offset = ((first_site % n_k) + n_k) % n_k;
  for (long m = 0; m < n_k; ++m) {
    const double phase = -2.0 * kPi * static_cast<double>((m * offset) % n_k) / static_cast<double>(n_k);
    spectrum(m) *= scale * std::polar(1.0, phase);
  }
  return spectrum;
}

Eigen::VectorXcd to_quasimomentum(const LatticeState& state, const MomentumGrid& grid) {
  return to_quasimomentum(state.amplitudes, state.first_site, grid);
}

TwoComponentMomentumState split_two_component(const Eigen::VectorXcd& psi_k, const MomentumGrid& grid) {
  const long n_k = grid.size();
  require(psi_k.size() == n_k, "split_two_component: data length differs from the grid");
  const long half = n_k / 2;
  const long begin = grid.reduced_begin();

  TwoComponentMomentumState out;
  out.k.resize(half);
  out.psi1.resize(half);
  out.psi2.resize(half);
  for (long i = 0; i < half; ++i) {
    const long m = begin + i;
    out.k(i) = grid.k(m);
    out.psi1(i) = psi_k(m);
    out.psi2(i) = psi_k((m + half) % n_k);
  }
  return out;
}

Eigen::VectorXcd reassemble(const TwoComponentMomentumState& state, const MomentumGrid& grid) {
  const long n_k = grid.size();
  const long half = n_k / 2;
  require(state.psi1.size() == half && state.psi2.size() == half, "reassemble: components do not match the grid");
  const long begin = grid.reduced_begin();

  Eigen::VectorXcd out(n_k);
  for (long i = 0; i < half; ++i) {
    const long m = begin + i;
    out(m) = state.psi1(i);
    out((m + half) % n_k) = state.psi2(i);
  }
  return out;
}

std::pair<double, double> band_exceptional_points(double gamma_lattice) {
  require(gamma_lattice > 0.0 && gamma_lattice < 2.0, "band_exceptional_points: need 0 < Gamma < 2");
  const double k = std::acos(gamma_lattice / 2.0);
  return {-k, k};
}

ThetaArguments<double> beam_theta_arguments(const GaussianBeam& beam, double k) {
  return {std::complex<double>(-beam.q0 * kPi, beam.sigma_sq * kPi * (k - beam.k0)),
          -2.0 * kPi * kPi * beam.sigma_sq};
}

std::pair<std::complex<double>, std::complex<double>> gaussian_momentum_analytic(const GaussianBeam& beam, double k,
                                                                                  double tolerance) {
  beam.validate();
  require(std::isfinite(k), "gaussian_momentum_analytic: k must be finite");

  // sum_j e^{-(j - q0)^2 / sigma^2} = sqrt(pi) sigma theta3(-q0 pi, e^{-pi^2 sigma^2}) > 0
  const ThetaArguments<double> norm_args{std::complex<double>(-beam.q0 * kPi, 0.0), -kPi * kPi * beam.sigma_sq};
  const ScaledComplex<double> norm = theta3_scaled(norm_args, tolerance);
  require(norm.mantissa.real() > 0.0, "gaussian_momentum_analytic: normalisation theta is not positive");
  const double log_norm_theta = std::log(norm.mantissa.real()) + norm.log_scale;

  const double kappa = k - beam.k0;
  const double log_prefactor = 0.5 * std::log(beam.sigma()) - 0.25 * std::log(kPi) - 0.5 * log_norm_theta -
                               0.5 * beam.sigma_sq * kappa * kappa;
  const std::complex<double> phase = std::exp(-kI * (beam.q0 * k));

  const ThetaArguments<double> args = beam_theta_arguments(beam, k);
  const ScaledComplex<double> t3 = theta3_scaled(args, tolerance);
  const ScaledComplex<double> t2 = theta2_scaled(args, tolerance);
  return {phase * t3.mantissa * std::exp(log_prefactor + t3.log_scale),
          phase * t2.mantissa * std::exp(log_prefactor + t2.log_scale)};
}

std::vector<KExpectation> k_expectation_series(const std::vector<LatticeSample>& trajectory, long first_site,
                                               const MomentumGrid& grid) {
  std::vector<KExpectation> out;
  out.reserve(trajectory.size());
  double centre = 0.0;
  for (const LatticeSample& sample : trajectory) {
    const Eigen::VectorXd weight = to_quasimomentum(sample.amplitudes, first_site, grid).cwiseAbs2();
    double total = 0.0, first = 0.0, second = 0.0;
    for (long m = 0; m < grid.size(); ++m) {
      // Representative of k_m modulo pi inside [centre - pi/2, centre + pi/2).
      const double k = grid.k(m);
      const double shifted = k - kPi * std::floor((k - centre + 0.5 * kPi) / kPi);
      total += weight(m);
      first += weight(m) * shifted;
      second += weight(m) * shifted * shifted;
    }
    if (!(total > 0.0)) throw NumericalError("k_expectation_series: zero momentum density");
    const double mean = first / total;
    const double spread = std::sqrt(std::max(second / total - mean * mean, 0.0));
    out.push_back(KExpectation{sample.time, mean, spread, spread > kPi / 4.0});
    centre = mean;
  }
  return out;
}

EffectiveLzParams effective_lz_params(double gamma_lattice, double force) {
  require(std::isfinite(force) && force > 0.0, "effective_lz_params: force must be positive");
  require(std::isfinite(gamma_lattice) && gamma_lattice >= 0.0, "effective_lz_params: Gamma must be non-negative");
  const double gamma_eff = gamma_lattice / force;
  const double alpha_eff = 2.0 / force;
  const double p_tr = gamma_lattice > 0.0 ? analytic_transmission(gamma_eff, alpha_eff).p_tr : 1.0;
  return {gamma_eff, alpha_eff, p_tr};
}

}  // namespace ptlz
