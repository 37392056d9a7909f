#pragma once

// Quasimomentum picture of the PT lattice. Bloch states <j|k> = e^{ikj}/sqrt(2 pi);
// the two-component function Psi(k) = (psi(k), psi(k + pi)) lives on the reduced
// zone [-pi/2, pi/2) and obeys i Psi' = h(k) Psi with
//   h(k) = [[-2 cos k, i Gamma], [i Gamma, 2 cos k]].

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ptlz/lattice.hpp"
#include "ptlz/theta.hpp"
#include "ptlz/two_level.hpp"

namespace ptlz {

/// n_k points k_m = -pi + 2 pi m / n_k, m = 0 .. n_k - 1.
class MomentumGrid {
 public:
  explicit MomentumGrid(long n_k);

  long size() const { return n_k_; }
  double spacing() const;
  double k(long m) const;
  Eigen::VectorXd k_values() const;
  /// First index of the reduced zone [-pi/2, pi/2); it spans n_k / 2 points.
  long reduced_begin() const;

 private:
  long n_k_;
};

struct TwoComponentMomentumState {
  Eigen::VectorXd k;      // reduced-zone grid
  Eigen::VectorXcd psi1;  // psi(k)
  Eigen::VectorXcd psi2;  // psi(k + pi)
};

/// psi(k_m) = (1/sqrt(2 pi)) sum_j e^{-i k_m j} psi_j for the unit-norm
/// amplitudes (the state's log_norm is not applied). Parseval:
/// (2 pi / n_k) sum_m |psi(k_m)|^2 = sum_j |psi_j|^2.
Eigen::VectorXcd to_quasimomentum(const Eigen::VectorXcd& amplitudes, long first_site, const MomentumGrid& grid);
Eigen::VectorXcd to_quasimomentum(const LatticeState& state, const MomentumGrid& grid);

TwoComponentMomentumState split_two_component(const Eigen::VectorXcd& psi_k, const MomentumGrid& grid);
/// Inverse of split_two_component.
Eigen::VectorXcd reassemble(const TwoComponentMomentumState& state, const MomentumGrid& grid);

template <typename Scalar>
Matrix2c<Scalar> bloch_hamiltonian(Scalar k, Scalar gamma_lattice) {
  using std::cos;
  const Scalar v = Scalar(2) * cos(k);
  const Complex<Scalar> coupling(Scalar(0), gamma_lattice);
  Matrix2c<Scalar> h;
  h << Complex<Scalar>(-v), coupling, coupling, Complex<Scalar>(v);
  return h;
}

/// E_{+-}(k) = +-sqrt(4 cos^2 k - Gamma^2) on the two_level branch.
template <typename Scalar>
std::pair<Complex<Scalar>, Complex<Scalar>> dispersion(Scalar k, Scalar gamma_lattice) {
  using std::cos;
  const Scalar v = Scalar(2) * cos(k);
  const Complex<Scalar> e = principal_root<Scalar>((v - gamma_lattice) * (v + gamma_lattice));
  return {e, -e};
}

/// Band exceptional points +-arccos(Gamma / 2); requires 0 < Gamma < 2.
std::pair<double, double> band_exceptional_points(double gamma_lattice);

/// Exact (Psi_1(k), Psi_2(k)) of the normalised discrete Gaussian beam on an
/// infinite chain. Psi_1 is psi(k) itself and is valid for every real k.
std::pair<std::complex<double>, std::complex<double>> gaussian_momentum_analytic(
    const GaussianBeam& beam, double k, double tolerance = kDefaultThetaTolerance);

/// Theta arguments z = i sigma^2 pi (k - k0) - q0 pi, log q = -2 pi^2 sigma^2.
ThetaArguments<double> beam_theta_arguments(const GaussianBeam& beam, double k);

struct KExpectation {
  double time;
  double mean_k;  // unwrapped, continuous in time
  double spread;  // standard deviation within the window
  bool ambiguous;  // spread > pi / 4: the mod-pi unwrap cannot be trusted
};

/// <k>_t = sum k Psi^H Psi / sum Psi^H Psi over a pi-wide window. The weight
/// is pi-periodic, so each sample uses the window centred on the previous
/// mean (the reduced zone for the first), which unwraps the series.
std::vector<KExpectation> k_expectation_series(const std::vector<LatticeSample>& trajectory, long first_site,
                                               const MomentumGrid& grid);

struct EffectiveLzParams {
  double gamma_eff;  // Gamma / F
  double alpha_eff;  // 2 / F
  double p_tr;       // (2 - e^{-pi Gamma^2 / 2F})^{-1}
};

EffectiveLzParams effective_lz_params(double gamma_lattice, double force);

}  // namespace ptlz
