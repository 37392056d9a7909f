#pragma once

// PT-symmetric two-level model H(v) = [[-v, i*gamma], [i*gamma, v]]: exact
// spectrum, biorthogonal eigenbasis, instantaneous populations and the
// closed-form transmission through the pair of exceptional points v = +-gamma.

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "ptlz/errors.hpp"

namespace ptlz {

template <typename Scalar>
using Complex = std::complex<Scalar>;
template <typename Scalar>
using Vector2c = Eigen::Matrix<Complex<Scalar>, 2, 1>;
template <typename Scalar>
using Matrix2c = Eigen::Matrix<Complex<Scalar>, 2, 2>;

template <typename Scalar>
Scalar pi_v() {
  using std::acos;
  return acos(Scalar(-1));
}

inline constexpr double kDefaultEpTolerance = 1e-8;

class DefectivePointError : public ValidationError {
 public:
  explicit DefectivePointError(const std::string& what) : ValidationError(what) {}
};

template <typename Scalar = double>
struct TwoLevelParams {
  Scalar gamma{1};
  Scalar alpha{1};
  Scalar v_initial{-20};
  Scalar v_final{20};

  void validate() const {
    using std::isfinite;
    require(isfinite(gamma) && isfinite(alpha) && isfinite(v_initial) && isfinite(v_final),
            "two-level parameters must be finite");
    require(gamma > 0, "gamma must be positive");
    require(alpha > 0, "alpha must be positive");
    require(v_initial < v_final, "v_initial must be below v_final");
  }

  /// A transmission run must start below -gamma and end above +gamma.
  void validate_transmission() const {
    validate();
    require(v_initial < -gamma && v_final > gamma,
            "sweep must bracket both exceptional points (v_initial < -gamma, v_final > gamma)");
  }

  Scalar t_initial() const { return v_initial / alpha; }
  Scalar t_final() const { return v_final / alpha; }
};

/// Columns hold the (+, -) branch. Right eigenvectors are unit-norm with the
/// first nonzero component real-positive; left ones satisfy L_i^H R_j = delta_ij.
template <typename Scalar = double>
struct EigenBasis {
  Matrix2c<Scalar> right;
  Matrix2c<Scalar> left;
};

template <typename Scalar = double>
struct SpectralData {
  Complex<Scalar> lambda_plus;
  Complex<Scalar> lambda_minus;
  std::optional<EigenBasis<Scalar>> basis;  // empty at an exceptional point
  Scalar overlap{0};
  bool at_exceptional_point{false};
};

template <typename Scalar = double>
struct TransmissionResult {
  Scalar p_tr{};
  Scalar beta{};
  Scalar asymptotic_mod_psi1_sq{};  // e^{2 pi beta} - 1, +inf once it overflows
  Scalar asymptotic_mod_psi2_sq{};  // e^{2 pi beta}
  Scalar log_mod_psi1_sq{};
  Scalar log_mod_psi2_sq{};
  bool saturated{false};
};

template <typename Scalar>
Matrix2c<Scalar> hamiltonian(Scalar v, Scalar gamma) {
  using std::isfinite;
  require(isfinite(v) && isfinite(gamma), "hamiltonian: non-finite input");
  require(gamma > 0, "hamiltonian: gamma must be positive");
  const Complex<Scalar> coupling(Scalar(0), gamma);
  Matrix2c<Scalar> h;
  h << Complex<Scalar>(-v), coupling, coupling, Complex<Scalar>(v);
  return h;
}

/// Root of a real discriminant on the labelling branch: Re >= 0 when real,
/// Im > 0 when imaginary.
template <typename Scalar>
Complex<Scalar> principal_root(Scalar discriminant) {
  using std::sqrt;
  if (discriminant >= 0) return {sqrt(discriminant), Scalar(0)};
  return {Scalar(0), sqrt(-discriminant)};
}

namespace detail {

template <typename Scalar>
Vector2c<Scalar> phase_fixed(Vector2c<Scalar> x) {
  using std::abs;
  const Scalar n = x.norm();
  x /= n;
  const Complex<Scalar> lead =
      abs(x(0)) > Scalar(64) * std::numeric_limits<Scalar>::epsilon() ? x(0) : x(1);
  return x * std::conj(lead / abs(lead));
}

/// Right eigenvector of a 2x2 matrix for eigenvalue `lambda`, taken from the
/// better-conditioned of the two row null-vectors.
template <typename Scalar>
Vector2c<Scalar> right_eigenvector(const Matrix2c<Scalar>& h, Complex<Scalar> lambda) {
  Vector2c<Scalar> from_first_row(h(0, 1), lambda - h(0, 0));
  Vector2c<Scalar> from_second_row(lambda - h(1, 1), h(1, 0));
  const bool first = from_first_row.squaredNorm() >= from_second_row.squaredNorm();
  const Vector2c<Scalar>& x = first ? from_first_row : from_second_row;
  // Only a multiple of the identity gets here, which no model in this library produces.
  require(x.squaredNorm() > Scalar(0), "right_eigenvector: matrix is a multiple of the identity");
  return phase_fixed<Scalar>(x);
}

template <typename Scalar>
EigenBasis<Scalar> eigenbasis(const Matrix2c<Scalar>& h, Complex<Scalar> lambda_plus,
                              Complex<Scalar> lambda_minus) {
  EigenBasis<Scalar> basis;
  basis.right.col(0) = right_eigenvector<Scalar>(h, lambda_plus);
  basis.right.col(1) = right_eigenvector<Scalar>(h, lambda_minus);
  basis.left = basis.right.inverse().adjoint();
  return basis;
}

}  // namespace detail

template <typename Scalar>
SpectralData<Scalar> spectrum(Scalar v, Scalar gamma, Scalar ep_tolerance = Scalar(kDefaultEpTolerance)) {
  using std::abs;
  const Matrix2c<Scalar> h = hamiltonian(v, gamma);
  require(ep_tolerance > 0, "spectrum: ep_tolerance must be positive");

  // (v - gamma)(v + gamma) keeps relative accuracy near the exceptional points.
  const Scalar discriminant = (v - gamma) * (v + gamma);
  SpectralData<Scalar> out;
  out.lambda_plus = principal_root(discriminant);
  out.lambda_minus = -out.lambda_plus;
  out.at_exceptional_point = abs(discriminant) < ep_tolerance * ep_tolerance;
  if (out.at_exceptional_point) {
    out.overlap = Scalar(1);
    return out;
  }
  out.basis = detail::eigenbasis<Scalar>(h, out.lambda_plus, out.lambda_minus);
  out.overlap = abs(out.basis->right.col(0).dot(out.basis->right.col(1)));
  return out;
}

/// Normalised biorthogonal projection (p_plus, p_minus) of `psi`.
template <typename Scalar>
std::pair<Scalar, Scalar> instantaneous_populations(const Vector2c<Scalar>& psi, const EigenBasis<Scalar>& basis) {
  const Vector2c<Scalar> coeff = basis.left.adjoint() * psi;
  const Scalar plus = std::norm(coeff(0));
  const Scalar minus = std::norm(coeff(1));
  const Scalar total = plus + minus;
  require(total > 0, "instantaneous_populations: zero state");
  return {plus / total, minus / total};
}

template <typename Scalar>
std::pair<Scalar, Scalar> instantaneous_populations(const Vector2c<Scalar>& psi, const SpectralData<Scalar>& spectral) {
  if (spectral.at_exceptional_point || !spectral.basis)
    throw DefectivePointError("instantaneous_populations: eigenbasis is defective at an exceptional point");
  return instantaneous_populations<Scalar>(psi, *spectral.basis);
}

/// P = |psi2|^2 / (|psi1|^2 + |psi2|^2) from log|psi1|^2 and log|psi2|^2.
template <typename Scalar>
Scalar transmission_from_log_amplitudes(Scalar log_mod_psi1_sq, Scalar log_mod_psi2_sq) {
  using std::exp;
  return Scalar(1) / (Scalar(1) + exp(log_mod_psi1_sq - log_mod_psi2_sq));
}

template <typename Scalar>
TransmissionResult<Scalar> analytic_transmission(Scalar gamma, Scalar alpha) {
  using std::exp;
  using std::expm1;
  using std::isfinite;
  using std::log;
  using std::log1p;
  require(isfinite(gamma) && isfinite(alpha), "analytic_transmission: non-finite input");
  require(gamma > 0 && alpha > 0, "analytic_transmission: gamma and alpha must be positive");

  TransmissionResult<Scalar> out;
  out.beta = gamma * gamma / (Scalar(2) * alpha);
  const Scalar exponent = pi_v<Scalar>() * gamma * gamma / alpha;  // 2 pi beta
  out.log_mod_psi2_sq = exponent;
  out.log_mod_psi1_sq = exponent < Scalar(1) ? log(expm1(exponent)) : exponent + log1p(-exp(-exponent));
  out.saturated = exponent >= log(std::numeric_limits<Scalar>::max());
  if (out.saturated) {
    out.asymptotic_mod_psi1_sq = std::numeric_limits<Scalar>::infinity();
    out.asymptotic_mod_psi2_sq = std::numeric_limits<Scalar>::infinity();
    out.p_tr = Scalar(1) / Scalar(2);
  } else {
    out.asymptotic_mod_psi1_sq = expm1(exponent);
    out.asymptotic_mod_psi2_sq = exp(exponent);
    out.p_tr = Scalar(1) / (Scalar(2) - exp(-exponent));
  }
  return out;
}

template <typename Scalar>
std::pair<Scalar, Scalar> exceptional_points(Scalar gamma) {
  require(gamma > 0, "exceptional_points: gamma must be positive");
  return {-gamma, gamma};
}

}  // namespace ptlz
