#pragma once

// Jacobi theta functions with the nome held as its logarithm L = log q < 0:
//   theta3(z) = sum_m q^{m^2} e^{2imz}
//   theta2(z) = sum_m q^{(m+1/2)^2} e^{i(2m+1)z}
// Bilateral sums are taken outward from the largest term, so large Im z (where
// terms grow before they decay) and tiny nomes (q = e^{-2 pi^2 sigma^2}) need
// no special casing. Results come back as mantissa * e^{log_scale}.

#include <cmath>
#include <complex>
#include <limits>

#include "ptlz/errors.hpp"

namespace ptlz {

template <typename Scalar = double>
struct ThetaArguments {
  std::complex<Scalar> z;
  Scalar nome_log;  // log q; must be negative

  void validate() const {
    using std::isfinite;
    require(isfinite(z.real()) && isfinite(z.imag()), "theta: z must be finite");
    require(isfinite(nome_log) && nome_log < Scalar(0), "theta: nome_log must be negative and finite");
  }
};

/// value = mantissa * e^{log_scale}
template <typename Scalar = double>
struct ScaledComplex {
  std::complex<Scalar> mantissa;
  Scalar log_scale;

  std::complex<Scalar> value() const {
    using std::exp;
    return mantissa * exp(log_scale);
  }
};

inline constexpr double kDefaultThetaTolerance = 1e-17;

namespace detail {

/// sum_m exp(L (m + c)^2 + i (2m + 2c) z) for c in {0, 1/2}.
template <typename Scalar>
ScaledComplex<Scalar> theta_series(const ThetaArguments<Scalar>& args, Scalar shift, Scalar tolerance) {
  using std::exp;
  using std::floor;
  using std::log;
  args.validate();
  require(tolerance > Scalar(0) && tolerance < Scalar(1), "theta: tolerance must lie in (0, 1)");

  const Scalar L = args.nome_log;
  const Scalar a = args.z.real();
  const Scalar b = args.z.imag();
  // Term n = m + c has log-modulus L n^2 - 2 b n and phase 2 a n.
  auto log_modulus = [&](Scalar n) { return L * n * n - Scalar(2) * b * n; };
  auto term = [&](Scalar n, Scalar reference) {
    return std::polar(exp(log_modulus(n) - reference), Scalar(2) * a * n);
  };

  const Scalar peak = floor(b / L - shift + Scalar(0.5)) + shift;  // nearest admissible n to b / L
  const Scalar reference = log_modulus(peak);
  const Scalar cutoff = log(tolerance);

  std::complex<Scalar> sum = term(peak, reference);
  // Beyond the peak terms shrink monotonically and faster than geometrically,
  // so the first one under the cutoff bounds the tail.
  for (int direction : {-1, 1}) {
    for (Scalar n = peak + Scalar(direction);; n += Scalar(direction)) {
      if (log_modulus(n) - reference < cutoff) break;
      sum += term(n, reference);
    }
  }
  return {sum, reference};
}

}  // namespace detail

template <typename Scalar>
ScaledComplex<Scalar> theta3_scaled(const ThetaArguments<Scalar>& args,
                                    Scalar tolerance = Scalar(kDefaultThetaTolerance)) {
  return detail::theta_series<Scalar>(args, Scalar(0), tolerance);
}

template <typename Scalar>
ScaledComplex<Scalar> theta2_scaled(const ThetaArguments<Scalar>& args,
                                    Scalar tolerance = Scalar(kDefaultThetaTolerance)) {
  return detail::theta_series<Scalar>(args, Scalar(0.5), tolerance);
}

/// Throws NumericalError when the value overflows.
template <typename Scalar>
std::complex<Scalar> theta3(const ThetaArguments<Scalar>& args, Scalar tolerance = Scalar(kDefaultThetaTolerance)) {
  const std::complex<Scalar> v = theta3_scaled(args, tolerance).value();
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NumericalError("theta3: value overflows");
  return v;
}

template <typename Scalar>
std::complex<Scalar> theta2(const ThetaArguments<Scalar>& args, Scalar tolerance = Scalar(kDefaultThetaTolerance)) {
  const std::complex<Scalar> v = theta2_scaled(args, tolerance).value();
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NumericalError("theta2: value overflows");
  return v;
}

}  // namespace ptlz
