#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "ptlz/bloch.hpp"

using namespace ptlz;
using cd = std::complex<double>;

namespace {

// One-sided cosine series, summed naively to a fixed order.
cd theta3_naive(cd z, double nome_log, int terms) {
  cd sum = 1.0;
  for (int n = 1; n <= terms; ++n) sum += 2.0 * std::exp(n * n * nome_log) * std::cos(2.0 * n * z);
  return sum;
}

cd theta2_naive(cd z, double nome_log, int terms) {
  cd sum = 0.0;
  for (int n = 0; n <= terms; ++n) sum += std::exp(n * (n + 1) * nome_log) * std::cos((2.0 * n + 1) * z);
  return 2.0 * std::exp(nome_log / 4) * sum;
}

double relative(cd a, cd b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

struct OracleComparison {
  double max_abs_diff;
  double max_modulus;
};

/// Analytic (Psi_1, Psi_2) against the DFT of the position-space beam on a 400-site chain.
OracleComparison compare_with_dft(const GaussianBeam& beam) {
  const LatticeParams chain{0.0, 0.0, 400, -215};
  const MomentumGrid grid(400);
  const auto two = split_two_component(to_quasimomentum(gaussian_beam_state(beam, chain), grid), grid);
  OracleComparison out{0.0, 0.0};
  for (Eigen::Index i = 0; i < two.k.size(); ++i) {
    const auto [psi1, psi2] = gaussian_momentum_analytic(beam, two.k(i));
    out.max_abs_diff = std::max({out.max_abs_diff, std::abs(psi1 - two.psi1(i)), std::abs(psi2 - two.psi2(i))});
    out.max_modulus = std::max({out.max_modulus, std::abs(psi1), std::abs(psi2)});
  }
  return out;
}

}  // namespace

TEST_CASE("MomentumGrid: layout") {
  const MomentumGrid grid(8);
  CHECK(grid.k(0) == doctest::Approx(-M_PI));
  CHECK(grid.k(4) == 0.0);
  CHECK(grid.spacing() == doctest::Approx(M_PI / 4));
  CHECK(grid.reduced_begin() == 2);
  CHECK(grid.k(grid.reduced_begin()) == doctest::Approx(-M_PI / 2));
  CHECK(MomentumGrid(10).k(MomentumGrid(10).reduced_begin()) >= -M_PI / 2);
  CHECK_THROWS_AS(MomentumGrid(7), ValidationError);
  CHECK_THROWS_AS(MomentumGrid(0), ValidationError);
}

TEST_CASE("to_quasimomentum: single excitation is flat") {
  const MomentumGrid grid(16);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(10);
  psi(5) = 1.0;  // site 0 with first_site = -5
  const auto psi_k = to_quasimomentum(psi, -5, grid);
  for (Eigen::Index m = 0; m < psi_k.size(); ++m) CHECK(std::abs(psi_k(m) - 1.0 / std::sqrt(2 * M_PI)) < 1e-15);
}

TEST_CASE("to_quasimomentum: matches the direct sum with e^{-ikj} and obeys Parseval") {
  const MomentumGrid grid(30);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Random(23);
  const long first = -7;
  const auto psi_k = to_quasimomentum(psi, first, grid);
  for (long m = 0; m < grid.size(); ++m) {
    cd direct = 0.0;
    for (long n = 0; n < psi.size(); ++n) direct += std::exp(cd(0, -grid.k(m) * (first + n))) * psi(n);
    CHECK(std::abs(psi_k(m) - direct / std::sqrt(2 * M_PI)) < 1e-13);
  }
  CHECK(grid.spacing() * psi_k.squaredNorm() == doctest::Approx(psi.squaredNorm()).epsilon(1e-13));
  CHECK_THROWS_AS(to_quasimomentum(psi, first, MomentumGrid(20)), ValidationError);
}

TEST_CASE("to_quasimomentum: beam peaks") {
  const LatticeParams chain{0.0, 0.0, 200, -100};
  const MomentumGrid grid(200);
  const auto k = grid.k_values();

  const auto centred = to_quasimomentum(gaussian_beam_state(GaussianBeam{0.0, 0.0, 20.0}, chain), grid);
  Eigen::Index at = 0;
  centred.cwiseAbs().maxCoeff(&at);
  CHECK(k(at) == 0.0);
  // |psi(k)| ~ e^{-sigma^2 k^2 / 2}: width 1 / sigma.
  const Eigen::VectorXd w = centred.cwiseAbs2();
  const double variance = (k.array().square() * w.array()).sum() / w.sum();
  CHECK(std::sqrt(2.0 * variance) == doctest::Approx(1.0 / std::sqrt(20.0)).epsilon(1e-3));

  const auto fig = to_quasimomentum(gaussian_beam_state(GaussianBeam{-15.0, M_PI, 20.0}, chain), grid);
  fig.cwiseAbs().maxCoeff(&at);
  CHECK(std::abs(std::abs(k(at)) - M_PI) < 1e-12);
}

TEST_CASE("split_two_component: examples and round trip") {
  const MomentumGrid grid(12);
  const Eigen::VectorXcd constant = Eigen::VectorXcd::Constant(12, cd(0.3, -0.1));
  const auto c = split_two_component(constant, grid);
  CHECK(c.psi1.size() == 6);
  CHECK((c.psi1 - c.psi2).norm() == 0.0);
  CHECK(c.k(0) >= -M_PI / 2);
  CHECK(c.k(5) < M_PI / 2);

  Eigen::VectorXcd wave(12);
  for (long m = 0; m < 12; ++m) wave(m) = std::exp(cd(0, grid.k(m)));
  const auto w = split_two_component(wave, grid);
  CHECK((w.psi2 + w.psi1).norm() < 1e-14);

  for (long n_k : {12L, 14L, 64L}) {
    const MomentumGrid g(n_k);
    const Eigen::VectorXcd data = Eigen::VectorXcd::Random(n_k);
    CHECK(reassemble(split_two_component(data, g), g) == data);
  }
  CHECK_THROWS_AS(split_two_component(Eigen::VectorXcd::Zero(11), grid), ValidationError);
}

TEST_CASE("split_two_component: broad k0 = 0 beam has an empty second component") {
  const LatticeParams chain{0.0, 0.0, 400, -200};
  const MomentumGrid grid(400);
  const auto two = split_two_component(to_quasimomentum(gaussian_beam_state(GaussianBeam{0.0, 0.0, 80.0}, chain), grid), grid);
  CHECK(two.psi2.cwiseAbs().maxCoeff() < 1e-12 * two.psi1.cwiseAbs().maxCoeff());
}

TEST_CASE("bloch_hamiltonian: entries") {
  const auto h = bloch_hamiltonian(M_PI / 2, 0.7);
  CHECK(std::abs(h(0, 0)) < 1e-15);
  CHECK(h(0, 1) == cd(0, 0.7));
  const auto h0 = bloch_hamiltonian(0.0, 0.2);
  CHECK(h0(0, 0) == cd(-2, 0));
  CHECK(h0(1, 1) == cd(2, 0));
  CHECK(h0(1, 0) == cd(0, 0.2));
}

TEST_CASE("dispersion: reference values") {
  const auto [a, b] = dispersion(0.0, 0.2);
  CHECK(a.real() == doctest::Approx(std::sqrt(3.96)).epsilon(1e-15));
  CHECK(std::abs(a.real() - 1.98997) < 1e-5);
  CHECK(b == -a);
  const auto [c, d] = dispersion(M_PI / 2, 0.2);
  CHECK(c.real() == 0.0);
  CHECK(c.imag() == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(d == -c);
  CHECK(band_exceptional_points(0.2).second == doctest::Approx(1.470629).epsilon(1e-6));
  CHECK_THROWS_AS(band_exceptional_points(2.0), ValidationError);
}

TEST_CASE("theta functions: reference value, identity and limits") {
  const cd t = theta3(ThetaArguments<double>{0.0, -10.0});
  CHECK(t.real() == doctest::Approx(1.0 + 2 * std::exp(-10.0) + 2 * std::exp(-40.0)).epsilon(1e-15));
  CHECK(t.real() == doctest::Approx(1.0000908).epsilon(1e-7));

  // theta2(z) = e^{iz + L/4} theta3(z - iL/2) at random arguments.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> re(-4.0, 4.0), im(-3.0, 3.0), nome(-5.0, -0.05);
  for (int n = 0; n < 100; ++n) {
    const double L = nome(rng);
    const cd z(re(rng), im(rng));
    const cd lhs = theta2(ThetaArguments<double>{z, L});
    const cd rhs = std::exp(cd(0, 1) * z + L / 4) * theta3(ThetaArguments<double>{z - cd(0, L / 2), L});
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }

  const cd broad3 = theta3(ThetaArguments<double>{cd(0.3, 0.0), -1e4});
  const cd broad2 = theta2(ThetaArguments<double>{cd(0.3, 0.0), -1e4});
  CHECK(std::abs(broad3 - 1.0) < 1e-300);
  CHECK(std::abs(broad2) < 1e-300);
  CHECK_THROWS_AS(theta3(ThetaArguments<double>{0.0, 0.0}), ValidationError);
}

TEST_CASE("theta functions: agree with the naive cosine series") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> re(-3.0, 3.0), im(-1.0, 1.0), nome(-3.0, -0.3);
  for (int n = 0; n < 50; ++n) {
    const ThetaArguments<double> args{cd(re(rng), im(rng)), nome(rng)};
    CHECK(relative(theta3(args), theta3_naive(args.z, args.nome_log, 60)) < 1e-12);
    CHECK(relative(theta2(args), theta2_naive(args.z, args.nome_log, 60)) < 1e-12);
  }
}

TEST_CASE("theta functions: large Im z in scaled form") {
  // sigma^2 = 80 beam at the reduced-zone edge: terms reach e^{~790}.
  const GaussianBeam beam{-15.0, M_PI, 80.0};
  const auto args = beam_theta_arguments(beam, -M_PI / 2);
  const auto scaled = theta3_scaled(args);
  CHECK(scaled.log_scale > 700.0);
  CHECK(std::isfinite(std::abs(scaled.mantissa)));
  CHECK(std::abs(scaled.mantissa) > 0.5);
  CHECK_THROWS_AS(theta3(args), NumericalError);
  CHECK(std::isfinite(std::abs(gaussian_momentum_analytic(beam, -M_PI / 2).first)));
}

TEST_CASE("gaussian_momentum_analytic: periodicity and component suppression") {
  const GaussianBeam beam{-15.0, M_PI, 20.0};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> k(-M_PI, M_PI);
  for (int n = 0; n < 50; ++n) {
    const double kk = k(rng);
    const cd a = gaussian_momentum_analytic(beam, kk).first;
    const cd b = gaussian_momentum_analytic(beam, kk + 2 * M_PI).first;
    CHECK(std::abs(a - b) < 1e-10 * std::max(1.0, std::abs(a)));
  }
  const auto [psi1, psi2] = gaussian_momentum_analytic(beam, beam.k0);
  CHECK(std::abs(psi2) / std::abs(psi1) < 1e-15);
}

TEST_CASE("gaussian_momentum_analytic: agrees with the DFT of the beam") {
  for (double sigma_sq : {5.0, 20.0, 80.0}) {
    const auto cmp = compare_with_dft(GaussianBeam{-15.0, M_PI, sigma_sq});
    CHECK(cmp.max_abs_diff / cmp.max_modulus < 1e-8);
  }
}

TEST_CASE("k_expectation_series: zero force, k0 = pi, and the acceleration theorem") {
  const GaussianBeam beam{-15.0, M_PI, 100.0};
  {
    const auto p = auto_lattice_params(beam, 0.2, 0.0, 20.0);
    const auto samples = evolve(gaussian_beam_state(beam, p), p, 20.0, default_lattice_integrator(), 5.0);
    const auto series = k_expectation_series(samples, p.site_offset, MomentumGrid(p.n_sites));
    CHECK(std::abs(series.front().mean_k) < 1e-12);
    for (const auto& e : series) {
      CHECK(std::abs(e.mean_k - series.front().mean_k) < 1e-6);
      CHECK_FALSE(e.ambiguous);
    }
  }
  {
    const double force = 0.1;
    const double t_half = bloch_period(force) / 2;
    const auto p = auto_lattice_params(beam, 0.2, force, t_half);
    const auto samples = evolve(gaussian_beam_state(beam, p), p, t_half, default_lattice_integrator(), t_half / 20);
    const auto series = k_expectation_series(samples, p.site_offset, MomentumGrid(p.n_sites));
    Eigen::MatrixXd design(series.size(), 2);
    Eigen::VectorXd y(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
      design(i, 0) = 1.0;
      design(i, 1) = series[i].time;
      y(i) = series[i].mean_k;
      CHECK_FALSE(series[i].ambiguous);
    }
    const Eigen::Vector2d fit = design.colPivHouseholderQr().solve(y);
    CHECK(fit(1) == doctest::Approx(-force).epsilon(0.02));
    CHECK(series.back().mean_k < -M_PI / 2);  // crossed the reduced-zone edge, still continuous
  }
}

TEST_CASE("effective_lz_params") {
  const auto a = effective_lz_params(0.2, 0.1);
  CHECK(a.gamma_eff == doctest::Approx(2.0));
  CHECK(a.alpha_eff == doctest::Approx(20.0));
  CHECK(a.p_tr == doctest::Approx(0.6819).epsilon(1e-4));
  CHECK(a.p_tr == analytic_transmission(a.gamma_eff, a.alpha_eff).p_tr);
  CHECK(effective_lz_params(0.2, 1e6).p_tr == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(effective_lz_params(0.2, 0.001).p_tr == doctest::Approx(1.0 / (2.0 - std::exp(-20.0 * M_PI))).epsilon(1e-15));
  CHECK(std::abs(effective_lz_params(0.2, 0.001).p_tr - 0.5) < 1e-6);
  CHECK_THROWS_AS(effective_lz_params(0.2, 0.0), ValidationError);
}

// ---------------------------------------------------------------------------
// Properties
// ---------------------------------------------------------------------------

TEST_CASE("property: sigma_z h*(k) sigma_z = h(k) and h(k) = H(2 cos k)") {
  Matrix2c<double> sz;
  sz << 1.0, 0.0, 0.0, -1.0;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> k(-M_PI, M_PI), g(1e-3, 3.0);
  for (int n = 0; n < 500; ++n) {
    const double kk = k(rng), gg = g(rng);
    const auto h = bloch_hamiltonian(kk, gg);
    CHECK((sz * h.conjugate() * sz - h).norm() == 0.0);
    CHECK(h == hamiltonian(2.0 * std::cos(kk), gg));
  }
}

TEST_CASE("property: band exceptional points at k = +-arccos(Gamma / 2)") {
  using mp = boost::multiprecision::cpp_bin_float_50;
  for (double g : {0.05, 0.2, 1.0, 1.7, 1.99}) {
    const mp gamma(g);
    const mp k_star = boost::multiprecision::acos(gamma / 2);
    for (const mp& k : {k_star, mp(-k_star)}) {
      const auto [ep, em] = dispersion<mp>(k, gamma);
      const mp size = boost::multiprecision::abs(ep.real()) + boost::multiprecision::abs(ep.imag());
      CHECK(size < mp(1e-10));
    }
  }
}

TEST_CASE("property: purely imaginary bands above Gamma = 2") {
  for (int i = 0; i <= 2000; ++i) {
    const double k = -M_PI + 2 * M_PI * i / 2000.0;
    const auto [ep, em] = dispersion(k, 2.5);
    CHECK(ep.real() == 0.0);
    CHECK(em.real() == 0.0);
  }
}

TEST_CASE("property: halving the theta tolerance moves the result by less than the tolerance") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> re(-3.0, 3.0), im(-20.0, 20.0), nome(-50.0, -0.01);
  for (double tol : {1e-6, 1e-10, 1e-14}) {
    for (int n = 0; n < 30; ++n) {
      const ThetaArguments<double> args{cd(re(rng), im(rng)), nome(rng)};
      for (auto f : {&theta3_scaled<double>, &theta2_scaled<double>}) {
        const auto a = f(args, tol);
        const auto b = f(args, tol / 2);
        CHECK(a.log_scale == b.log_scale);
        CHECK(std::abs(a.mantissa - b.mantissa) < tol);
      }
    }
  }
}

TEST_CASE("property: analytic momentum representation across widths") {
  for (double sigma_sq : {5.0, 20.0, 80.0})
    for (double q0 : {-15.0, -14.5, 3.25}) {
      const auto cmp = compare_with_dft(GaussianBeam{q0, M_PI, sigma_sq});
      CHECK(cmp.max_abs_diff / cmp.max_modulus < 1e-8);
    }
}
