#include <doctest.h>

#include <cmath>

#include "ptlz/propagator.hpp"

using namespace ptlz;

namespace {

IntegratorConfig tight() { return IntegratorConfig{}; }

TwoLevelParams<double> sweep(double gamma, double alpha, double v_i, double v_f) {
  return TwoLevelParams<double>{gamma, alpha, v_i, v_f};
}

}  // namespace

TEST_CASE("StateVector2: physical round trip") {
  const Vector2cd psi(std::complex<double>(3, 4), 12.0);
  const auto s = StateVector2::from_physical(psi);
  CHECK(s.amplitudes.norm() == doctest::Approx(1.0));
  CHECK(s.log_norm == doctest::Approx(std::log(13.0)));
  CHECK((s.physical() - psi).norm() < 1e-13);
  CHECK(s.log_mod_sq()[1] == doctest::Approx(std::log(144.0)));
  CHECK_THROWS_AS(StateVector2::from_physical(Vector2cd::Zero()), ValidationError);
}

TEST_CASE("propagate_sweep: Hermitian Landau-Zener survival") {
  // |psi_2|^2 at large positive v against e^{-pi Delta^2 / alpha}.
  const auto p = sweep(0.25, 0.5, -20.0, 20.0);
  const auto trace = propagate_sweep(p, transmission_initial_state(p, CouplingMode::hermitian_real), tight(),
                                     CouplingMode::hermitian_real);
  const auto log_mod = asymptotic_log_mod_sq(trace);
  CHECK(std::abs(std::exp(log_mod[1]) - std::exp(-M_PI / 8.0)) < 1e-3);
}

TEST_CASE("propagate_sweep: asymptotic PT amplitudes e^{2 pi} - 1 and e^{2 pi}") {
  const auto p = sweep(1.0, 0.5, -20.0, 20.0);
  const auto trace = propagate_sweep(p, transmission_initial_state(p), tight());
  const auto log_mod = asymptotic_log_mod_sq(trace);
  CHECK(std::exp(log_mod[0]) == doctest::Approx(std::exp(2 * M_PI) - 1).epsilon(0.01));
  CHECK(std::exp(log_mod[1]) == doctest::Approx(std::exp(2 * M_PI)).epsilon(0.01));
}

TEST_CASE("propagate_sweep: decoupled levels stay put") {
  const auto p = sweep(1e-12, 0.7, -5.0, 5.0);
  const auto trace = propagate_sweep(p, StateVector2{}, tight());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    CHECK(std::abs(trace.log_norm[i]) < 1e-8);
    CHECK(std::exp(trace.log_diabatic_mod_sq[i][1]) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("propagate_sweep: trace shape and population normalisation") {
  const auto p = sweep(1.0, 0.5, -5.0, 5.0);
  const auto trace = propagate_sweep(p, random_state(7), tight());
  REQUIRE(trace.size() > 10);
  CHECK(trace.v_values.size() == trace.size());
  CHECK(trace.populations.size() == trace.size());
  CHECK(trace.log_norm.size() == trace.size());
  CHECK(trace.log_diabatic_mod_sq.size() == trace.size());
  CHECK(trace.times.front() == doctest::Approx(-10.0));
  CHECK(trace.times.back() == doctest::Approx(10.0));
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace.times[i] > trace.times[i - 1]);
  for (const auto& pop : trace.populations)
    if (pop) CHECK(std::abs(pop->plus + pop->minus - 1.0) < 1e-12);
  CHECK(std::abs(trace.final_state.amplitudes.norm() - 1.0) < 1e-14);
}

TEST_CASE("propagate_sweep: populations are undefined exactly at an exceptional point") {
  // Fixed steps of 0.25 in t from t = -4 land on v = alpha t = -1 = -gamma.
  IntegratorConfig fixed;
  fixed.method = IntegrationMethod::fixed_rk4;
  fixed.initial_step = 0.25;
  const auto p = sweep(1.0, 0.5, -2.0, 2.0);
  const auto trace = propagate_sweep(p, random_state(3), fixed);
  int undefined = 0;
  for (std::size_t i = 0; i < trace.size(); ++i)
    if (!trace.populations[i]) {
      ++undefined;
      CHECK(std::abs(std::abs(trace.v_values[i]) - 1.0) < 1e-8);
    }
  CHECK(undefined == 2);
}

TEST_CASE("propagate_sweep: input validation") {
  StateVector2 bad;
  bad.amplitudes << 1.0, 1.0;
  CHECK_THROWS_AS(propagate_sweep(sweep(1, 1, -5, 5), bad, tight()), ValidationError);
  CHECK_THROWS_AS(propagate_sweep(sweep(1, -1, -5, 5), StateVector2{}, tight()), ValidationError);
  CHECK_THROWS_AS(propagate_sweep(sweep(1, 1, 5, -5), StateVector2{}, tight()), ValidationError);
  IntegratorConfig broken;
  broken.rel_tolerance = 0.0;
  CHECK_THROWS_AS(propagate_sweep(sweep(1, 1, -5, 5), StateVector2{}, broken), ValidationError);
}

TEST_CASE("propagate_sweep: step-size underflow is a numerical error") {
  IntegratorConfig hopeless;
  hopeless.rel_tolerance = 1e-30;
  hopeless.abs_tolerance = 1e-300;
  CHECK_THROWS_AS(propagate_sweep(sweep(1, 0.5, -5, 5), StateVector2{}, hopeless), NumericalError);
}

TEST_CASE("numerical_transmission: reference sweeps") {
  CHECK(sweep_transmission(1.0, 0.5, tight()) == doctest::Approx(0.5004677).epsilon(2e-3));
  CHECK(std::abs(sweep_transmission(1.0, 5.0, tight()) - 1.0 / (2.0 - std::exp(-M_PI / 5.0))) < 2e-3);
}

TEST_CASE("numerical_transmission: contract") {
  const auto p = sweep(1.0, 1.0, -5.0, 5.0);
  const auto hermitian = propagate_sweep(p, StateVector2{}, tight(), CouplingMode::hermitian_real);
  CHECK_THROWS_AS(numerical_transmission(hermitian), ValidationError);
  const auto short_run = propagate_sweep(sweep(1.0, 1.0, -5.0, 0.5), StateVector2{}, tight());
  CHECK_THROWS_AS(numerical_transmission(short_run), ValidationError);
  CHECK_THROWS_AS(numerical_transmission(SweepTrace{}), ValidationError);
  CHECK_THROWS_AS(sweep(1.0, 1.0, -0.5, 5.0).validate_transmission(), ValidationError);
}

TEST_CASE("adiabatic_redistribution_check: eigenstate and random starts") {
  const auto p = sweep(1.0, 0.5, -5.0, 5.0);
  REQUIRE(is_adiabatic_regime(p));
  for (InitialState kind : {InitialState::eigenstate_plus, InitialState::eigenstate_minus}) {
    const auto [pp, pm] = adiabatic_redistribution_check(p, make_initial_state(kind, p), tight());
    CHECK(std::abs(pp - 0.5) < 0.05);
    CHECK(std::abs(pm - 0.5) < 0.05);
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto [pp, pm] = adiabatic_redistribution_check(p, random_state(seed), tight());
    CHECK(std::abs(pp - 0.5) < 0.05);
    CHECK(std::abs(pm - 0.5) < 0.05);
  }
}

TEST_CASE("adiabatic_redistribution_check: a quench keeps the initial populations") {
  const auto p = sweep(1.0, 1e3, -20.0, 20.0);
  CHECK_FALSE(is_adiabatic_regime(p));
  const auto [pp, pm] = adiabatic_redistribution_check(p, StateVector2{}, tight());
  // (0, 1) is the minus eigenstate at large negative v and the plus one at large positive v.
  CHECK(pp > 0.99);
  CHECK(pm < 0.01);
}

TEST_CASE("random_state: seeded, unit norm, distinct seeds differ") {
  const auto a = random_state(42);
  const auto b = random_state(42);
  const auto c = random_state(43);
  CHECK(a.amplitudes == b.amplitudes);
  CHECK(a.amplitudes != c.amplitudes);
  CHECK(a.amplitudes.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("converged_transmission: range doubling settles") {
  const auto r = converged_transmission(1.0, 2.0, tight());
  CHECK(r.doublings >= 1);
  CHECK(r.p_tr == doctest::Approx(analytic_transmission(1.0, 2.0).p_tr).epsilon(2e-3));
}

// ---------------------------------------------------------------------------
// Properties
// ---------------------------------------------------------------------------

TEST_CASE("property: Hermitian control conserves the norm") {
  // Embedded RK drifts in norm roughly in proportion to its tolerance.
  IntegratorConfig strict;
  strict.rel_tolerance = 1e-12;
  strict.abs_tolerance = 1e-15;
  for (double gamma : {0.1, 0.5, 2.0})
    for (double alpha : {0.1, 1.0, 10.0}) {
      const auto p = sweep(gamma, alpha, -20.0 * gamma, 20.0 * gamma);
      const auto trace = propagate_sweep(p, random_state(11), strict, CouplingMode::hermitian_real);
      CHECK(std::abs(trace.log_norm.back()) < 1e-8);
    }
}

namespace {

/// Worst relative gap between d(log_norm)/dt and Im lambda_+ for |v| < gamma / 2.
double worst_growth_gap(double alpha) {
  const auto p = sweep(1.0, alpha, -20.0, 20.0);
  const auto trace = propagate_sweep(p, transmission_initial_state(p), tight());
  double worst = 0.0;
  int points = 0;
  for (std::size_t i = 1; i + 1 < trace.size(); ++i) {
    const double v = trace.v_values[i];
    if (std::abs(v) > 0.5) continue;
    const double slope = (trace.log_norm[i + 1] - trace.log_norm[i - 1]) / (trace.times[i + 1] - trace.times[i - 1]);
    const double expected = spectrum(v, 1.0).lambda_plus.imag();
    worst = std::max(worst, std::abs(slope - expected) / expected);
    ++points;
  }
  REQUIRE(points > 3);
  return worst;
}

}  // namespace

TEST_CASE("property: log-norm growth between the exceptional points follows Im lambda") {
  // log_norm is on the amplitude scale, so 2 d(log_norm)/dt is the intensity
  // rate 2 Im lambda_+. The gap is a first-order non-adiabatic correction.
  const double adiabatic = worst_growth_gap(0.05);  // pi gamma^2 / alpha ~ 63
  CHECK(adiabatic < 0.05);
  CHECK(worst_growth_gap(0.01) < 0.3 * adiabatic);
}

TEST_CASE("property: total gain e^{pi gamma^2 / alpha}") {
  for (double alpha : {0.5, 1.0, 4.0}) {
    const auto p = sweep(1.0, alpha, -20.0, 20.0);
    const auto trace = propagate_sweep(p, transmission_initial_state(p), tight());
    const double gain = std::exp(asymptotic_log_mod_sq(trace)[1]);
    CHECK(gain == doctest::Approx(std::exp(M_PI / alpha)).epsilon(0.01));
  }
}

TEST_CASE("property: tolerance halving moves the transmission by less than its accuracy") {
  IntegratorConfig loose;
  loose.rel_tolerance = 1e-7;
  loose.abs_tolerance = 1e-10;
  IntegratorConfig half = loose;
  half.rel_tolerance /= 2;
  half.abs_tolerance /= 2;
  for (double alpha : {0.3, 3.0}) {
    const double a = sweep_transmission(1.0, alpha, loose);
    const double b = sweep_transmission(1.0, alpha, half);
    CHECK(std::abs(a - b) < 2e-3);
  }
}

TEST_CASE("property: fixed RK4 on a fine grid agrees with the adaptive integrator") {
  IntegratorConfig fixed;
  fixed.method = IntegrationMethod::fixed_rk4;
  fixed.initial_step = 2e-3;
  for (double alpha : {0.5, 5.0}) {
    const double adaptive = sweep_transmission(1.0, alpha, tight());
    const double rk4 = sweep_transmission(1.0, alpha, fixed);
    CHECK(std::abs(adaptive - rk4) < 1e-6);
  }
}
