#pragma once

// Explicit Runge-Kutta stepping for linear Schroedinger-type systems stored as
// Eigen vectors. The driver hands every accepted step to a callback that may
// rescale the state in place (used for log-norm renormalisation).

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "ptlz/errors.hpp"

namespace ptlz {

enum class IntegrationMethod { adaptive_embedded_rk45, fixed_rk4 };

struct IntegratorConfig {
  double rel_tolerance = 1e-9;
  double abs_tolerance = 1e-12;
  double max_step = 0.5;
  double initial_step = 1e-3;
  /// fixed_rk4 uses min(max_step, initial_step) as its step.
  IntegrationMethod method = IntegrationMethod::adaptive_embedded_rk45;

  void validate() const {
    require(rel_tolerance > 0 && abs_tolerance > 0, "integrator tolerances must be positive");
    require(max_step > 0 && initial_step > 0, "integrator step sizes must be positive");
  }
};

std::string to_string(IntegrationMethod method);
IntegrationMethod integration_method_from_string(const std::string& name);

/// Steps `y' = rhs(t, y)` forward. `Vec` is an Eigen column vector type; `rhs`
/// is callable as `rhs(double t, const Vec& y, Vec& dydt)`.
template <typename Vec>
class RungeKuttaStepper {
 public:
  explicit RungeKuttaStepper(IntegratorConfig config) : config_(config), step_(config.initial_step) {
    config_.validate();
  }

  /// Advance from `t` to `t_end` (t < t_end). `on_accept(t, y)` runs after each
  /// accepted step and may modify `y`.
  template <typename Rhs, typename OnAccept>
  void advance(Vec& y, double& t, double t_end, Rhs&& rhs, OnAccept&& on_accept) {
    if (config_.method == IntegrationMethod::fixed_rk4)
      advance_fixed(y, t, t_end, rhs, on_accept);
    else
      advance_adaptive(y, t, t_end, rhs, on_accept);
  }

  std::size_t accepted_steps() const { return accepted_; }
  std::size_t rejected_steps() const { return rejected_; }

 private:
  template <typename Rhs, typename OnAccept>
  void advance_fixed(Vec& y, double& t, double t_end, Rhs& rhs, OnAccept& on_accept) {
    const double h_nominal = std::min(config_.max_step, config_.initial_step);
    const auto n_steps = static_cast<long>(std::ceil((t_end - t) / h_nominal - 1e-9));
    const double t_start = t;
    const double h = (t_end - t_start) / static_cast<double>(std::max(n_steps, 1L));
    resize_work(y);
    for (long n = 0; n < std::max(n_steps, 1L); ++n) {
      rhs(t, y, k1_);
      rhs(t + 0.5 * h, y + 0.5 * h * k1_, k2_);
      rhs(t + 0.5 * h, y + 0.5 * h * k2_, k3_);
      rhs(t + h, y + h * k3_, k4_);
      y += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
      t = (n + 1 == std::max(n_steps, 1L)) ? t_end : t_start + static_cast<double>(n + 1) * h;
      check_finite(y, t);
      ++accepted_;
      on_accept(t, y);
    }
  }

  // Dormand-Prince 5(4), local extrapolation, max-norm error control.
  template <typename Rhs, typename OnAccept>
  void advance_adaptive(Vec& y, double& t, double t_end, Rhs& rhs, OnAccept& on_accept) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b - b_hat
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    resize_work(y);
    while (t < t_end) {
      double h = std::min({step_, config_.max_step, t_end - t});
      const bool last = h >= t_end - t;
      if (h <= 1e-14 * std::max(1.0, std::abs(t)))
        throw NumericalError("step-size underflow at t = " + std::to_string(t));

      rhs(t, y, k1_);
      rhs(t + c2 * h, y + h * (a21 * k1_), k2_);
      rhs(t + c3 * h, y + h * (a31 * k1_ + a32 * k2_), k3_);
      rhs(t + c4 * h, y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_), k4_);
      rhs(t + c5 * h, y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_), k5_);
      rhs(t + h, y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_), k6_);
      y_new_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
      const double t_new = last ? t_end : t + h;
      rhs(t_new, y_new_, k7_);
      err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);

      double err_norm = 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double scale =
            config_.abs_tolerance + config_.rel_tolerance * std::max(std::abs(y(i)), std::abs(y_new_(i)));
        err_norm = std::max(err_norm, std::abs(err_(i)) / scale);
      }
      if (!std::isfinite(err_norm)) err_norm = 1e10;

      if (err_norm <= 1.0) {
        y.swap(y_new_);
        t = t_new;
        check_finite(y, t);
        ++accepted_;
        on_accept(t, y);
        const double grow = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
        // Keep the unclipped proposal when the step was shortened to hit t_end.
        if (!last || h == step_) step_ = h * grow;
      } else {
        ++rejected_;
        step_ = h * std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
      }
    }
  }

  void resize_work(const Vec& y) {
    for (Vec* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &y_new_, &err_}) k->resize(y.size());
  }

  static void check_finite(const Vec& y, double t) {
    if (!y.allFinite()) throw NumericalError("non-finite state at t = " + std::to_string(t));
  }

  IntegratorConfig config_;
  double step_;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
  Vec k1_, k2_, k3_, k4_, k5_, k6_, k7_, y_new_, err_;
};

}  // namespace ptlz
