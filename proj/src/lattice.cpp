#include "ptlz/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "ptlz/two_level.hpp"

namespace ptlz {

namespace {

constexpr std::complex<double> kI(0.0, 1.0);

struct Peak {
  Eigen::Index index;
  double height;
  double prominence;
};

std::vector<Peak> find_peaks(const Eigen::VectorXd& d) {
  const Eigen::Index n = d.size();
  std::vector<Peak> peaks;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool rises = i == 0 || d(i) > d(i - 1);
    // Plateaus count once, at their left edge.
    Eigen::Index j = i;
    while (j + 1 < n && d(j + 1) == d(i)) ++j;
    const bool falls = j == n - 1 || d(j + 1) < d(i);
    if (!(rises && falls)) continue;

    double left_min = d(i);
    for (Eigen::Index l = i - 1; l >= 0 && d(l) <= d(i); --l) left_min = std::min(left_min, d(l));
    double right_min = d(i);
    for (Eigen::Index r = j + 1; r < n && d(r) <= d(i); ++r) right_min = std::min(right_min, d(r));
    peaks.push_back({i, d(i), d(i) - std::max(left_min, right_min)});
    i = j;
  }
  return peaks;
}

Eigen::VectorXd gaussian_smooth(const Eigen::VectorXd& d, double width) {
  if (width <= 0.0) return d;
  const auto reach = static_cast<Eigen::Index>(std::ceil(4.0 * width));
  Eigen::VectorXd kernel(2 * reach + 1);
  for (Eigen::Index m = -reach; m <= reach; ++m)
    kernel(m + reach) = std::exp(-0.5 * static_cast<double>(m * m) / (width * width));
  kernel /= kernel.sum();
  const Eigen::Index n = d.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index m = -reach; m <= reach; ++m)
      if (i + m >= 0 && i + m < n) out(i) += kernel(m + reach) * d(i + m);
  return out;
}

Eigen::VectorXd sublattice_filter(const Eigen::VectorXd& d) {
  const Eigen::Index n = d.size();
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double left = i > 0 ? d(i - 1) : d(i);
    const double right = i + 1 < n ? d(i + 1) : d(i);
    out(i) = 0.25 * left + 0.5 * d(i) + 0.25 * right;
  }
  return out;
}

std::vector<Peak> separated_peaks(const Eigen::VectorXd& profile, const MinimumBetweenPeaks& rule) {
  const double threshold = rule.prominence_fraction * profile.maxCoeff();
  std::vector<Peak> candidates;
  for (const Peak& p : find_peaks(profile))
    if (p.prominence >= threshold) candidates.push_back(p);
  std::sort(candidates.begin(), candidates.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
  std::vector<Peak> accepted;
  for (const Peak& p : candidates) {
    const bool isolated = std::all_of(accepted.begin(), accepted.end(), [&](const Peak& q) {
      return std::abs(static_cast<double>(p.index - q.index)) >= rule.min_separation;
    });
    if (isolated) accepted.push_back(p);
  }
  return accepted;
}

constexpr double kSmoothingStep = 0.25;

// Residuals of a1 g(m1, s1) + a2 g(m2, s2) against samples (x, y).
struct MixtureResidual {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  Eigen::VectorXd x, y;
  int n_gaussians = 2;

  int inputs() const { return 3 * n_gaussians; }
  int values() const { return static_cast<int>(x.size()); }

  static double bump(double xi, double amplitude, double centre, double width) {
    const double u = (xi - centre) / width;
    return amplitude * std::exp(-0.5 * u * u);
  }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& residual) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      double model = 0.0;
      for (int g = 0; g < n_gaussians; ++g) model += bump(x(i), p(3 * g), p(3 * g + 1), p(3 * g + 2));
      residual(i) = model - y(i);
    }
    return 0;
  }
};

Eigen::VectorXd fit_mixture(const Eigen::VectorXd& x, const Eigen::VectorXd& y, Eigen::VectorXd start) {
  MixtureResidual f{x, y, static_cast<int>(start.size() / 3)};
  Eigen::NumericalDiff<MixtureResidual, Eigen::Central> diff(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<MixtureResidual, Eigen::Central>> lm(diff);
  lm.parameters.maxfev = 4000;
  lm.minimize(start);
  return start;
}

struct TwoComponents {
  double lower_weight, upper_weight, lower_centre, upper_centre;
};

TwoComponents two_gaussian_decomposition(const Eigen::VectorXd& density, double min_separation) {
  const Eigen::VectorXd y = sublattice_filter(density) / density.maxCoeff();
  const Eigen::Index n = y.size();
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));

  // One Gaussian from the moments, then seed the second at the largest residual.
  const double mass = y.sum();
  const double mean = x.dot(y) / mass;
  const double var = (x.array() - mean).square().matrix().dot(y) / mass;
  Eigen::Index top = 0;
  y.maxCoeff(&top);
  Eigen::VectorXd one(3);
  one << y(top), x(top), std::sqrt(std::max(var, 1.0)) / 2.0;
  one = fit_mixture(x, y, one);
  Eigen::VectorXd residual(n);
  for (Eigen::Index i = 0; i < n; ++i) residual(i) = y(i) - MixtureResidual::bump(x(i), one(0), one(1), one(2));
  Eigen::Index second = 0;
  residual.maxCoeff(&second);

  Eigen::VectorXd two(6);
  two << one(0), one(1), std::abs(one(2)), std::max(residual(second), 1e-3), x(second), std::abs(one(2));
  two = fit_mixture(x, y, two);

  const double w1 = two(0) * std::abs(two(2));
  const double w2 = two(3) * std::abs(two(5));
  if (!two.allFinite() || w1 <= 0.0 || w2 <= 0.0 || std::abs(two(1) - two(4)) < min_separation ||
      std::min(two(1), two(4)) < 0.0 || std::max(two(1), two(4)) > static_cast<double>(n - 1))
    throw BranchDetectionError("branch_populations: two-Gaussian fit did not resolve two branches");
  if (two(1) < two(4)) return {w1, w2, two(1), two(4)};
  return {w2, w1, two(4), two(1)};
}

}  // namespace

void LatticeParams::validate() const {
  require(std::isfinite(gamma_lattice) && gamma_lattice >= 0.0, "lattice: Gamma must be finite and >= 0");
  require(std::isfinite(force) && force >= 0.0, "lattice: force must be finite and >= 0");
  require(n_sites > 0 && n_sites % 2 == 0, "lattice: n_sites must be a positive even integer");
}

void GaussianBeam::validate() const {
  require(std::isfinite(q0) && std::isfinite(k0) && std::isfinite(sigma_sq), "beam: non-finite parameter");
  require(sigma_sq > 0.0, "beam: sigma_sq must be positive");
  require(std::abs(k0) <= pi_v<double>() + 1e-12, "beam: k0 must lie in [-pi, pi]");
}

double GaussianBeam::sigma() const { return std::sqrt(sigma_sq); }

LatticeHamiltonian::LatticeHamiltonian(const LatticeParams& params) : params_(params) {
  params_.validate();
  onsite_.resize(params_.n_sites);
  for (long n = 0; n < params_.n_sites; ++n) {
    const long j = params_.site_offset + n;
    onsite_(n) = {params_.force * static_cast<double>(j), params_.gamma_lattice * sublattice_sign(j)};
  }
}

void LatticeHamiltonian::apply(const Eigen::VectorXcd& psi, Eigen::VectorXcd& out) const {
  const Eigen::Index n = onsite_.size();
  out.resize(n);
  out = onsite_.cwiseProduct(psi);
  if (n > 1) {
    out.head(n - 1) -= psi.tail(n - 1);
    out.tail(n - 1) -= psi.head(n - 1);
  }
}

Eigen::VectorXcd LatticeHamiltonian::operator()(const Eigen::VectorXcd& psi) const {
  Eigen::VectorXcd out;
  apply(psi, out);
  return out;
}

Eigen::MatrixXcd LatticeHamiltonian::dense() const {
  const Eigen::Index n = onsite_.size();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  h.diagonal() = onsite_;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    h(i, i + 1) = -1.0;
    h(i + 1, i) = -1.0;
  }
  return h;
}

LatticeHamiltonian build_hamiltonian_action(const LatticeParams& params) { return LatticeHamiltonian(params); }

LatticeState gaussian_beam_state(const GaussianBeam& beam, const LatticeParams& params) {
  beam.validate();
  params.validate();
  const double radius = beam.support_radius();
  if (beam.q0 - radius < static_cast<double>(params.first_site()) ||
      beam.q0 + radius > static_cast<double>(params.last_site()))
    throw ValidationError("gaussian_beam_state: beam support q0 +- 6 sigma leaves the chain");

  LatticeState state;
  state.first_site = params.site_offset;
  state.amplitudes.resize(params.n_sites);
  for (long n = 0; n < params.n_sites; ++n) {
    const double x = static_cast<double>(params.site_offset + n) - beam.q0;
    state.amplitudes(n) = std::exp(-x * x / (2.0 * beam.sigma_sq)) * std::exp(kI * (beam.k0 * x));
  }
  state.amplitudes.normalize();
  return state;
}

LatticeParams auto_lattice_params(const GaussianBeam& beam, double gamma_lattice, double force, double t_final) {
  beam.validate();
  require(t_final >= 0.0, "auto_lattice_params: t_final must be non-negative");
  const double radius = beam.support_radius() + 2.0 * t_final + static_cast<double>(kEdgeGuardSites) + 1.0;
  const long first = static_cast<long>(std::floor(beam.q0 - radius));
  const long last = static_cast<long>(std::ceil(beam.q0 + radius));
  long n = last - first + 1;
  if (n % 2 != 0) ++n;
  return LatticeParams{gamma_lattice, force, n, first};
}

double edge_density(const Eigen::VectorXcd& amplitudes) {
  const Eigen::Index n = amplitudes.size();
  const Eigen::Index band = std::min<Eigen::Index>(kEdgeGuardSites, n);
  const double edges = amplitudes.head(band).squaredNorm() + amplitudes.tail(band).squaredNorm();
  return edges / amplitudes.squaredNorm();
}

std::vector<LatticeSample> evolve(const LatticeState& state, const LatticeParams& params, double t_final,
                                  const IntegratorConfig& config, double sample_every) {
  config.validate();
  const LatticeHamiltonian h(params);
  require(state.amplitudes.size() == params.n_sites, "evolve: state size does not match the chain");
  require(std::abs(state.amplitudes.norm() - 1.0) < 1e-10, "evolve: state amplitudes must be unit-norm");
  require(t_final >= state.time, "evolve: t_final precedes the state time");
  require(sample_every > 0.0, "evolve: sample_every must be positive");
  if (edge_density(state.amplitudes) >= kEdgeGuardDensity)
    throw EdgeDensityError("evolve: initial density already touches the chain boundary");

  auto rhs = [&h](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dydt) {
    h.apply(y, dydt);
    dydt *= -kI;
  };

  Eigen::VectorXcd y = state.amplitudes;
  double log_norm = state.log_norm;
  double t = state.time;
  std::vector<LatticeSample> samples{{t, y, log_norm}};

  RungeKuttaStepper<Eigen::VectorXcd> stepper(config);
  auto on_accept = [&](double t_now, Eigen::VectorXcd& psi) {
    const double n = psi.norm();
    psi /= n;
    log_norm += std::log(n);
    if (edge_density(psi) >= kEdgeGuardDensity)
      throw EdgeDensityError("evolve: beam reached the chain boundary at t = " + std::to_string(t_now));
  };

  for (long k = 1;; ++k) {
    double target = state.time + static_cast<double>(k) * sample_every;
    if (target > t_final - 1e-12 * std::max(1.0, std::abs(t_final))) target = t_final;
    if (target > t) stepper.advance(y, t, target, rhs, on_accept);
    samples.push_back({t, y, log_norm});
    if (target == t_final) break;
  }
  return samples;
}

BranchPopulations branch_populations(const Eigen::VectorXd& density, const SplitPolicy& policy, long first_site) {
  const Eigen::Index n = density.size();
  require(n > 0, "branch_populations: empty density");
  const double total = density.sum();
  require(total > 0.0 && std::isfinite(total), "branch_populations: density must have positive finite weight");

  Eigen::Index split = 0;
  if (const auto* fit = std::get_if<TwoGaussianFit>(&policy)) {
    const TwoComponents c = two_gaussian_decomposition(density, fit->min_separation);
    const double upper = c.upper_weight / (c.lower_weight + c.upper_weight);
    const auto midpoint = static_cast<long>(std::lround(0.5 * (c.lower_centre + c.upper_centre)));
    return BranchPopulations{upper, 1.0 - upper, first_site + midpoint};
  }
  if (const auto* fixed = std::get_if<FixedSplit>(&policy)) {
    split = fixed->site - first_site;
    require(split >= 0 && split <= n, "branch_populations: fixed split outside the chain");
  } else {
    const auto& rule = std::get<MinimumBetweenPeaks>(policy);
    const Eigen::VectorXd filtered = sublattice_filter(density);
    std::size_t found = 0;
    for (double width = 0.0; width <= rule.max_smoothing_width + 1e-12; width += kSmoothingStep) {
      const Eigen::VectorXd profile = gaussian_smooth(filtered, width);
      const auto peaks = separated_peaks(profile, rule);
      found = peaks.size();
      if (found != 2) continue;
      const Eigen::Index lo = std::min(peaks[0].index, peaks[1].index);
      const Eigen::Index hi = std::max(peaks[0].index, peaks[1].index);
      Eigen::Index at = lo;
      profile.segment(lo, hi - lo + 1).minCoeff(&at);
      split = lo + at;
      break;
    }
    if (found != 2)
      throw BranchDetectionError("branch_populations: expected two prominent peaks, found " + std::to_string(found));
  }

  const double upper = density.tail(n - split).sum() / total;
  return BranchPopulations{upper, 1.0 - upper, first_site + static_cast<long>(split)};
}

double bloch_period(double force) {
  require(std::isfinite(force) && force > 0.0, "bloch_period: force must be positive");
  return 2.0 * pi_v<double>() / force;
}

IntegratorConfig default_lattice_integrator() {
  IntegratorConfig config;
  config.rel_tolerance = 1e-9;
  config.abs_tolerance = 1e-12;
  config.max_step = 0.25;
  config.initial_step = 1e-2;
  return config;
}

LatticeTransmission lattice_transmission(double gamma_lattice, double force, const GaussianBeam& beam,
                                         const IntegratorConfig& config) {
  const double t_half = 0.5 * bloch_period(force);
  const LatticeParams params = auto_lattice_params(beam, gamma_lattice, force, t_half);
  const LatticeState initial = gaussian_beam_state(beam, params);
  const auto samples = evolve(initial, params, t_half, config, t_half);
  const Eigen::VectorXd density = samples.back().density();
  const double separation = 4.0 * beam.sigma() / 3.0;

  BranchMethod method = BranchMethod::minimum_between_peaks;
  BranchPopulations split{};
  try {
    split = branch_populations(density, MinimumBetweenPeaks{separation, 0.01, beam.sigma()}, params.site_offset);
  } catch (const BranchDetectionError&) {
    method = BranchMethod::two_gaussian_fit;
    split = branch_populations(density, TwoGaussianFit{separation}, params.site_offset);
  }
  const double formula =
      gamma_lattice > 0.0 ? analytic_transmission(gamma_lattice / force, 2.0 / force).p_tr : 1.0;
  return LatticeTransmission{force,
                             gamma_lattice,
                             split.upper_fraction,
                             formula,
                             std::abs(split.upper_fraction - formula),
                             split.split_index,
                             method};
}

}  // namespace ptlz
