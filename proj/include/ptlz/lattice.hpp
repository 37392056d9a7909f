#pragma once

// PT-symmetric tight-binding chain with alternating gain/loss and a static force:
//   (H psi)(j) = -psi(j+1) - psi(j-1) + [i Gamma (-1)^j + F j] psi(j)
// on the open chain j in [site_offset, site_offset + n_sites).

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "ptlz/ode.hpp"

namespace ptlz {

struct LatticeParams {
  double gamma_lattice = 0.0;
  double force = 0.0;
  long n_sites = 0;
  long site_offset = 0;

  void validate() const;
  /// Band exceptional points exist only for Gamma < 2.
  bool has_band_exceptional_points() const { return gamma_lattice < 2.0; }
  long first_site() const { return site_offset; }
  long last_site() const { return site_offset + n_sites - 1; }
};

struct GaussianBeam {
  double q0 = -15.0;
  double k0 = 3.141592653589793;
  double sigma_sq = 20.0;

  void validate() const;
  double sigma() const;
  /// Half-width of the region the beam must fit into: 6 sigma.
  double support_radius() const { return 6.0 * sigma(); }
};

struct LatticeState {
  Eigen::VectorXcd amplitudes;  // unit norm
  double log_norm = 0.0;        // physical state = amplitudes * e^{log_norm}
  double time = 0.0;
  long first_site = 0;

  Eigen::VectorXd density() const { return amplitudes.cwiseAbs2(); }
};

struct LatticeSample {
  double time;
  Eigen::VectorXcd amplitudes;  // unit norm
  double log_norm;

  /// |psi_j|^2 / sum |psi|^2
  Eigen::VectorXd density() const { return amplitudes.cwiseAbs2(); }
};

struct BranchPopulations {
  double upper_fraction;
  double lower_fraction;
  long split_index;  // absolute site; sites >= split_index form the upper branch
};

struct MinimumBetweenPeaks {
  double min_separation;              // sites
  double prominence_fraction = 0.01;  // of the global maximum
  /// Peaks are searched on the density after a [1,2,1]/4 filter (removes the
  /// two-site sublattice modulation) and a Gaussian blur whose width steps
  /// 0, 0.25, 0.5, ... up to this bound (sites); the first width giving exactly
  /// two peaks wins. Branch weights always use the raw density.
  double max_smoothing_width = 0.0;
};
struct FixedSplit {
  long site;
};
/// Least-squares fit of two Gaussians to the sublattice-filtered density; the
/// upper fraction is the fitted weight of the component at larger site index.
/// For branches too close to show a minimum between them.
struct TwoGaussianFit {
  double min_separation;  // sites between fitted centres
};
using SplitPolicy = std::variant<MinimumBetweenPeaks, FixedSplit, TwoGaussianFit>;

class BranchDetectionError : public NumericalError {
 public:
  explicit BranchDetectionError(const std::string& what) : NumericalError(what) {}
};

class EdgeDensityError : public NumericalError {
 public:
  explicit EdgeDensityError(const std::string& what) : NumericalError(what) {}
};

inline constexpr long kEdgeGuardSites = 5;
inline constexpr double kEdgeGuardDensity = 1e-8;

/// Immutable H action; O(n_sites) per application.
class LatticeHamiltonian {
 public:
  explicit LatticeHamiltonian(const LatticeParams& params);

  void apply(const Eigen::VectorXcd& psi, Eigen::VectorXcd& out) const;
  Eigen::VectorXcd operator()(const Eigen::VectorXcd& psi) const;
  /// Dense matrix, for tests and small chains.
  Eigen::MatrixXcd dense() const;

  const LatticeParams& params() const { return params_; }
  const Eigen::VectorXcd& onsite() const { return onsite_; }

 private:
  LatticeParams params_;
  Eigen::VectorXcd onsite_;
};

LatticeHamiltonian build_hamiltonian_action(const LatticeParams& params);

/// +1 on even sites (gain), -1 on odd sites (loss); j is the absolute index.
inline int sublattice_sign(long j) { return (j % 2 == 0) ? 1 : -1; }

LatticeState gaussian_beam_state(const GaussianBeam& beam, const LatticeParams& params);

/// Smallest even chain covering q0 +- (6 sigma + 2 t_final) plus the edge guard band.
LatticeParams auto_lattice_params(const GaussianBeam& beam, double gamma_lattice, double force, double t_final);

/// Fraction of density within kEdgeGuardSites of either end.
double edge_density(const Eigen::VectorXcd& amplitudes);

/// Integrates i psi' = H psi from state.time to t_final. Samples at
/// state.time + n * sample_every and at t_final.
std::vector<LatticeSample> evolve(const LatticeState& state, const LatticeParams& params, double t_final,
                                  const IntegratorConfig& config, double sample_every);

/// `density` indexed from `first_site`.
BranchPopulations branch_populations(const Eigen::VectorXd& density, const SplitPolicy& policy, long first_site = 0);

double bloch_period(double force);

enum class BranchMethod { minimum_between_peaks, two_gaussian_fit };

struct LatticeTransmission {
  double force;
  double gamma_lattice;
  double upper_fraction;
  double p_tr_formula;
  double abs_diff;
  long split_index;
  BranchMethod method;
};

/// Evolves the beam for half a Bloch period and compares the upper-branch
/// weight with (2 - e^{-pi Gamma^2 / 2F})^{-1}. Branches are split at the
/// minimum between peaks (separation 4 sigma / 3); when that finds no two
/// peaks the result comes from TwoGaussianFit and `method` says so.
LatticeTransmission lattice_transmission(double gamma_lattice, double force, const GaussianBeam& beam,
                                         const IntegratorConfig& config);

/// Integrator defaults used for lattice runs.
IntegratorConfig default_lattice_integrator();

}  // namespace ptlz
