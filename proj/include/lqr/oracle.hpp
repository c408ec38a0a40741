// Brute-force check of the frequency-domain pipeline: every reservoir is replaced by a finite
// set of oscillators and the closed system's covariance is propagated in time.
#pragma once
#include <string>
#include <vector>

#include "lqr/model.hpp"

namespace lqr {

// One reservoir on a midpoint grid w_j = (j - 1/2) dw, dw = omega_max / N, unit masses and
// C_j^2 = w_j I(w_j) dw, so that I(w) = sum_j C_j^2 / w_j delta(w - w_j). A reservoir coupled to
// several sites gets an independent copy of the modes for each site.
struct DiscretizedBath {
  std::string name;
  std::vector<int> sites;
  Vector frequencies;
  Vector couplings;
  double spacing = 0.0;
  double temperature = 0.0;

  int modes() const { return static_cast<int>(frequencies.size()); }
  // the discrete kernels repeat after 2 pi / dw
  double recurrence_time() const;
};

// highest frequency where I exceeds `tail` times its maximum
double significant_edge(const SpectralDensity& j, double tail = 1e-6);

// omega_max <= 0 picks significant_edge(I)
DiscretizedBath discretize(const ReservoirSpec& r, int modes, double omega_max = 0.0);

// largest relative deviation of the discrete spectral weight from int I over bins of width `bin`
// (bins carrying less than 1e-3 of the largest bin are skipped)
double spectral_sum_error(const DiscretizedBath& b, const SpectralDensity& j, double bin);

struct OracleOptions {
  int modes = 300;               // per reservoir and coupled site
  double omega_max = 0.0;        // <= 0: per reservoir, from significant_edge
  int min_steps_per_period = 64;
  double max_phase_step = 0.1;   // the stepper keeps omega_max * h below this
  int burn_in_periods = 100;
  int average_periods = 50;
  // undriven networks have no period; this sets the bookkeeping block (<= 0: 2 pi / lowest mode)
  double block = 0.0;
  double periodicity_tol = 1e-5;  // relative, system block at consecutive period ends
  bool require_periodic = true;   // false: report the periodicity instead of throwing
  // initial system covariance [[xx, xp], [px, pp]]; empty: thermal state of the renormalized,
  // undamped network at the mean reservoir temperature
  Matrix initial_system;
  std::size_t max_dimension = 4000;  // phase-space rows
};

// what is kept of the full covariance: system blocks over the last period and energies at a
// few period ends (the full (2n + 2 sum N)^2 matrix is only formed where needed)
struct OracleTrajectory {
  NetworkModel model;
  std::vector<std::vector<int>> reservoir_sites;
  double period = 0.0;
  int steps_per_period = 0;
  int burn_in_periods = 0, average_periods = 0;

  // period ends k = burn_in - 1, burn_in, burn_in + average - 1, burn_in + average
  std::vector<double> end_times;
  std::vector<Matrix> end_system;               // 2n x 2n
  std::vector<std::vector<double>> end_bath_energy;  // per reservoir
  std::vector<double> end_system_energy;

  // the final period, steps_per_period + 1 samples
  std::vector<double> times;
  std::vector<Matrix> system;

  double periodicity = 0.0;  // largest relative change of the system block over one period
};

// Integrates the closed system with a fourth-order symplectic splitting over one period and
// reaches later periods by powers of the one-period propagator.
// Throws UnsupportedConfiguration if the horizon reaches a bath's recurrence time or the phase
// space is too large, NumericalError naming the time if the state blows up, and NumericalError
// if the system block is not periodic after the burn-in.
OracleTrajectory simulate(const NetworkModel& model, const std::vector<DiscretizedBath>& baths,
                          const OracleOptions& opt = {});

struct OracleHeat {
  // heat leaving the reservoir, -d<H_bath>/dt averaged over the averaging window
  double heat = 0.0;
  // bath-side rate d<H_bath>/dt over the final period
  double bath_side = 0.0;
  // system side over the final period: 1/2 Tr[P dpp/dt M^-1] + Tr[P V xp M^-1] with P the site projector;
  // NaN when another reservoir couples to an overlapping, different set of sites
  double system_side = 0.0;
  double derivative_term = 0.0;  // the first (total-derivative) term alone
  // |system_side + sum of bath_side over reservoirs on the same sites|
  double identity_residual = 0.0;
};

// throws NumericalError if the per-cycle identity fails by more than 2% of the rates
OracleHeat measure_heat(const OracleTrajectory& tr, std::size_t alpha);

// d<H_S>/dt averaged over the averaging window
double system_energy_drift(const OracleTrajectory& tr);

// discretize, simulate and measure every reservoir
struct OracleComparison {
  std::vector<OracleHeat> heat;
  double energy_drift = 0.0;
  double periodicity = 0.0;
  int dimension = 0;
};
OracleComparison run_oracle(const NetworkModel& model, const std::vector<ReservoirSpec>& reservoirs,
                            const OracleOptions& opt = {});

}  // namespace lqr
