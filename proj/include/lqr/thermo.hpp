// Steady-state heat currents, work and entropy production of the driven network.
#pragma once
#include <vector>

#include "lqr/floquet.hpp"
#include "lqr/quadrature.hpp"

namespace lqr {

struct HeatOptions {
  double rel_tol = 1e-9;
  double abs_tol = 0.0;
  double omega_max = 0.0;  // 0: 8 x largest cutoff (and past the support edges)
  std::size_t max_intervals = 400000;
  int threads = 1;
  bool zero_nrh = false;  // drop the non-resonant part (diagnostic)
  // refine until the direct work integral also meets the tolerance; off, it is integrated
  // on the grid the heat currents need (its integrand loses digits near very narrow peaks)
  bool refine_work = true;
};

struct ReservoirHeat {
  double rp = 0.0;     // resonant pumping
  double rh = 0.0;     // resonant heating
  double nrh = 0.0;    // non-resonant heating
  double total = 0.0;  // full heat current into the system from this reservoir
  double error = 0.0;  // quadrature error bound on total
  // total - (rp + rh + nrh); vanishes for time-reversal-invariant drives
  double decomposition_residual = 0.0;
};

struct HeatRateReport {
  std::vector<ReservoirHeat> reservoirs;
  double work_rate = 0.0;         // -sum of heat currents
  double work_rate_direct = 0.0;  // from the drive and the position correlations
  double entropy_production = 0.0;  // -sum Q_a / T_a; NaN if some T_a = 0
  double first_law_residual = 0.0;  // |sum Q + W_direct| / max(1, sum |Q|)
  // integral of the moduli of all terms of the currents; values below ~1e-13 of it are round-off
  double scale = 0.0;
  std::size_t evaluations = 0;
};

// integration setup shared by all frequency integrals of a solution
struct FrequencyPlan {
  double omega_max = 0.0;
  QuadratureSpec spec;
};
FrequencyPlan plan_frequency_integral(const FloquetSolution& sol, double rel_tol, double abs_tol = 0.0,
                                      double omega_max = 0.0);

HeatRateReport heat_rates(const FloquetSolution& sol, const std::vector<ReservoirSpec>& res,
                          const HeatOptions& opt = {});

double heat_rp(std::size_t alpha, const FloquetSolution& sol, const std::vector<ReservoirSpec>& res,
               const HeatOptions& opt = {});
double heat_rh(std::size_t alpha, const FloquetSolution& sol, const std::vector<ReservoirSpec>& res,
               const HeatOptions& opt = {});
// throws UnsupportedConfiguration for drives without time-reversal invariance
double heat_nrh(std::size_t alpha, const FloquetSolution& sol, const std::vector<ReservoirSpec>& res,
                const HeatOptions& opt = {});
double heat_total(std::size_t alpha, const FloquetSolution& sol, const std::vector<ReservoirSpec>& res,
                  const HeatOptions& opt = {});

// spectral transfer matrix Q_ab(w): heat current Q_a = sum_b int Q_ab(w) coth(w / 2 T_b) dw
Matrix transfer_matrix(const FloquetSolution& sol, double omega);

// (pi/2) Tr[I_a(w + k w_d) A_k I_b(w) A_k^+] with I_a taken odd: the signed sideband rate
double sideband_rate(const FloquetSolver& s, const SidebandBlocks& b, int k, std::size_t alpha, std::size_t beta);

// Q_a for an undriven network between reservoirs: int w p0_ab(w) (N_a - N_b) summed over b
double undriven_heat(std::size_t alpha, const FloquetSolution& sol, const std::vector<ReservoirSpec>& res,
                     const HeatOptions& opt = {});

// Sideband cutoff for `opt.method`: start at `start` and double until every heat-rate integrand
// moves by less than 0.1 rel_tol of its largest value between k_max and 2 k_max, sampled on a
// uniform grid and around every resonance. Throws NumericalError past `limit`.
struct KmaxSelection {
  int k_max = 0;
  double change = 0.0;  // the relative change that settled it
  int doublings = 0;
};
KmaxSelection adaptive_k_max(const NetworkModel& model, const std::vector<ReservoirSpec>& res, SolverOptions opt,
                             const HeatOptions& heat = {}, int start = 4, int limit = 64);

}  // namespace lqr
