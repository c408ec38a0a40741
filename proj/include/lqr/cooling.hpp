// Cooling a finite reservoir by resonant pumping: T_min search, cooling trajectories.
#pragma once
#include <limits>
#include <string>
#include <vector>

#include "lqr/thermo.hpp"

namespace lqr {

// A family of configurations indexed by (gamma0, T, w_d). Reservoir strengths are relative
// to gamma0; `v_static` is the renormalized static potential, so the resonance stays put as
// the coupling changes.
struct CoolingTemplate {
  NetworkModel model;
  std::vector<ReservoirSpec> reservoirs;
  std::size_t alpha = 0;  // the reservoir being cooled
  // temperature of every other reservoir; NaN: equal to the cooled one
  double other_temperature = std::numeric_limits<double>::quiet_NaN();
  SolverOptions solver;
  HeatOptions heat;

  struct Instance {
    NetworkModel model;
    std::vector<ReservoirSpec> reservoirs;
  };
  Instance instantiate(double gamma0, double t_alpha, double drive_frequency) const;
  // resonance of the lowest mode at this coupling (the Omega_0 that w_d = Omega_0 - T tracks)
  double resonance(double gamma0) const;
};

// single oscillator, M = 1, renormalized frequency 1 and V(t) = V0 + 2 v1 cos(w_d t);
//   I_a(w) = 0.7 g0 w^la (1 - w) theta((w - 0.9)/0.04), zero for w >= 1 (the cooled reservoir)
//   I_b(w) = g0 w^lb theta((w - 1.2)/0.1)
CoolingTemplate reference_cooling_setup(double lambda_alpha = 1.0, double lambda_beta = 1.0, double v1 = 0.05);

struct CoolingRates {
  double temperature = 0.0;
  double drive_frequency = 0.0;
  double rp = 0.0, rh = 0.0, nrh = 0.0, total = 0.0;
};

// exact heat currents of the cooled reservoir at temperature t with drive w_d
CoolingRates cooling_rates(const CoolingTemplate& tpl, double gamma0, double t, double drive_frequency);

enum class TminOutcome { Found, CoolsToFloor, NeverCools };
std::string to_string(TminOutcome o);

struct TminSearch {
  TminOutcome outcome = TminOutcome::Found;
  double t_min = 0.0;  // NaN unless Found
  int evaluations = 0;
};

struct TminOptions {
  double t_floor = 1e-4;
  double t_ceiling = 0.25;  // in units of the resonance
  double rel_tol = 1e-3;
};

// lowest T at which resonant pumping beats non-resonant heating, w_d = Omega_0 - T
TminSearch find_tmin(const CoolingTemplate& tpl, double gamma0, const TminOptions& opt = {});

struct TminResult {
  std::vector<double> gamma0;
  std::vector<TminSearch> searches;
  double slope = std::numeric_limits<double>::quiet_NaN();  // d log T_min / d log gamma0
  double slope_halfwidth = std::numeric_limits<double>::quiet_NaN();  // 95% confidence
  double intercept = std::numeric_limits<double>::quiet_NaN();
};

// scan over gamma0 (in parallel); fits the grid points where a minimum was found
TminResult tmin_scan(const CoolingTemplate& tpl, const std::vector<double>& gamma0, const TminOptions& opt = {},
                     int threads = 1);

struct LogLogFit {
  double slope, intercept, halfwidth;
};
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct CoolingProtocol {
  enum class Strategy { Adaptive, Fixed } strategy = Strategy::Adaptive;
  double fixed_drive = 0.0;  // w_d for Strategy::Fixed
  double c_d = 1.0;          // C_v = c_d T^d
  int d = 1;
  double t_floor = 1e-4;
  double t_max = std::numeric_limits<double>::infinity();
  // stationary once T changed by less than this (relative) over the last half of the run
  double stationary_tol = 1e-4;
  int table_points = 48;  // heat currents are tabulated on a log-T grid
  bool zero_nrh = false;

  void check() const;
};

struct TrajectoryPoint {
  double t, temperature, drive_frequency, rp, rh, nrh;
};

struct Trajectory {
  enum class Stop { Floor, Stationary, TimeLimit } stop = Stop::TimeLimit;
  std::vector<TrajectoryPoint> points;
  bool quasi_static = true;  // |dT/dt| << w_d T held throughout
  double final_temperature() const { return points.back().temperature; }
};
std::string to_string(Trajectory::Stop s);

// tabulated heat currents of the cooled reservoir versus temperature
class CoolingTable {
 public:
  CoolingTable(const CoolingTemplate& tpl, double gamma0, const CoolingProtocol& p, double t_lo, double t_hi,
               int threads = 1);
  CoolingRates operator()(double t) const;
  double t_lo() const { return t_lo_; }
  double t_hi() const { return t_hi_; }
  const std::vector<CoolingRates>& samples() const { return samples_; }

 private:
  double interp(int which, double t) const;
  double t_lo_, t_hi_;
  std::vector<double> logt_;
  std::vector<CoolingRates> samples_;
};

// dT/dt = -Q_a(T) / C_v(T); throws NumericalError if the step size collapses
Trajectory integrate_trajectory(const CoolingProtocol& p, const CoolingTemplate& tpl, double gamma0, double t_start,
                                int threads = 1);
Trajectory integrate_trajectory(const CoolingProtocol& p, const CoolingTable& table, double t_start);

}  // namespace lqr
