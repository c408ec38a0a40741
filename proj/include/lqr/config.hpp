// YAML run configurations.
#pragma once
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lqr/cooling.hpp"
#include "lqr/oracle.hpp"
#include "lqr/thermo.hpp"

namespace lqr {

struct RunConfig {
  NetworkModel model;  // v_static is the bare potential after loading
  Matrix renormalized_potential;
  std::vector<ReservoirSpec> reservoirs;
  SolverOptions solver;
  HeatOptions heat;
  // solver.k_max absent or "auto": chosen per run by adaptive_k_max, starting at 4
  bool k_max_adaptive = true;
  SolverOptions solver_for(const NetworkModel& m, const std::vector<ReservoirSpec>& res) const;

  // heat-rates: every (T, w_d) pair; T is given to the reservoirs named in `vary` (all if empty)
  struct HeatGrid {
    std::vector<double> temperatures;
    std::vector<double> drive_frequencies;
    std::vector<std::string> vary;
  } heat_grid;

  // tmin-scan / trajectory: the model and reservoirs above form the template, with reservoir
  // strengths relative to gamma0 and the potential taken as renormalized
  struct Cooling {
    std::string cooled;  // reservoir name; empty: the first
    double other_temperature = std::numeric_limits<double>::quiet_NaN();  // NaN: follow the cooled one
    std::vector<double> gamma0;
    TminOptions tmin;
    CoolingProtocol protocol;
    double t_start = 0.05;
  } cooling;

  struct Covariance {
    int samples = 32;  // per drive period
  } covariance;

  OracleOptions oracle;
  int threads = 1;

  std::string source;  // the text that was parsed
  // FNV-1a of the source text, 16 hex digits
  std::string hash() const;
  CoolingTemplate cooling_template() const;
};

// throws ConfigError with the line of the offending key
RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::string& path);

std::uint64_t fnv1a(const std::string& s);

}  // namespace lqr
