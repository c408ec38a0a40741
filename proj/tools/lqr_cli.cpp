// lqr: heat rates, cooling limits, covariances and oracle checks for driven linear networks.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "lqr/config.hpp"
#include "lqr/cooling.hpp"
#include "lqr/covariance.hpp"
#include "lqr/errors.hpp"
#include "lqr/floquet.hpp"
#include "lqr/oracle.hpp"
#include "lqr/parallel.hpp"
#include "lqr/thermo.hpp"

using namespace lqr;
namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config, out = ".";
  std::optional<int> kmax, threads;
  std::optional<double> tol, lambda, gamma0;
  bool zero_nrh = false;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* method_name(SolverOptions::Method m) {
  return m == SolverOptions::Method::Exact ? "exact" : "weak_drive";
}

// k_max the run settled on, when it is a single one
int settled_k_max = -1;

std::string k_max_label(const RunConfig& c) {
  if (!c.k_max_adaptive) return std::to_string(c.solver.k_max);
  return settled_k_max >= 0 ? std::to_string(settled_k_max) + " (adaptive)" : "adaptive (column k_max)";
}

void settle_k_max(RunConfig& c) {
  c.solver = c.solver_for(c.model, c.reservoirs);
  if (c.k_max_adaptive) settled_k_max = c.solver.k_max;
}

// one CSV per command, with the settings that produced it in a comment block
class Csv {
 public:
  Csv(const Flags& f, const RunConfig& c, const std::string& command, const std::string& columns,
      const std::vector<std::string>& notes = {})
      : path_(fs::path(f.out) / (command + ".csv")) {
    fs::create_directories(f.out);
    os_.open(path_);
    if (!os_) throw std::runtime_error("cannot write " + path_.string());
    os_ << "# lqr " << command << "\n"
        << "# config: " << f.config << "\n"
        << "# config_hash: " << c.hash() << "\n"
        << "# k_max: " << k_max_label(c) << "\n"
        << "# method: " << method_name(c.solver.method) << "\n"
        << "# rel_tol: " << num(c.heat.rel_tol) << "\n"
        << "# abs_tol: " << num(c.heat.abs_tol) << "\n"
        << "# omega_max: " << num(c.heat.omega_max) << "\n"
        << "# zero_nrh: " << (f.zero_nrh ? "true" : "false") << "\n";
    for (const auto& n : notes) note(n);
    os_ << columns << "\n";
  }
  template <class... T>
  void row(const T&... v) {
    std::string line;
    ((line += cell(v) + ","), ...);
    line.pop_back();
    os_ << line << "\n";
  }
  void note(const std::string& s) { os_ << "# " << s << "\n"; }
  const fs::path& path() const { return path_; }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  fs::path path_;
  std::ofstream os_;
};

RunConfig load(const Flags& f) {
  RunConfig c = load_config(f.config);
  if (f.kmax) {
    if (*f.kmax < 0) throw ConfigError("--kmax must be >= 0");
    c.solver.k_max = *f.kmax;
    c.k_max_adaptive = false;
  }
  if (f.tol) {
    if (!(*f.tol > 0 && *f.tol < 0.1)) throw ConfigError("--tol must lie in (0, 0.1)");
    c.heat.rel_tol = *f.tol;
  }
  if (f.threads) {
    if (*f.threads < 1) throw ConfigError("--threads must be >= 1");
    c.threads = c.heat.threads = *f.threads;
  }
  if (f.zero_nrh) c.heat.zero_nrh = c.cooling.protocol.zero_nrh = true;
  return c;
}

std::vector<ReservoirSpec> at_temperature(const RunConfig& c, double t) {
  auto res = c.reservoirs;
  for (auto& r : res)
    if (c.heat_grid.vary.empty() || std::find(c.heat_grid.vary.begin(), c.heat_grid.vary.end(), r.name) != c.heat_grid.vary.end())
      r.temperature = t;
  return res;
}

NetworkModel at_drive(const RunConfig& c, double wd) {
  NetworkModel m = c.model;
  if (m.driven() && !std::isnan(wd)) m.drive_frequency = wd;
  return m;
}

int heat_rates_cmd(const Flags& f) {
  RunConfig c = load(f);
  auto temps = c.heat_grid.temperatures;
  auto drives = c.heat_grid.drive_frequencies;
  if (temps.empty()) temps = {NAN};
  if (drives.empty() || !c.model.driven()) drives = {NAN};
  const long points = static_cast<long>(temps.size() * drives.size());
  std::vector<HeatRateReport> reps(points);
  std::vector<int> kmax(points);
  HeatOptions ho = c.heat;
  ho.threads = points > 1 ? 1 : c.threads;
  parallel_for(points, points > 1 ? c.threads : 1, [&](long i) {
    const double t = temps[i / drives.size()], wd = drives[i % drives.size()];
    const auto res = std::isnan(t) ? c.reservoirs : at_temperature(c, t);
    const NetworkModel m = at_drive(c, wd);
    const SolverOptions so = c.solver_for(m, res);
    kmax[i] = so.k_max;
    FloquetSolution sol(m, res, so);
    reps[i] = heat_rates(sol, res, ho);
  });
  Csv csv(f, c, "heat_rates",
          "temperature,drive_frequency,k_max,reservoir,rp,rh,nrh,total,error,work_rate,work_rate_direct,"
          "entropy_production,first_law_residual");
  for (long i = 0; i < points; ++i) {
    const double t = temps[i / drives.size()], wd = drives[i % drives.size()];
    const double wd_used = c.model.driven() ? (std::isnan(wd) ? c.model.drive_frequency : wd) : 0.0;
    const auto res = std::isnan(t) ? c.reservoirs : at_temperature(c, t);
    const auto& rep = reps[i];
    for (std::size_t a = 0; a < res.size(); ++a) {
      const auto& h = rep.reservoirs[a];
      csv.row(res[a].temperature, wd_used, kmax[i], res[a].name, h.rp, h.rh, h.nrh, h.total, h.error, rep.work_rate,
              rep.work_rate_direct, rep.entropy_production, rep.first_law_residual);
    }
  }
  std::cout << "wrote " << csv.path().string() << " (" << points << " grid points)\n";
  return 0;
}

CoolingTemplate cooling_template(const Flags& f, const RunConfig& c) {
  CoolingTemplate t = c.cooling_template();
  if (f.lambda) {
    auto& sd = t.reservoirs.at(t.alpha).spectral;
    auto fam = sd.family();
    std::visit(
        [&](auto& p) {
          if constexpr (requires { p.exponent; }) p.exponent = *f.lambda;
          else throw ConfigError("--lambda needs a power_law or gapped cooled reservoir");
        },
        fam);
    sd = SpectralDensity(fam);
  }
  return t;
}

std::vector<double> gamma_grid(const RunConfig& c) {
  if (!c.cooling.gamma0.empty()) return c.cooling.gamma0;
  std::vector<double> g;
  for (int i = 0; i < 8; ++i) g.push_back(1e-6 * std::pow(100.0, i / 7.0));
  return g;
}

int tmin_scan_cmd(const Flags& f) {
  RunConfig c = load(f);
  const auto tpl = cooling_template(f, c);
  const auto gammas = gamma_grid(c);
  const auto r = tmin_scan(tpl, gammas, c.cooling.tmin, c.threads);
  Csv csv(f, c, "tmin_scan", "gamma0,t_min,outcome,evaluations",
          {"lambda: " + (f.lambda ? num(*f.lambda) : std::string("config"))});
  for (std::size_t i = 0; i < gammas.size(); ++i)
    csv.row(gammas[i], r.searches[i].t_min, to_string(r.searches[i].outcome), r.searches[i].evaluations);
  csv.note("slope: " + num(r.slope));
  csv.note("slope_halfwidth_95: " + num(r.slope_halfwidth));
  csv.note("intercept: " + num(r.intercept));
  std::printf("slope %.4f +- %.4f (%zu points); wrote %s\n", r.slope, r.slope_halfwidth, gammas.size(),
              csv.path().string().c_str());
  return 0;
}

int trajectory_cmd(const Flags& f) {
  RunConfig c = load(f);
  const auto tpl = cooling_template(f, c);
  const double g = f.gamma0 ? *f.gamma0 : gamma_grid(c).front();
  const auto tr = integrate_trajectory(c.cooling.protocol, tpl, g, c.cooling.t_start, c.threads);
  Csv csv(f, c, "trajectory", "t,temperature,drive_frequency,rp,rh,nrh", {"gamma0: " + num(g)});
  for (const auto& p : tr.points) csv.row(p.t, p.temperature, p.drive_frequency, p.rp, p.rh, p.nrh);
  csv.note("stop: " + to_string(tr.stop));
  csv.note("final_temperature: " + num(tr.final_temperature()));
  csv.note(std::string("quasi_static: ") + (tr.quasi_static ? "true" : "false"));
  std::printf("%s at T = %.6g after t = %.6g; wrote %s\n", to_string(tr.stop).c_str(), tr.final_temperature(),
              tr.points.back().t, csv.path().string().c_str());
  return 0;
}

CovarianceOptions covariance_options(const RunConfig& c) {
  CovarianceOptions o;
  o.rel_tol = c.heat.rel_tol;
  o.omega_max = c.heat.omega_max;
  o.max_intervals = c.heat.max_intervals;
  o.threads = c.threads;
  return o;
}

int covariance_cmd(const Flags& f) {
  RunConfig c = load(f);
  settle_k_max(c);
  FloquetSolution sol(c.model, c.reservoirs, c.solver);
  const auto b = sigma_blocks(sol, c.reservoirs, covariance_options(c));
  const bool driven = c.model.driven();
  const int samples = driven ? c.covariance.samples : 1;
  const double period = driven ? 2 * std::numbers::pi / c.model.drive_frequency : 0.0;
  Csv csv(f, c, "covariance", "t,row,col,value",
          {"rows/cols 0..n-1 are positions, n..2n-1 momenta; symmetrized"});
  double least = INFINITY;
  for (int s = 0; s < samples; ++s) {
    const double t = period * s / samples;
    const Matrix sig = sigma_at(b, t);
    least = std::min(least, symplectic_eigenvalues(sig)(0));
    for (int i = 0; i < sig.rows(); ++i)
      for (int j = 0; j < sig.cols(); ++j) csv.row(t, i, j, sig(i, j));
  }
  csv.note("least_symplectic_eigenvalue: " + num(least));
  std::printf("%d samples, least symplectic eigenvalue %.6g; wrote %s\n", samples, least,
              csv.path().string().c_str());
  return 0;
}

int validate_cmd(const Flags& f) {
  RunConfig c = load(f);
  const auto vr = validate(c.model, c.reservoirs);
  for (const auto& w : vr.warnings) std::cout << "warning: " << w << "\n";

  settle_k_max(c);
  FloquetSolution sol(c.model, c.reservoirs, c.solver);
  const auto rep = heat_rates(sol, c.reservoirs, c.heat);
  const bool tri = c.model.time_reversal_invariant;
  Csv csv(f, c, "validate", "law,value,tolerance,pass");
  bool all = true;
  auto law = [&](const std::string& name, double value, double tol, bool ok) {
    csv.row(name, value, tol, ok ? "PASS" : "FAIL");
    std::printf("%s %-28s %.3e (tolerance %.1e)\n", ok ? "PASS" : "FAIL", name.c_str(), value, tol);
    all = all && ok;
  };

  law("first_law", rep.first_law_residual, 1e-6, rep.first_law_residual <= 1e-6);
  if (!std::isnan(rep.entropy_production))
    law("second_law", -rep.entropy_production, 1e-8, rep.entropy_production >= -1e-8);
  if (tri) {
    double rh = -INFINITY, nrh = -INFINITY, dec = 0;
    for (const auto& h : rep.reservoirs) {
      rh = std::max(rh, h.rh);
      nrh = std::max(nrh, h.nrh);
      dec = std::max(dec, std::abs(h.decomposition_residual));
    }
    law("resonant_heating_sign", rh, 1e-12, rh <= 1e-12);
    law("nonresonant_heating_sign", nrh, 1e-12, nrh <= 1e-12);
    const double dtol = 10 * c.heat.rel_tol * rep.scale + 1e-15;
    law("decomposition_closure", dec, dtol, dec <= dtol);
  }
  if (tri && c.model.driven()) {
    const double w0 = c.model.drive_frequency;
    const auto s = check_symmetries(c.model, c.reservoirs, {0.13 * w0, 0.61 * w0, 1.07 * w0, 2.3 * w0},
                                    std::min(2, c.solver.k_max), c.solver);
    law("sideband_symmetries", s.max(), 1e-8, s.max() < 1e-8);
  }
  const auto b = sigma_blocks(sol, c.reservoirs, covariance_options(c));
  const int samples = c.model.driven() ? c.covariance.samples : 1;
  double least = INFINITY;
  for (int s = 0; s < samples; ++s) {
    const double t = c.model.driven() ? 2 * std::numbers::pi * s / (samples * c.model.drive_frequency) : 0.0;
    least = std::min(least, symplectic_eigenvalues(sigma_at(b, t))(0));
  }
  law("uncertainty_principle", 0.5 - least, 1e-8, least >= 0.5 - 1e-8);

  std::printf("%s; wrote %s\n", all ? "all laws pass" : "VALIDATION FAILED", csv.path().string().c_str());
  return all ? 0 : 1;
}

int oracle_cmd(const Flags& f) {
  RunConfig c = load(f);
  settle_k_max(c);
  FloquetSolution sol(c.model, c.reservoirs, c.solver);
  const auto rep = heat_rates(sol, c.reservoirs, c.heat);
  const auto o = run_oracle(c.model, c.reservoirs, c.oracle);
  Csv csv(f, c, "oracle_compare", "reservoir,floquet,oracle,relative_discrepancy,bath_side,system_side",
          {"modes: " + std::to_string(c.oracle.modes) + ", burn_in_periods: " + std::to_string(c.oracle.burn_in_periods) +
           ", average_periods: " + std::to_string(c.oracle.average_periods)});
  for (std::size_t a = 0; a < c.reservoirs.size(); ++a) {
    const double fl = rep.reservoirs[a].total, orc = o.heat[a].heat;
    const double d = std::abs(orc - fl) / std::max(std::abs(fl), 1e-300);
    csv.row(c.reservoirs[a].name, fl, orc, d, o.heat[a].bath_side, o.heat[a].system_side);
    std::printf("%-10s floquet % .6e  oracle % .6e  discrepancy %.2e\n", c.reservoirs[a].name.c_str(), fl, orc, d);
  }
  csv.note("periodicity: " + num(o.periodicity));
  csv.note("energy_drift: " + num(o.energy_drift));
  csv.note("dimension: " + std::to_string(o.dimension));
  std::printf("phase-space dimension %d, periodicity %.2e; wrote %s\n", o.dimension, o.periodicity,
              csv.path().string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat flows and cooling limits of periodically driven linear quantum networks"};
  app.require_subcommand(1);
  Flags f;
  auto common = [&](CLI::App* s) {
    s->add_option("--config", f.config, "YAML run configuration")->required();
    s->add_option("--out", f.out, "output directory (created if missing)");
    s->add_option("--kmax", f.kmax, "sideband cutoff, overrides solver.k_max");
    s->add_option("--tol", f.tol, "relative quadrature tolerance, overrides solver.rel_tol");
    s->add_option("--threads", f.threads, "worker threads, overrides threads");
    s->add_flag("--zero-nrh", f.zero_nrh, "drop the non-resonant heating (diagnostic)");
  };

  std::vector<std::pair<CLI::App*, int (*)(const Flags&)>> cmds;
  auto add = [&](const char* name, const char* help, int (*fn)(const Flags&)) {
    auto* s = app.add_subcommand(name, help);
    common(s);
    cmds.emplace_back(s, fn);
    return s;
  };
  add("heat-rates",
      "heat currents over the heat_rates grid -> heat_rates.csv\n"
      "columns: temperature, drive_frequency, k_max, reservoir, rp, rh, nrh, total, error, work_rate,\n"
      "work_rate_direct, entropy_production, first_law_residual (one row per grid point and reservoir)",
      heat_rates_cmd);
  auto* scan = add("tmin-scan",
                   "minimum temperature versus gamma0 -> tmin_scan.csv\n"
                   "columns: gamma0, t_min, outcome, evaluations; the fitted slope closes the file",
                   tmin_scan_cmd);
  scan->add_option("--lambda", f.lambda, "exponent of the cooled reservoir's spectral density");
  auto* traj = add("trajectory",
                   "cooling trajectory dT/dt = -Q(T)/C(T) -> trajectory.csv\n"
                   "columns: t, temperature, drive_frequency, rp, rh, nrh",
                   trajectory_cmd);
  traj->add_option("--lambda", f.lambda, "exponent of the cooled reservoir's spectral density");
  traj->add_option("--gamma0", f.gamma0, "coupling scale (default: first cooling.gamma0)");
  add("covariance", "steady-state covariance over one period -> covariance.csv\ncolumns: t, row, col, value",
      covariance_cmd);
  add("validate",
      "thermodynamic and structural laws -> validate.csv, exit 1 if any fails\ncolumns: law, value, tolerance, pass",
      validate_cmd);
  add("oracle-compare",
      "heat currents against a discretized-bath simulation -> oracle_compare.csv\n"
      "columns: reservoir, floquet, oracle, relative_discrepancy, bath_side, system_side",
      oracle_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    for (auto& [s, fn] : cmds)
      if (s->parsed()) return fn(f);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedConfiguration& e) {
    std::cerr << "unsupported configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
