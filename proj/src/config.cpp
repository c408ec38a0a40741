#include "lqr/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "lqr/errors.hpp"
#include "lqr/kernels.hpp"

namespace lqr {

namespace {

using Keys = std::set<std::string>;

int line_of(const YAML::Node& n) { return n.Mark().line; }

[[noreturn]] void fail(const YAML::Node& n, const std::string& what) { throw ConfigError(what, line_of(n)); }

void require_map(const YAML::Node& n, const std::string& where) {
  if (!n.IsMap()) fail(n, where + ": expected a mapping");
}

void reject_unknown(const YAML::Node& n, const std::string& where, const Keys& allowed) {
  require_map(n, where);
  for (auto it = n.begin(); it != n.end(); ++it) {
    const std::string k = it->first.as<std::string>();
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'", line_of(it->first));
  }
}

template <class T>
T get(const YAML::Node& n, const std::string& key, const std::string& where) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, where + "." + key + ": cannot read a value of the expected type");
  }
}

double number(const YAML::Node& parent, const std::string& key, const std::string& where, double fallback,
              double lo = -INFINITY, double hi = INFINITY) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  const double v = get<double>(n, key, where);
  if (!(v >= lo && v <= hi)) {
    std::ostringstream os;
    os << where << "." << key << " = " << v << " is outside [" << lo << ", " << hi << "]";
    fail(n, os.str());
  }
  return v;
}

int integer(const YAML::Node& parent, const std::string& key, const std::string& where, int fallback, int lo,
            int hi) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  const int v = get<int>(n, key, where);
  if (v < lo || v > hi) fail(n, where + "." + key + " = " + std::to_string(v) + " is out of range");
  return v;
}

bool flag(const YAML::Node& parent, const std::string& key, const std::string& where, bool fallback) {
  const YAML::Node n = parent[key];
  return n ? get<bool>(n, key, where) : fallback;
}

std::vector<double> numbers(const YAML::Node& parent, const std::string& key, const std::string& where) {
  const YAML::Node n = parent[key];
  if (!n) return {};
  if (n.IsMap()) {  // {from, to, points, spacing: log|linear}
    reject_unknown(n, where + "." + key, {"from", "to", "points", "spacing"});
    const double a = number(n, "from", where + "." + key, NAN), b = number(n, "to", where + "." + key, NAN);
    const int m = integer(n, "points", where + "." + key, 2, 1, 100000);
    const std::string sp = n["spacing"] ? get<std::string>(n["spacing"], "spacing", where) : "linear";
    if (std::isnan(a) || std::isnan(b)) fail(n, where + "." + key + ": needs 'from' and 'to'");
    if (sp != "linear" && sp != "log") fail(n["spacing"], where + "." + key + ".spacing must be linear or log");
    if (sp == "log" && !(a > 0 && b > 0)) fail(n, where + "." + key + ": log spacing needs positive ends");
    std::vector<double> v;
    for (int i = 0; i < m; ++i) {
      const double f = m == 1 ? 0.0 : double(i) / (m - 1);
      v.push_back(sp == "log" ? a * std::pow(b / a, f) : a + (b - a) * f);
    }
    return v;
  }
  if (!n.IsSequence()) fail(n, where + "." + key + ": expected a list or {from, to, points}");
  std::vector<double> v;
  for (const auto& x : n) v.push_back(get<double>(x, key, where));
  return v;
}

Matrix matrix(const YAML::Node& n, const std::string& where) {
  if (n.IsScalar()) return Matrix::Constant(1, 1, get<double>(n, where, where));
  if (!n.IsSequence() || n.size() == 0) fail(n, where + ": expected a square matrix (list of rows)");
  const auto rows = static_cast<Eigen::Index>(n.size());
  Matrix m(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const YAML::Node r = n[static_cast<std::size_t>(i)];
    if (!r.IsSequence() || static_cast<Eigen::Index>(r.size()) != rows) fail(r, where + ": matrix is not square");
    for (Eigen::Index j = 0; j < rows; ++j) m(i, j) = get<double>(r[static_cast<std::size_t>(j)], where, where);
  }
  return m;
}

SpectralDensity spectral(const YAML::Node& n, const std::string& where) {
  require_map(n, where);
  const YAML::Node fam = n["family"];
  if (!fam) fail(n, where + ": missing 'family'");
  const std::string f = get<std::string>(fam, "family", where);
  if (f == "power_law") {
    reject_unknown(n, where, {"family", "strength", "exponent", "cutoff", "sharpness"});
    PowerLawCutoff p;
    p.strength = number(n, "strength", where, p.strength, 0);
    p.exponent = number(n, "exponent", where, p.exponent, 0, 10);
    p.cutoff = number(n, "cutoff", where, p.cutoff, 0);
    p.sharpness = number(n, "sharpness", where, p.sharpness, 1e-12);
    return SpectralDensity(p);
  }
  if (f == "gapped") {
    reject_unknown(n, where, {"family", "strength", "exponent", "cutoff", "sharpness", "gap"});
    GappedAtOmega0 p;
    p.strength = number(n, "strength", where, p.strength, 0);
    p.exponent = number(n, "exponent", where, p.exponent, 0, 10);
    p.cutoff = number(n, "cutoff", where, p.cutoff, 0);
    p.sharpness = number(n, "sharpness", where, p.sharpness, 1e-12);
    p.gap = number(n, "gap", where, p.gap, 1e-12);
    return SpectralDensity(p);
  }
  if (f == "tabulated") {
    reject_unknown(n, where, {"family", "omega", "value"});
    Tabulated t{numbers(n, "omega", where), numbers(n, "value", where)};
    try {
      return SpectralDensity(t);
    } catch (const std::exception& e) {
      fail(n, where + ": " + e.what());
    }
  }
  fail(fam, where + ".family must be power_law, gapped or tabulated");
}

}  // namespace

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(source)));
  return buf;
}

SolverOptions RunConfig::solver_for(const NetworkModel& m, const std::vector<ReservoirSpec>& res) const {
  SolverOptions o = solver;
  if (k_max_adaptive) o.k_max = m.driven() ? adaptive_k_max(m, res, solver, heat).k_max : 0;
  return o;
}

CoolingTemplate RunConfig::cooling_template() const {
  CoolingTemplate t;
  t.model = model;
  t.model.v_static = renormalized_potential;
  t.reservoirs = reservoirs;
  t.alpha = 0;
  if (!cooling.cooled.empty()) {
    bool found = false;
    for (std::size_t r = 0; r < reservoirs.size(); ++r)
      if (reservoirs[r].name == cooling.cooled) t.alpha = r, found = true;
    if (!found) throw ConfigError("cooling.cooled: no reservoir named '" + cooling.cooled + "'");
  }
  t.other_temperature = cooling.other_temperature;
  t.solver = solver;
  // the weak-drive rates only involve the first sidebands
  if (k_max_adaptive) t.solver.k_max = solver.method == SolverOptions::Method::WeakDrive ? 1 : 6;
  t.heat = heat;
  t.heat.zero_nrh = cooling.protocol.zero_nrh;
  return t;
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line);
  }
  RunConfig c;
  c.source = text;
  reject_unknown(root, "config",
                 {"model", "reservoirs", "solver", "heat_rates", "cooling", "covariance", "oracle", "threads"});

  // model
  const YAML::Node m = root["model"];
  if (!m) throw ConfigError("config: missing 'model'");
  reject_unknown(m, "model", {"mass", "potential", "renormalized", "drive_frequency", "time_reversal_invariant", "drive"});
  if (!m["mass"] || !m["potential"]) fail(m, "model: needs 'mass' and 'potential'");
  c.model.mass = matrix(m["mass"], "model.mass");
  const Matrix v = matrix(m["potential"], "model.potential");
  if (v.rows() != c.model.mass.rows()) fail(m["potential"], "model.potential: size differs from model.mass");
  const bool renormalized = flag(m, "renormalized", "model", true);
  c.model.drive_frequency = number(m, "drive_frequency", "model", 0.0, 0.0);
  c.model.time_reversal_invariant = flag(m, "time_reversal_invariant", "model", true);
  if (const YAML::Node d = m["drive"]) {
    if (!d.IsSequence()) fail(d, "model.drive: expected a list of harmonics");
    for (const auto& h : d) {
      reject_unknown(h, "model.drive[]", {"harmonic", "real", "imag"});
      const int k = integer(h, "harmonic", "model.drive[]", 0, 1, 64);
      if (k == 0) fail(h, "model.drive[]: needs 'harmonic' >= 1");
      if (!h["real"]) fail(h, "model.drive[]: needs 'real'");
      const Matrix re = matrix(h["real"], "model.drive[].real");
      const Matrix im = h["imag"] ? matrix(h["imag"], "model.drive[].imag") : Matrix::Zero(re.rows(), re.cols());
      if (re.rows() != v.rows() || im.rows() != v.rows()) fail(h, "model.drive[]: size differs from model.mass");
      CMatrix vk(re.rows(), re.cols());
      vk.real() = re;
      vk.imag() = im;
      c.model.set_harmonic(k, vk);
    }
  }

  // reservoirs
  const YAML::Node rs = root["reservoirs"];
  if (!rs || !rs.IsSequence() || rs.size() == 0) throw ConfigError("config: 'reservoirs' must be a non-empty list", rs ? line_of(rs) : -1);
  std::set<std::string> names;
  for (const auto& r : rs) {
    reject_unknown(r, "reservoirs[]", {"name", "sites", "temperature", "spectral"});
    ReservoirSpec s;
    s.name = r["name"] ? get<std::string>(r["name"], "name", "reservoirs[]") : "r" + std::to_string(c.reservoirs.size());
    if (!names.insert(s.name).second) fail(r, "reservoirs[]: duplicate name '" + s.name + "'");
    const std::string where = "reservoirs." + s.name;
    if (!r["sites"]) fail(r, where + ": needs 'sites'");
    for (const auto& x : r["sites"]) {
      const int i = get<int>(x, "sites", where);
      if (i < 0 || i >= v.rows()) fail(x, where + ".sites: no oscillator " + std::to_string(i));
      s.sites.push_back(i);
    }
    if (r["temperature"]) {
      const double t = get<double>(r["temperature"], "temperature", where);
      if (!(t >= 0)) fail(r["temperature"], where + ".temperature must be non-negative");
      s.temperature = t;
    }
    if (!r["spectral"]) fail(r, where + ": needs 'spectral'");
    s.spectral = spectral(r["spectral"], where + ".spectral");
    c.reservoirs.push_back(s);
  }
  c.renormalized_potential = renormalized ? v : renormalized_static(NetworkModel{c.model.mass, v, {}, 0.0, true}, c.reservoirs);
  c.model.v_static = renormalized ? bare_from_renormalized(v, c.reservoirs) : v;

  // numerics
  if (const YAML::Node s = root["solver"]) {
    reject_unknown(s, "solver", {"k_max", "min_rcond", "max_residual", "method", "rel_tol", "abs_tol", "omega_max",
                                 "max_intervals", "refine_work"});
    if (s["k_max"] && !(s["k_max"].IsScalar() && s["k_max"].Scalar() == "auto")) {
      c.solver.k_max = integer(s, "k_max", "solver", c.solver.k_max, 0, 64);
      c.k_max_adaptive = false;
    }
    c.solver.min_rcond = number(s, "min_rcond", "solver", c.solver.min_rcond, 0, 1);
    c.solver.max_residual = number(s, "max_residual", "solver", c.solver.max_residual, 0, 1);
    if (s["method"]) {
      const std::string meth = get<std::string>(s["method"], "method", "solver");
      if (meth == "exact") c.solver.method = SolverOptions::Method::Exact;
      else if (meth == "weak_drive") c.solver.method = SolverOptions::Method::WeakDrive;
      else fail(s["method"], "solver.method must be exact or weak_drive");
    }
    c.heat.rel_tol = number(s, "rel_tol", "solver", c.heat.rel_tol, 1e-15, 0.1);
    c.heat.abs_tol = number(s, "abs_tol", "solver", c.heat.abs_tol, 0);
    c.heat.omega_max = number(s, "omega_max", "solver", c.heat.omega_max, 0);
    c.heat.max_intervals = static_cast<std::size_t>(integer(s, "max_intervals", "solver", static_cast<int>(c.heat.max_intervals), 100, 100000000));
    c.heat.refine_work = flag(s, "refine_work", "solver", c.heat.refine_work);
  }
  c.threads = integer(root, "threads", "config", 1, 1, 1024);
  c.heat.threads = c.threads;

  if (const YAML::Node h = root["heat_rates"]) {
    reject_unknown(h, "heat_rates", {"temperatures", "drive_frequencies", "vary"});
    c.heat_grid.temperatures = numbers(h, "temperatures", "heat_rates");
    c.heat_grid.drive_frequencies = numbers(h, "drive_frequencies", "heat_rates");
    for (double t : c.heat_grid.temperatures)
      if (!(t >= 0)) fail(h["temperatures"], "heat_rates.temperatures must be non-negative");
    for (double w : c.heat_grid.drive_frequencies)
      if (!(w > 0)) fail(h["drive_frequencies"], "heat_rates.drive_frequencies must be positive");
    if (h["vary"])
      for (const auto& x : h["vary"]) {
        const std::string name = get<std::string>(x, "vary", "heat_rates");
        if (!names.count(name)) fail(x, "heat_rates.vary: no reservoir named '" + name + "'");
        c.heat_grid.vary.push_back(name);
      }
  }

  if (const YAML::Node k = root["cooling"]) {
    reject_unknown(k, "cooling", {"cooled", "other_temperature", "gamma0", "t_floor", "t_ceiling", "rel_tol", "t_start", "strategy",
                                  "fixed_drive", "c_d", "d", "t_max", "stationary_tol", "table_points", "zero_nrh"});
    auto& co = c.cooling;
    if (k["cooled"]) {
      co.cooled = get<std::string>(k["cooled"], "cooled", "cooling");
      if (!names.count(co.cooled)) fail(k["cooled"], "cooling.cooled: no reservoir named '" + co.cooled + "'");
    }
    co.other_temperature = number(k, "other_temperature", "cooling", co.other_temperature, 0);
    co.gamma0 = numbers(k, "gamma0", "cooling");
    for (double g : co.gamma0)
      if (!(g > 0)) fail(k["gamma0"], "cooling.gamma0 must be positive");
    co.tmin.t_floor = number(k, "t_floor", "cooling", co.tmin.t_floor, 1e-300);
    co.protocol.t_floor = co.tmin.t_floor;
    co.tmin.t_ceiling = number(k, "t_ceiling", "cooling", co.tmin.t_ceiling, 1e-300);
    co.tmin.rel_tol = number(k, "rel_tol", "cooling", co.tmin.rel_tol, 1e-12, 1);
    co.t_start = number(k, "t_start", "cooling", co.t_start, 1e-300);
    if (k["strategy"]) {
      const std::string st = get<std::string>(k["strategy"], "strategy", "cooling");
      if (st == "adaptive") co.protocol.strategy = CoolingProtocol::Strategy::Adaptive;
      else if (st == "fixed") co.protocol.strategy = CoolingProtocol::Strategy::Fixed;
      else fail(k["strategy"], "cooling.strategy must be adaptive or fixed");
    }
    co.protocol.fixed_drive = number(k, "fixed_drive", "cooling", co.protocol.fixed_drive, 0);
    co.protocol.c_d = number(k, "c_d", "cooling", co.protocol.c_d, 1e-300);
    co.protocol.d = integer(k, "d", "cooling", co.protocol.d, 1, 3);
    co.protocol.t_max = number(k, "t_max", "cooling", co.protocol.t_max, 0);
    co.protocol.stationary_tol = number(k, "stationary_tol", "cooling", co.protocol.stationary_tol, 1e-14, 1);
    co.protocol.table_points = integer(k, "table_points", "cooling", co.protocol.table_points, 4, 100000);
    co.protocol.zero_nrh = flag(k, "zero_nrh", "cooling", false);
    try {
      co.protocol.check();
    } catch (const std::invalid_argument& e) {
      fail(k, std::string("cooling: ") + e.what());
    }
  }

  if (const YAML::Node s = root["covariance"]) {
    reject_unknown(s, "covariance", {"samples"});
    c.covariance.samples = integer(s, "samples", "covariance", c.covariance.samples, 1, 1000000);
  }

  if (const YAML::Node o = root["oracle"]) {
    reject_unknown(o, "oracle", {"modes", "omega_max", "min_steps_per_period", "max_phase_step", "burn_in_periods",
                                 "average_periods", "block", "periodicity_tol", "require_periodic", "max_dimension"});
    auto& op = c.oracle;
    op.modes = integer(o, "modes", "oracle", op.modes, 1, 100000);
    op.omega_max = number(o, "omega_max", "oracle", op.omega_max, 0);
    op.min_steps_per_period = integer(o, "min_steps_per_period", "oracle", op.min_steps_per_period, 8, 10000000);
    op.max_phase_step = number(o, "max_phase_step", "oracle", op.max_phase_step, 1e-6, 1.0);
    op.burn_in_periods = integer(o, "burn_in_periods", "oracle", op.burn_in_periods, 1, 100000000);
    op.average_periods = integer(o, "average_periods", "oracle", op.average_periods, 1, 100000000);
    op.block = number(o, "block", "oracle", op.block, 0);
    op.periodicity_tol = number(o, "periodicity_tol", "oracle", op.periodicity_tol, 0, 1);
    op.require_periodic = flag(o, "require_periodic", "oracle", op.require_periodic);
    op.max_dimension = static_cast<std::size_t>(integer(o, "max_dimension", "oracle", static_cast<int>(op.max_dimension), 4, 100000));
  }

  const auto report = validate(c.model, c.reservoirs);
  if (!report.ok()) throw ConfigError("invalid model: " + report.summary());
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace lqr
