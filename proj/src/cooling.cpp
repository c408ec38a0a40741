#include "lqr/cooling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/numeric/odeint.hpp>

#include "lqr/kernels.hpp"
#include "lqr/weakcoupling.hpp"
#include "lqr/parallel.hpp"

namespace lqr {

CoolingTemplate::Instance CoolingTemplate::instantiate(double gamma0, double t_alpha, double wd) const {
  if (!(gamma0 > 0)) throw std::invalid_argument("gamma0 must be positive");
  Instance in;
  in.reservoirs = reservoirs;
  for (std::size_t r = 0; r < in.reservoirs.size(); ++r) {
    auto& res = in.reservoirs[r];
    res.spectral = res.spectral.with_strength(res.spectral.strength() * gamma0);
    res.temperature = (r == alpha || std::isnan(other_temperature)) ? t_alpha : other_temperature;
  }
  in.model = model;
  in.model.v_static = bare_from_renormalized(model.v_static, in.reservoirs);
  in.model.drive_frequency = wd;
  return in;
}

double CoolingTemplate::resonance(double gamma0) const {
  Instance in = instantiate(gamma0, 0.0, 1.0);
  in.model.drive.clear();
  SolverOptions so;
  so.k_max = 1;
  FloquetSolver s(in.model, in.reservoirs, so);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(model.v_static, model.mass);
  const Vector q = es.eigenvectors().col(0);
  return resonance_peak(s, q, std::sqrt(es.eigenvalues()(0)));
}

CoolingTemplate reference_cooling_setup(double lambda_alpha, double lambda_beta, double v1) {
  CoolingTemplate t;
  t.model.mass = Matrix::Identity(1, 1);
  t.model.v_static = Matrix::Identity(1, 1);
  t.model.set_harmonic(1, CMatrix::Constant(1, 1, v1));
  t.model.drive_frequency = 0.9;
  t.reservoirs = {{"alpha", {0}, SpectralDensity(GappedAtOmega0{0.7, lambda_alpha, 0.9, 0.04, 1.0}), 0.0},
                  {"beta", {0}, SpectralDensity(PowerLawCutoff{1.0, lambda_beta, 1.2, 0.1}), 0.0}};
  t.alpha = 0;
  // heat rates to leading order in the drive: only the k = +-1 sidebands
  t.solver.k_max = 1;
  t.solver.method = SolverOptions::Method::WeakDrive;
  t.heat.rel_tol = 1e-8;
  t.heat.refine_work = false;
  return t;
}

CoolingRates cooling_rates(const CoolingTemplate& tpl, double gamma0, double t, double wd) {
  auto in = tpl.instantiate(gamma0, t, wd);
  FloquetSolution sol(in.model, in.reservoirs, tpl.solver);
  HeatOptions ho = tpl.heat;
  ho.zero_nrh = false;
  const auto rep = heat_rates(sol, in.reservoirs, ho);
  const auto& h = rep.reservoirs.at(tpl.alpha);
  // currents that cancel to round-off are zero (e.g. no drive at equal temperatures)
  const double noise = 1e-12 * rep.scale;
  auto clean = [&](double v) { return std::abs(v) > noise ? v : 0.0; };
  return {t, wd, clean(h.rp), clean(h.rh), clean(h.nrh), clean(h.total)};
}

std::string to_string(TminOutcome o) {
  switch (o) {
    case TminOutcome::Found: return "found";
    case TminOutcome::CoolsToFloor: return "cools-to-floor";
    case TminOutcome::NeverCools: return "never-cools";
  }
  return "?";
}

TminSearch find_tmin(const CoolingTemplate& tpl, double gamma0, const TminOptions& opt) {
  if (!(opt.t_floor > 0) || !(opt.t_ceiling > opt.t_floor)) throw std::invalid_argument("bad temperature bracket");
  const double W = tpl.resonance(gamma0);
  TminSearch out;
  auto margin = [&](double t) {
    ++out.evaluations;
    const CoolingRates r = cooling_rates(tpl, gamma0, t, W - t);
    return r.rp - (tpl.heat.zero_nrh ? 0.0 : std::abs(r.nrh));
  };
  double lo = std::log(opt.t_floor), hi = std::log(opt.t_ceiling * W);
  if (margin(std::exp(lo)) > 0) {
    out.outcome = TminOutcome::CoolsToFloor;
    out.t_min = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  if (margin(std::exp(hi)) <= 0) {
    out.outcome = TminOutcome::NeverCools;
    out.t_min = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  while (hi - lo > opt.rel_tol) {
    const double mid = 0.5 * (lo + hi);
    (margin(std::exp(mid)) > 0 ? hi : lo) = mid;
  }
  out.t_min = std::exp(0.5 * (lo + hi));
  return out;
}

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 3 || y.size() != n) throw std::invalid_argument("log-log fit needs at least three points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= n, my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  LogLogFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::log(y[i]) - (f.intercept + f.slope * std::log(x[i]));
    ss += e * e;
  }
  boost::math::students_t st(static_cast<double>(n - 2));
  f.halfwidth = boost::math::quantile(boost::math::complement(st, 0.025)) * std::sqrt(ss / (n - 2) / sxx);
  return f;
}

TminResult tmin_scan(const CoolingTemplate& tpl, const std::vector<double>& gamma0, const TminOptions& opt,
                     int threads) {
  TminResult r;
  r.gamma0 = gamma0;
  r.searches.resize(gamma0.size());
  const long n = static_cast<long>(gamma0.size());
  parallel_for(n, threads, [&](long i) {
    r.searches[static_cast<std::size_t>(i)] = find_tmin(tpl, gamma0[static_cast<std::size_t>(i)], opt);
  });
  std::vector<double> x, y;
  for (std::size_t i = 0; i < gamma0.size(); ++i)
    if (r.searches[i].outcome == TminOutcome::Found) x.push_back(gamma0[i]), y.push_back(r.searches[i].t_min);
  if (x.size() >= 3) {
    const auto f = fit_loglog(x, y);
    r.slope = f.slope;
    r.intercept = f.intercept;
    r.slope_halfwidth = f.halfwidth;
  }
  return r;
}

void CoolingProtocol::check() const {
  if (!(c_d > 0)) throw std::invalid_argument("heat capacity constant must be positive");
  if (d < 1 || d > 3) throw std::invalid_argument("reservoir dimension must be 1, 2 or 3");
  if (!(t_floor > 0)) throw std::invalid_argument("temperature floor must be positive");
  if (strategy == Strategy::Fixed && !(fixed_drive > 0)) throw std::invalid_argument("fixed drive frequency must be positive");
  if (table_points < 4) throw std::invalid_argument("need at least four table points");
}

std::string to_string(Trajectory::Stop s) {
  switch (s) {
    case Trajectory::Stop::Floor: return "floor";
    case Trajectory::Stop::Stationary: return "stationary";
    case Trajectory::Stop::TimeLimit: return "time-limit";
  }
  return "?";
}

CoolingTable::CoolingTable(const CoolingTemplate& tpl, double gamma0, const CoolingProtocol& p, double t_lo,
                           double t_hi, int threads)
    : t_lo_(t_lo), t_hi_(t_hi) {
  p.check();
  if (!(t_lo > 0) || !(t_hi > t_lo)) throw std::invalid_argument("bad table range");
  const double W = p.strategy == CoolingProtocol::Strategy::Adaptive ? tpl.resonance(gamma0) : 0.0;
  const int n = p.table_points;
  logt_.resize(static_cast<std::size_t>(n));
  samples_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    logt_[static_cast<std::size_t>(i)] = std::log(t_lo) + (std::log(t_hi) - std::log(t_lo)) * i / (n - 1);
  parallel_for(n, threads, [&](long i) {
    const double t = std::exp(logt_[static_cast<std::size_t>(i)]);
    const double wd = p.strategy == CoolingProtocol::Strategy::Adaptive ? W - t : p.fixed_drive;
    samples_[static_cast<std::size_t>(i)] = cooling_rates(tpl, gamma0, t, wd);
  });
  if (p.zero_nrh)
    for (auto& s : samples_) {
      s.total -= s.nrh;
      s.nrh = 0;
    }
}

double CoolingTable::interp(int which, double t) const {
  auto get = [&](const CoolingRates& r) { return which == 0 ? r.rp : which == 1 ? r.rh : r.nrh; };
  std::vector<double> x = logt_, y;
  bool pos = true, neg = true;
  for (auto& s : samples_) {
    const double v = get(s);
    pos = pos && v > 0;
    neg = neg && v < 0;
    y.push_back(v);
  }
  const double lt = std::clamp(std::log(t), logt_.front(), logt_.back());
  // sign-definite currents are power laws to a good approximation: interpolate in log-log
  if (pos || neg) {
    for (auto& v : y) v = std::log(std::abs(v));
    boost::math::interpolators::pchip<std::vector<double>> f(std::move(x), std::move(y));
    return (pos ? 1.0 : -1.0) * std::exp(f(lt));
  }
  boost::math::interpolators::pchip<std::vector<double>> f(std::move(x), std::move(y));
  return f(lt);
}

CoolingRates CoolingTable::operator()(double t) const {
  CoolingRates r;
  r.temperature = t;
  r.rp = interp(0, t);
  r.rh = interp(1, t);
  r.nrh = interp(2, t);
  r.total = r.rp + r.rh + r.nrh;
  // w_d at t, linear in t for both strategies
  const auto& a = samples_.front();
  const auto& b = samples_.back();
  r.drive_frequency = a.drive_frequency + (b.drive_frequency - a.drive_frequency) * (t - a.temperature) /
                                              (b.temperature - a.temperature);
  return r;
}

Trajectory integrate_trajectory(const CoolingProtocol& p, const CoolingTable& table, double t_start) {
  p.check();
  if (!(t_start > p.t_floor)) throw std::invalid_argument("start temperature must lie above the floor");
  using State = std::array<double, 1>;
  namespace ode = boost::numeric::odeint;
  // u = log T:  du/dt = -Q(T) / (c_d T^(d+1))
  auto rhs = [&](const State& u, State& du, double) {
    const double T = std::exp(u[0]);
    du[0] = -table(T).total / (p.c_d * std::pow(T, p.d + 1));
  };
  auto stepper = ode::make_controlled(1e-10, 1e-8, ode::runge_kutta_dopri5<State>());

  Trajectory tr;
  auto record = [&](double t, double T) {
    const CoolingRates r = table(T);
    tr.points.push_back({t, T, r.drive_frequency, r.rp, r.rh, r.nrh});
    State du;
    rhs({std::log(T)}, du, t);
    if (std::abs(du[0]) > 1e-2 * r.drive_frequency) tr.quasi_static = false;
  };
  State u{std::log(t_start)};
  double t = 0;
  State du0;
  rhs(u, du0, 0);
  double dt = du0[0] != 0 ? 1e-3 / std::abs(du0[0]) : 1.0;
  record(t, t_start);
  const double lfloor = std::log(p.t_floor);
  for (long step = 0;; ++step) {
    if (t >= p.t_max) {
      tr.stop = Trajectory::Stop::TimeLimit;
      break;
    }
    if (du0[0] == 0) {  // nothing flows: the temperature never changes
      tr.stop = Trajectory::Stop::Stationary;
      break;
    }
    double dt_try = std::min(dt, p.t_max - t);
    State prev = u;
    const double t_prev = t;
    if (stepper.try_step(rhs, u, t, dt_try) == ode::fail) {
      dt = dt_try;
      if (dt < 1e-14 * std::max(t, 1.0))
        throw NumericalError("cooling trajectory: step size collapsed at T = " + std::to_string(std::exp(u[0])), t);
      continue;
    }
    dt = dt_try;
    if (u[0] <= lfloor) {
      // land on the floor by linear interpolation in log T
      const double f = (prev[0] - lfloor) / (prev[0] - u[0]);
      record(t_prev + f * (t - t_prev), p.t_floor);
      tr.stop = Trajectory::Stop::Floor;
      break;
    }
    record(t, std::exp(u[0]));
    // stationary: log T moved by less than the tolerance over the second half of the run
    const double half = 0.5 * t;
    auto it = std::lower_bound(tr.points.begin(), tr.points.end(), half,
                               [](const TrajectoryPoint& q, double v) { return q.t < v; });
    if (step > 20 && it != tr.points.begin() &&
        std::abs(std::log(it->temperature) - u[0]) < p.stationary_tol) {
      State du;
      rhs(u, du, t);
      if (std::abs(du[0]) * t > p.stationary_tol) continue;
      tr.stop = Trajectory::Stop::Stationary;
      break;
    }
    if (step > 10000000) throw NumericalError("cooling trajectory: too many steps", t);
  }
  return tr;
}

Trajectory integrate_trajectory(const CoolingProtocol& p, const CoolingTemplate& tpl, double gamma0, double t_start,
                                int threads) {
  p.check();
  const CoolingTable table(tpl, gamma0, p, p.t_floor, 2 * t_start, threads);
  return integrate_trajectory(p, table, t_start);
}

}  // namespace lqr
