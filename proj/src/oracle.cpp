#include "lqr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "lqr/errors.hpp"
#include "lqr/quadrature.hpp"

namespace lqr {

namespace {

constexpr double two_pi = 2 * std::numbers::pi;

double coth_half(double w, double T) { return T > 0 ? 1.0 / std::tanh(w / (2 * T)) : 1.0; }

// the closed system: coordinates (x_S, x_B), momenta (p_S, p_B), bath masses 1
struct Closed {
  int n = 0, nb = 0;
  Matrix minv;
  std::vector<int> site;      // coupled site of each bath mode
  std::vector<int> owner;     // reservoir of each bath mode
  Vector w, c;                // bath frequencies and couplings
  std::vector<double> temperature;

  int dim() const { return n + nb; }

  Closed(const NetworkModel& m, const std::vector<DiscretizedBath>& baths) : n(m.size()) {
    minv = m.mass.inverse();
    std::vector<double> ws, cs;
    for (std::size_t r = 0; r < baths.size(); ++r) {
      const auto& b = baths[r];
      for (int s : b.sites) {
        if (s < 0 || s >= n) throw std::invalid_argument("bath '" + b.name + "' couples to a missing site");
        for (int j = 0; j < b.modes(); ++j) {
          site.push_back(s);
          owner.push_back(static_cast<int>(r));
          ws.push_back(b.frequencies(j));
          cs.push_back(b.couplings(j));
        }
      }
      temperature.push_back(b.temperature);
    }
    nb = static_cast<int>(ws.size());
    w = Eigen::Map<Vector>(ws.data(), nb);
    c = Eigen::Map<Vector>(cs.data(), nb);
  }

  // static shift the discrete baths induce, sum_j C_j^2 / w_j^2 on each site
  Matrix shift() const {
    Matrix s = Matrix::Zero(n, n);
    for (int g = 0; g < nb; ++g) s(site[g], site[g]) += c(g) * c(g) / (w(g) * w(g));
    return s;
  }
};

// propagates the transposed state: column i of Qt / Pt is coordinate / momentum i across all initial conditions
class Stepper {
 public:
  Stepper(const Closed& cs, const NetworkModel& m) : cs_(cs), m_(m) {}

  void strang(Matrix& Qt, Matrix& Pt, double& t, double h) const {
    drift(Qt, Pt, 0.5 * h);
    t += 0.5 * h;
    kick(Qt, Pt, t, h);
    drift(Qt, Pt, 0.5 * h);
    t += 0.5 * h;
  }

  // fourth-order Yoshida composition
  void step(Matrix& Qt, Matrix& Pt, double& t, double h) const {
    const double c = std::cbrt(2.0), w1 = 1 / (2 - c), w0 = -c / (2 - c);
    strang(Qt, Pt, t, w1 * h);
    strang(Qt, Pt, t, w0 * h);
    strang(Qt, Pt, t, w1 * h);
  }

 private:
  void drift(Matrix& Qt, const Matrix& Pt, double h) const {
    const int n = cs_.n;
    Qt.leftCols(n).noalias() += h * Pt.leftCols(n) * cs_.minv.transpose();
    Qt.rightCols(cs_.nb) += h * Pt.rightCols(cs_.nb);
  }
  void kick(const Matrix& Qt, Matrix& Pt, double t, double h) const {
    const int n = cs_.n;
    const Matrix v = m_.potential(t);
    Pt.leftCols(n).noalias() -= h * Qt.leftCols(n) * v.transpose();
    for (int g = 0; g < cs_.nb; ++g) {
      const int s = cs_.site[g];
      Pt.col(s) += (h * cs_.c(g)) * Qt.col(n + g);
      Pt.col(n + g) += h * (cs_.c(g) * Qt.col(s) - cs_.w(g) * cs_.w(g) * Qt.col(n + g));
    }
  }

  const Closed& cs_;
  const NetworkModel& m_;
};

// initial covariance: thermal bath modes (diagonal) and a dense system block
struct Initial {
  Vector diag;         // full phase space, system entries zero
  Matrix system;       // 2n x 2n
  std::vector<int> system_index;  // phase-space rows of (x_S, p_S)
};

Initial initial_state(const Closed& cs, const NetworkModel& m, const OracleOptions& opt) {
  const int n = cs.n, D2 = cs.dim();
  Initial in;
  in.diag = Vector::Zero(2 * D2);
  for (int g = 0; g < cs.nb; ++g) {
    const double wg = cs.w(g), ct = coth_half(wg, cs.temperature[static_cast<std::size_t>(cs.owner[g])]);
    in.diag(n + g) = ct / (2 * wg);
    in.diag(D2 + n + g) = wg * ct / 2;
  }
  for (int i = 0; i < n; ++i) in.system_index.push_back(i);
  for (int i = 0; i < n; ++i) in.system_index.push_back(D2 + i);

  if (opt.initial_system.size() > 0) {
    if (opt.initial_system.rows() != 2 * n || opt.initial_system.cols() != 2 * n)
      throw std::invalid_argument("initial system covariance must be 2n x 2n");
    in.system = opt.initial_system;
    return in;
  }
  double tmean = 0;
  for (double t : cs.temperature) tmean += t;
  if (!cs.temperature.empty()) tmean /= static_cast<double>(cs.temperature.size());
  const Matrix vr = m.v_static - cs.shift();
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(vr, m.mass);
  if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0))
    throw UnsupportedConfiguration("oracle: renormalized potential is not positive definite");
  Matrix xx = Matrix::Zero(n, n), pp = Matrix::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    const double W = std::sqrt(es.eigenvalues()(a)), ct = coth_half(W, tmean);
    const Vector q = es.eigenvectors().col(a);
    xx += q * q.transpose() * ct / (2 * W);
    pp += q * q.transpose() * W * ct / 2;
  }
  pp = m.mass * pp * m.mass;
  in.system = Matrix::Zero(2 * n, 2 * n);
  in.system.topLeftCorner(n, n) = xx;
  in.system.bottomRightCorner(n, n) = pp;
  return in;
}

// rows of Phi C0 Phi^T for the given propagator rows
Matrix covariance_rows(const Matrix& rows, const Initial& in) {
  Matrix y = rows * in.diag.asDiagonal();
  Matrix s(rows.rows(), static_cast<Eigen::Index>(in.system_index.size()));
  for (std::size_t i = 0; i < in.system_index.size(); ++i) s.col(static_cast<Eigen::Index>(i)) = rows.col(in.system_index[i]);
  const Matrix sy = s * in.system;
  for (std::size_t i = 0; i < in.system_index.size(); ++i) y.col(in.system_index[i]) += sy.col(static_cast<Eigen::Index>(i));
  return y;  // multiply by rows^T for the covariance
}

// diagonal of Phi C0 Phi^T
Vector covariance_diagonal(const Matrix& phi, const Initial& in) {
  return covariance_rows(phi, in).cwiseProduct(phi).rowwise().sum();
}

Matrix system_rows(const Matrix& phi, const Closed& cs) {
  const int n = cs.n, D2 = cs.dim();
  Matrix r(2 * n, phi.cols());
  r.topRows(n) = phi.topRows(n);
  r.bottomRows(n) = phi.middleRows(D2, n);
  return r;
}

Matrix system_block(const Matrix& rows, const Initial& in) {
  Matrix s = covariance_rows(rows, in) * rows.transpose();
  return 0.5 * (s + s.transpose());
}

double energy(const Matrix& sys, const NetworkModel& m, const Matrix& minv, double t) {
  const int n = m.size();
  return 0.5 * (minv * sys.bottomRightCorner(n, n)).trace() + 0.5 * (m.potential(t) * sys.topLeftCorner(n, n)).trace();
}

}  // namespace

double DiscretizedBath::recurrence_time() const { return two_pi / spacing; }

double significant_edge(const SpectralDensity& j, double tail) {
  const double edge = j.support_edge();
  const int n = 4000;
  double peak = 0;
  for (int i = 1; i <= n; ++i) peak = std::max(peak, std::abs(j(edge * i / n)));
  if (peak == 0) return edge;
  for (int i = n; i >= 1; --i)
    if (std::abs(j(edge * i / n)) > tail * peak) return std::min(edge, edge * (i + 1) / n);
  return edge;
}

DiscretizedBath discretize(const ReservoirSpec& r, int modes, double omega_max) {
  if (modes < 1) throw std::invalid_argument("a discretized bath needs at least one mode");
  const double top = omega_max > 0 ? omega_max : significant_edge(r.spectral);
  DiscretizedBath b;
  b.name = r.name;
  b.sites = r.sites;
  b.temperature = r.temperature;
  b.spacing = top / modes;
  b.frequencies.resize(modes);
  b.couplings.resize(modes);
  for (int j = 0; j < modes; ++j) {
    const double w = (j + 0.5) * b.spacing;
    b.frequencies(j) = w;
    b.couplings(j) = std::sqrt(std::max(0.0, w * r.spectral(w) * b.spacing));
  }
  return b;
}

double spectral_sum_error(const DiscretizedBath& b, const SpectralDensity& j, double bin) {
  const double top = b.spacing * b.modes();
  const int nbins = static_cast<int>(std::floor(top / bin + 1e-9));
  if (nbins < 1) throw std::invalid_argument("bin wider than the discretized range");
  std::vector<double> discrete(static_cast<std::size_t>(nbins), 0.0), exact(static_cast<std::size_t>(nbins));
  for (int m = 0; m < b.modes(); ++m) {
    const int k = static_cast<int>(b.frequencies(m) / bin);
    if (k < nbins) discrete[static_cast<std::size_t>(k)] += b.couplings(m) * b.couplings(m) / b.frequencies(m);
  }
  QuadratureSpec qs;
  qs.rel_tol = 1e-10;
  for (const double k : j.kinks()) qs.breakpoints.push_back(k);
  double largest = 0;
  for (int k = 0; k < nbins; ++k) {
    exact[static_cast<std::size_t>(k)] = integrate([&](double w) { return j(w); }, k * bin, (k + 1) * bin, qs);
    largest = std::max(largest, std::abs(exact[static_cast<std::size_t>(k)]));
  }
  double worst = 0;
  for (std::size_t k = 0; k < exact.size(); ++k)
    if (std::abs(exact[k]) > 1e-3 * largest) worst = std::max(worst, std::abs(discrete[k] - exact[k]) / std::abs(exact[k]));
  return worst;
}

OracleTrajectory simulate(const NetworkModel& model, const std::vector<DiscretizedBath>& baths,
                          const OracleOptions& opt) {
  if (opt.burn_in_periods < 1 || opt.average_periods < 1)
    throw std::invalid_argument("oracle needs at least one burn-in and one averaging period");
  const Closed cs(model, baths);
  const int n = cs.n, D2 = cs.dim(), D = 2 * D2;
  if (static_cast<std::size_t>(D) > opt.max_dimension) {
    std::ostringstream os;
    os << "oracle phase space has " << D << " rows, above the limit " << opt.max_dimension;
    throw UnsupportedConfiguration(os.str());
  }

  OracleTrajectory tr;
  tr.model = model;
  for (auto& b : baths) tr.reservoir_sites.push_back(b.sites);
  if (model.driven()) {
    tr.period = two_pi / model.drive_frequency;
  } else if (opt.block > 0) {
    tr.period = opt.block;
  } else {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(model.v_static - cs.shift(), model.mass);
    tr.period = two_pi / std::sqrt(std::max(es.eigenvalues().minCoeff(), 1e-12));
  }
  tr.burn_in_periods = opt.burn_in_periods;
  tr.average_periods = opt.average_periods;

  const double horizon = (opt.burn_in_periods + opt.average_periods) * tr.period;
  for (auto& b : baths)
    if (horizon >= b.recurrence_time()) {
      std::ostringstream os;
      os << "oracle horizon " << horizon << " reaches the recurrence time " << b.recurrence_time() << " of bath '"
         << b.name << "' (" << b.modes() << " modes, spacing " << b.spacing << ")";
      throw UnsupportedConfiguration(os.str());
    }

  // fastest motion in the closed system bounds the step
  double vmax = model.v_static.norm();
  for (auto& [k, vk] : model.drive) vmax += vk.norm();
  Eigen::SelfAdjointEigenSolver<Matrix> ms(model.mass);
  double top = std::sqrt(vmax / ms.eigenvalues().minCoeff());
  if (cs.nb > 0) top = std::max(top, cs.w.maxCoeff());
  tr.steps_per_period = std::max(opt.min_steps_per_period,
                                 static_cast<int>(std::ceil(tr.period * top / opt.max_phase_step)));
  const double h = tr.period / tr.steps_per_period;

  // one-period propagator, keeping the system rows at every step
  Matrix Qt = Matrix::Zero(D, D2), Pt = Matrix::Zero(D, D2);
  for (int i = 0; i < D2; ++i) Qt(i, i) = 1, Pt(D2 + i, i) = 1;
  auto phi_of = [&] {
    Matrix phi(D, D);
    phi.topRows(D2) = Qt.transpose();
    phi.bottomRows(D2) = Pt.transpose();
    return phi;
  };
  auto rows_of = [&] {
    Matrix r(2 * n, D);
    r.topRows(n) = Qt.leftCols(n).transpose();
    r.bottomRows(n) = Pt.leftCols(n).transpose();
    return r;
  };
  std::vector<Matrix> rows{rows_of()};
  const Stepper stepper(cs, model);
  for (int s = 0; s < tr.steps_per_period; ++s) {
    double t = s * h;  // no drift of the clock
    stepper.step(Qt, Pt, t, h);
    rows.push_back(rows_of());
  }
  const Matrix M = phi_of();

  // powers of the propagator; a parametric instability shows up as growth
  const double bound = 1e6 * std::max(1.0, M.cwiseAbs().maxCoeff());
  auto guard = [&](const Matrix& p, double when) {
    if (!p.allFinite() || p.cwiseAbs().maxCoeff() > bound) {
      std::ostringstream os;
      os << "oracle: state blew up by t = " << when << " (parametric resonance?)";
      throw NumericalError(os.str(), when);
    }
  };
  std::vector<Matrix> squares{M};
  const long last = opt.burn_in_periods + opt.average_periods;
  while ((1L << squares.size()) <= last) {
    squares.push_back(squares.back() * squares.back());
    guard(squares.back(), static_cast<double>(1L << (squares.size() - 1)) * tr.period);
  }
  auto power = [&](long k) {
    Matrix p = Matrix::Identity(D, D);
    for (std::size_t j = 0; k > 0; ++j, k >>= 1)
      if (k & 1) p = (p * squares[j]).eval();
    return p;
  };
  const long B = opt.burn_in_periods, P = opt.average_periods;
  std::vector<std::pair<long, Matrix>> ends;
  ends.emplace_back(B - 1, power(B - 1));
  ends.emplace_back(B, ends[0].second * M);
  ends.emplace_back(B + P - 1, P == 1 ? ends[1].second : (ends[1].second * power(P - 1)).eval());
  ends.emplace_back(B + P, ends[2].second * M);
  for (auto& [k, p] : ends) guard(p, static_cast<double>(k) * tr.period);

  const Initial in = initial_state(cs, model, opt);
  const std::size_t R = baths.size();
  for (auto& [k, p] : ends) {
    const double te = static_cast<double>(k) * tr.period;
    tr.end_times.push_back(te);
    const Matrix sys = system_block(system_rows(p, cs), in);
    tr.end_system.push_back(sys);
    tr.end_system_energy.push_back(energy(sys, model, cs.minv, te));
    const Vector d = covariance_diagonal(p, in);
    std::vector<double> e(R, 0.0);
    for (int g = 0; g < cs.nb; ++g)
      e[static_cast<std::size_t>(cs.owner[g])] += 0.5 * (d(D2 + n + g) + cs.w(g) * cs.w(g) * d(n + g));
    tr.end_bath_energy.push_back(e);
  }

  const Matrix& base = ends[2].second;
  for (int s = 0; s <= tr.steps_per_period; ++s) {
    tr.times.push_back(tr.end_times[2] + s * h);
    tr.system.push_back(system_block(rows[static_cast<std::size_t>(s)] * base, in));
  }

  auto change = [](const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(a.norm(), 1e-300); };
  tr.periodicity = std::max(change(tr.end_system[1], tr.end_system[0]), change(tr.end_system[3], tr.end_system[2]));
  if (opt.require_periodic && tr.periodicity > opt.periodicity_tol) {
    std::ostringstream os;
    os << "oracle: system state is not periodic after " << B << " burn-in periods (relative change "
       << tr.periodicity << " per period)";
    throw NumericalError(os.str(), tr.end_times[1]);
  }
  return tr;
}

OracleHeat measure_heat(const OracleTrajectory& tr, std::size_t alpha) {
  if (alpha >= tr.reservoir_sites.size()) throw std::out_of_range("reservoir index out of range");
  const NetworkModel& m = tr.model;
  const int n = m.size();
  const Matrix minv = m.mass.inverse();
  OracleHeat h;
  const double span = tr.end_times[3] - tr.end_times[1];
  h.heat = -(tr.end_bath_energy[3][alpha] - tr.end_bath_energy[1][alpha]) / span;
  auto bath_side = [&](std::size_t r) { return (tr.end_bath_energy[3][r] - tr.end_bath_energy[2][r]) / tr.period; };
  h.bath_side = bath_side(alpha);

  const std::set<int> mine(tr.reservoir_sites[alpha].begin(), tr.reservoir_sites[alpha].end());
  double group = 0;
  bool separable = true;
  for (std::size_t r = 0; r < tr.reservoir_sites.size(); ++r) {
    const std::set<int> other(tr.reservoir_sites[r].begin(), tr.reservoir_sites[r].end());
    if (other == mine) {
      group += bath_side(r);
    } else {
      for (int s : other)
        if (mine.count(s)) separable = false;
    }
  }
  Matrix proj = Matrix::Zero(n, n);
  for (int s : mine) proj(s, s) = 1;
  const auto& first = tr.system.front();
  const auto& back = tr.system.back();
  h.derivative_term =
      0.5 * (proj * (back.bottomRightCorner(n, n) - first.bottomRightCorner(n, n)) * minv).trace() / tr.period;
  // periodic integrand: the plain average over the samples is the trapezoidal rule
  double pv = 0;
  const std::size_t S = tr.system.size() - 1;
  for (std::size_t i = 0; i < S; ++i)
    pv += (proj * m.potential(tr.times[i]) * tr.system[i].topRightCorner(n, n) * minv).trace();
  pv /= static_cast<double>(S);
  h.system_side = h.derivative_term + pv;
  if (!separable) {
    h.system_side = h.identity_residual = std::numeric_limits<double>::quiet_NaN();
    return h;
  }
  h.identity_residual = std::abs(h.system_side + group);
  const double scale = std::max(std::abs(h.system_side), std::abs(group));
  const double floor = 10 * tr.periodicity * std::abs(tr.end_system_energy[3]) / tr.period;
  if (h.identity_residual > 0.02 * scale + floor) {
    std::ostringstream os;
    os << "oracle: heat into the system (" << h.system_side << ") and out of its reservoirs (" << group
       << ") disagree over the final period";
    throw NumericalError(os.str(), tr.end_times[3]);
  }
  return h;
}

double system_energy_drift(const OracleTrajectory& tr) {
  return (tr.end_system_energy[3] - tr.end_system_energy[1]) / (tr.end_times[3] - tr.end_times[1]);
}

OracleComparison run_oracle(const NetworkModel& model, const std::vector<ReservoirSpec>& reservoirs,
                            const OracleOptions& opt) {
  std::vector<DiscretizedBath> baths;
  for (auto& r : reservoirs) baths.push_back(discretize(r, opt.modes, opt.omega_max));
  const auto tr = simulate(model, baths, opt);
  OracleComparison c;
  for (std::size_t a = 0; a < reservoirs.size(); ++a) c.heat.push_back(measure_heat(tr, a));
  c.energy_drift = system_energy_drift(tr);
  c.periodicity = tr.periodicity;
  c.dimension = 2 * (model.size() + static_cast<int>(std::accumulate(baths.begin(), baths.end(), 0, [](int s, const DiscretizedBath& b) {
                                      return s + b.modes() * static_cast<int>(b.sites.size());
                                    })));
  return c;
}

}  // namespace lqr
