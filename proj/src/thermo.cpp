#include "lqr/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "lqr/errors.hpp"

namespace lqr {

namespace {

constexpr double half_pi = std::numbers::pi / 2;

// per sideband k: S(a, b) = (pi/2) I_a(w_k) I_b(w) sum_{i in a, j in b} |A_k(i, j)|^2, signed through I_a odd
std::vector<Matrix> signed_rates(const FloquetSolver& s, const SidebandBlocks& b) {
  const BathKernels& bk = s.baths();
  const std::size_t L = bk.count();
  const double wd = s.model().drive_frequency;
  std::vector<double> ib(L);
  for (std::size_t a = 0; a < L; ++a) ib[a] = bk.density(a)(b.omega);
  std::vector<Matrix> out(b.A.size(), Matrix::Zero(L, L));
  for (int k = -b.k_max; k <= b.k_max; ++k) {
    const double wk = b.omega + k * wd;
    const Matrix mag = b[k].cwiseAbs2();
    Matrix& S = out[static_cast<std::size_t>(k + b.k_max)];
    for (std::size_t a = 0; a < L; ++a) {
      const double ia = bk.density(a)(wk);
      if (ia == 0) continue;
      for (std::size_t c = 0; c < L; ++c) {
        if (ib[c] == 0) continue;
        double sum = 0;
        for (int i : bk.sites(a))
          for (int j : bk.sites(c)) sum += mag(i, j);
        S(a, c) = half_pi * ia * ib[c] * sum;
      }
    }
  }
  return out;
}

double occupation(double w, double T) { return T == 0 ? 0.0 : planck(w, T); }

struct Layout {
  std::size_t L;
  std::size_t general(std::size_t a) const { return a; }
  std::size_t rp(std::size_t a) const { return L + a; }
  std::size_t rh(std::size_t a) const { return 2 * L + a; }
  std::size_t nrh(std::size_t a) const { return 3 * L + a; }
  std::size_t work() const { return 4 * L; }
  // sum of the moduli of all terms of the general currents: sets the round-off floor
  std::size_t scale() const { return 4 * L + 1; }
  std::size_t dim() const { return 4 * L + 2; }
  std::vector<bool> passive(bool refine_work) const {
    std::vector<bool> p(dim(), false);
    p[scale()] = true;
    p[work()] = !refine_work;
    return p;
  }
};

Eigen::VectorXd heat_integrand(const FloquetSolution& sol, const std::vector<double>& T, double w) {
  const FloquetSolver& s = sol.solver();
  const SidebandBlocks b = sol.at(w);
  const std::size_t L = T.size();
  const Layout lay{L};
  const double wd = s.model().drive_frequency;
  const auto S = signed_rates(s, b);
  std::vector<double> N(L);
  for (std::size_t a = 0; a < L; ++a) N[a] = occupation(w, T[a]);

  Eigen::VectorXd f = Eigen::VectorXd::Zero(lay.dim());
  double scale = 0;
  for (int k = -b.k_max; k <= b.k_max; ++k) {
    const Matrix& Sk = S[static_cast<std::size_t>(k + b.k_max)];
    const double wk = w + k * wd;
    const bool resonant = wk > 0;
    for (std::size_t a = 0; a < L; ++a) {
      double g = -k * wd * Sk(a, a) * (N[a] + 0.5);
      scale += std::abs(g);
      for (std::size_t c = 0; c < L; ++c) {
        if (c == a) continue;
        g += -wk * Sk(a, c) * (N[c] + 0.5) + w * Sk(c, a) * (N[a] + 0.5);
        scale += std::abs(wk * Sk(a, c) * (N[c] + 0.5)) + std::abs(w * Sk(c, a) * (N[a] + 0.5));
      }
      f(lay.general(a)) += g;
      if (resonant) {
        double rp = 0;
        for (std::size_t c = 0; c < L; ++c) {
          if (c == a) continue;
          rp += w * Sk(c, a) * N[a] - wk * Sk(a, c) * N[c];
        }
        f(lay.rp(a)) += rp;
        f(lay.rh(a)) += -k * wd * Sk(a, a) * N[a];
      } else if (k < 0 && wk < 0) {
        const double m = -k * wd;
        double nr = m * (-Sk(a, a)) * (N[a] + 0.5);
        for (std::size_t c = 0; c < L; ++c) {
          if (c == a) continue;
          nr += (m - w) * (-Sk(a, c)) * (N[c] + 0.5) + w * (-Sk(c, a)) * (N[a] + 0.5);
        }
        f(lay.nrh(a)) += -nr;
      }
    }
  }
  // work from the drive: -(1/4) sum_{jk} (k - j) w_d Im Tr[V_{k-j} A_j nu A_k^+]
  const Vector nu = s.baths().noise_diag(w, T);
  double work = 0;
  for (int j = -b.k_max; j <= b.k_max; ++j) {
    const CMatrix Anu = b[j] * nu.asDiagonal();
    for (auto& [m, vm] : s.model().drive) {
      const int k = j + m;
      if (k < -b.k_max || k > b.k_max) continue;
      const cplx tr = (vm * Anu).cwiseProduct(b[k].conjugate()).sum();
      work += -0.25 * m * wd * tr.imag();
    }
  }
  f(lay.work()) = work;
  f(lay.scale()) = scale;
  return f;
}

std::vector<double> temperatures(const std::vector<ReservoirSpec>& res, std::size_t L) {
  if (res.size() != L) throw std::invalid_argument("reservoir list does not match the solution");
  std::vector<double> T;
  for (auto& r : res) {
    if (!(r.temperature >= 0)) throw std::invalid_argument("reservoir temperature must be >= 0");
    T.push_back(r.temperature);
  }
  return T;
}

}  // namespace

double sideband_rate(const FloquetSolver& s, const SidebandBlocks& b, int k, std::size_t alpha, std::size_t beta) {
  return signed_rates(s, b)[static_cast<std::size_t>(k + b.k_max)](alpha, beta);
}

FrequencyPlan plan_frequency_integral(const FloquetSolution& sol, double rel_tol, double abs_tol, double omega_max) {
  const FloquetSolver& s = sol.solver();
  const BathKernels& bk = s.baths();
  FrequencyPlan p;
  double wmax = omega_max;
  if (!(wmax > 0)) {
    double cut = 0;
    for (std::size_t a = 0; a < bk.count(); ++a) {
      const auto& fam = bk.density(a).family();
      if (auto* q = std::get_if<PowerLawCutoff>(&fam)) cut = std::max(cut, q->cutoff);
      else if (auto* q = std::get_if<GappedAtOmega0>(&fam)) cut = std::max(cut, q->cutoff);
    }
    wmax = std::max(8 * cut, bk.support_edge());
  }
  p.omega_max = wmax;
  p.spec.rel_tol = rel_tol;
  p.spec.abs_tol = abs_tol;
  const double wd = std::abs(s.model().drive_frequency);
  const int K = s.k_max();
  auto add = [&](double x) {
    if (x > 0 && x < wmax) p.spec.breakpoints.push_back(x);
  };
  if (wd > 0)
    for (int m = 1; m <= K && m * wd < wmax; ++m) add(m * wd);
  for (double kink : bk.kinks())
    for (int k = -K; k <= K; ++k) add(kink - k * wd);
  // sharp cutoff edges of every sideband image
  for (std::size_t a = 0; a < bk.count(); ++a) {
    const auto& fam = bk.density(a).family();
    double c = 0, r = 0;
    if (auto* q = std::get_if<PowerLawCutoff>(&fam)) c = q->cutoff, r = q->sharpness;
    else if (auto* q = std::get_if<GappedAtOmega0>(&fam)) c = q->cutoff, r = q->sharpness;
    if (r > 0)
      for (int k = -K; k <= K; ++k)
        if (c - k * wd > 0 && c - k * wd < wmax) p.spec.peaks.push_back({c - k * wd, r});
  }
  for (auto& h : s.resonances(wmax)) p.spec.peaks.push_back(h);
  return p;
}

HeatRateReport heat_rates(const FloquetSolution& sol, const std::vector<ReservoirSpec>& res, const HeatOptions& opt) {
  const FloquetSolver& s = sol.solver();
  const std::size_t L = s.baths().count();
  const auto T = temperatures(res, L);
  const Layout lay{L};
  FrequencyPlan plan = plan_frequency_integral(sol, opt.rel_tol, opt.abs_tol, opt.omega_max);
  plan.spec.max_intervals = opt.max_intervals;
  plan.spec.threads = opt.threads;
  // all components are heat currents: ones that cancel to round-off are judged against the scale
  plan.spec.shared_rel_tol = 1e-3 * opt.rel_tol;
  plan.spec.passive = lay.passive(opt.refine_work);
  auto r = integrate([&](double w) { return heat_integrand(sol, T, w); }, lay.dim(), 0.0, plan.omega_max, plan.spec);

  const bool tri = s.model().time_reversal_invariant;
  HeatRateReport rep;
  rep.evaluations = r.evaluations;
  double sum = 0, sum_abs = 0;
  bool all_positive = true;
  double entropy = 0;
  for (std::size_t a = 0; a < L; ++a) {
    ReservoirHeat h;
    h.total = r.value(lay.general(a));
    h.error = r.error(lay.general(a));
    h.rp = r.value(lay.rp(a));
    h.rh = r.value(lay.rh(a));
    h.nrh = tri ? r.value(lay.nrh(a)) : std::numeric_limits<double>::quiet_NaN();
    h.decomposition_residual = h.total - (h.rp + h.rh + h.nrh);
    if (opt.zero_nrh && tri) {
      h.total -= h.nrh;
      h.nrh = 0;
    }
    sum += h.total;
    sum_abs += std::abs(h.total);
    if (T[a] > 0) entropy -= h.total / T[a];
    else all_positive = false;
    rep.reservoirs.push_back(h);
  }
  rep.work_rate = -sum;
  rep.work_rate_direct = r.value(lay.work());
  rep.scale = r.value(lay.scale());
  rep.entropy_production = all_positive ? entropy : std::numeric_limits<double>::quiet_NaN();
  rep.first_law_residual = std::abs(sum + rep.work_rate_direct) / std::max(1.0, sum_abs);
  return rep;
}

namespace {

double single_component(std::size_t alpha, const FloquetSolution& sol, const std::vector<ReservoirSpec>& res,
                        const HeatOptions& opt, int which) {
  const std::size_t L = sol.solver().baths().count();
  if (alpha >= L) throw std::out_of_range("reservoir index out of range");
  const auto T = temperatures(res, L);
  const Layout lay{L};
  FrequencyPlan plan = plan_frequency_integral(sol, opt.rel_tol, opt.abs_tol, opt.omega_max);
  plan.spec.max_intervals = opt.max_intervals;
  plan.spec.threads = opt.threads;
  plan.spec.shared_rel_tol = 1e-3 * opt.rel_tol;
  plan.spec.passive = {false, true};
  const std::size_t idx = which == 0 ? lay.general(alpha) : which == 1 ? lay.rp(alpha) : which == 2 ? lay.rh(alpha) : lay.nrh(alpha);
  auto r = integrate(
      [&](double w) {
        const Eigen::VectorXd f = heat_integrand(sol, T, w);
        return Eigen::Vector2d(f(idx), f(lay.scale())).eval();
      },
      2, 0.0, plan.omega_max, plan.spec);
  return r.value(0);
}

}  // namespace

double heat_total(std::size_t alpha, const FloquetSolution& sol, const std::vector<ReservoirSpec>& res,
                  const HeatOptions& opt) {
  return single_component(alpha, sol, res, opt, 0);
}
double heat_rp(std::size_t alpha, const FloquetSolution& sol, const std::vector<ReservoirSpec>& res,
               const HeatOptions& opt) {
  return single_component(alpha, sol, res, opt, 1);
}
double heat_rh(std::size_t alpha, const FloquetSolution& sol, const std::vector<ReservoirSpec>& res,
               const HeatOptions& opt) {
  return single_component(alpha, sol, res, opt, 2);
}
double heat_nrh(std::size_t alpha, const FloquetSolution& sol, const std::vector<ReservoirSpec>& res,
                const HeatOptions& opt) {
  if (!sol.solver().model().time_reversal_invariant)
    throw UnsupportedConfiguration("non-resonant heating is only defined for time-reversal-invariant drives");
  if (opt.zero_nrh) return 0.0;
  return single_component(alpha, sol, res, opt, 3);
}

Matrix transfer_matrix(const FloquetSolution& sol, double omega) {
  const FloquetSolver& s = sol.solver();
  const SidebandBlocks b = sol.at(omega);
  const auto S = signed_rates(s, b);
  const std::size_t L = s.baths().count();
  const double wd = s.model().drive_frequency;
  Matrix Q = Matrix::Zero(L, L);
  for (int k = -b.k_max; k <= b.k_max; ++k) {
    const Matrix& Sk = S[static_cast<std::size_t>(k + b.k_max)];
    const double wk = omega + k * wd;
    for (std::size_t a = 0; a < L; ++a) {
      Q(a, a) += -0.5 * k * wd * Sk(a, a);
      for (std::size_t c = 0; c < L; ++c) {
        if (c == a) continue;
        Q(a, c) += -0.5 * wk * Sk(a, c);
        Q(a, a) += 0.5 * omega * Sk(c, a);
      }
    }
  }
  return Q;
}

double undriven_heat(std::size_t alpha, const FloquetSolution& sol, const std::vector<ReservoirSpec>& res,
                     const HeatOptions& opt) {
  const FloquetSolver& s = sol.solver();
  const std::size_t L = s.baths().count();
  const auto T = temperatures(res, L);
  FrequencyPlan plan = plan_frequency_integral(sol, opt.rel_tol, opt.abs_tol, opt.omega_max);
  plan.spec.max_intervals = opt.max_intervals;
  auto r = integrate(
      [&](double w) {
        SidebandBlocks b = sol.at(w);
        const auto S = signed_rates(s, b);
        const Matrix& S0 = S[static_cast<std::size_t>(b.k_max)];
        double q = 0;
        for (std::size_t c = 0; c < L; ++c)
          if (c != alpha) q += w * S0(alpha, c) * (occupation(w, T[alpha]) - occupation(w, T[c]));
        return Eigen::VectorXd::Constant(1, q);
      },
      1, 0.0, plan.omega_max, plan.spec);
  return r.value(0);
}

KmaxSelection adaptive_k_max(const NetworkModel& model, const std::vector<ReservoirSpec>& res, SolverOptions opt,
                             const HeatOptions& heat, int start, int limit) {
  if (start < 1) throw std::invalid_argument("k_max search must start at 1 or above");
  const std::size_t L = res.size();
  const auto T = temperatures(res, L);
  auto solution = [&](int k) {
    opt.k_max = k;
    return std::make_unique<FloquetSolution>(model, res, opt);
  };
  KmaxSelection sel;
  auto lo = solution(start);
  for (int k = start; 2 * k <= limit; k *= 2, ++sel.doublings) {
    auto hi = solution(2 * k);
    // probe points from the finer system: its resonances include every sideband image
    const FrequencyPlan plan = plan_frequency_integral(*hi, heat.rel_tol, heat.abs_tol, heat.omega_max);
    std::vector<double> probe;
    for (int i = 1; i < 100; ++i) probe.push_back(plan.omega_max * i / 100.0);
    for (const auto& h : plan.spec.peaks)
      for (double d : {-1.0, -0.5, 0.0, 0.5, 1.0})
        if (h.center + d * h.width > 0 && h.center + d * h.width < plan.omega_max) probe.push_back(h.center + d * h.width);
    double diff = 0, top = 0;
    for (double w : probe) {
      const Eigen::VectorXd a = heat_integrand(*lo, T, w), b = heat_integrand(*hi, T, w);
      diff = std::max(diff, (a - b).cwiseAbs().maxCoeff());
      top = std::max(top, b.cwiseAbs().maxCoeff());
    }
    sel.change = top > 0 ? diff / top : 0.0;
    if (sel.change < 0.1 * heat.rel_tol) {
      sel.k_max = k;
      return sel;
    }
    lo = std::move(hi);
  }
  throw NumericalError("sideband cutoff did not settle below k_max = " + std::to_string(limit) +
                       " (last relative change " + std::to_string(sel.change) + ")");
}

}  // namespace lqr
