#include "lqr/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace lqr {

FloquetSolver::FloquetSolver(NetworkModel model, std::vector<ReservoirSpec> reservoirs, SolverOptions opt)
    : model_(std::move(model)), reservoirs_(std::move(reservoirs)), opt_(opt) {
  if (opt_.k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  const int n = model_.size();
  if (n == 0 || model_.mass.cols() != n || model_.v_static.rows() != n)
    throw std::invalid_argument("inconsistent network dimensions");
  for (auto& [k, v] : model_.drive)
    if (v.rows() != n || v.cols() != n) throw std::invalid_argument("drive harmonic has wrong dimensions");
  baths_ = std::make_shared<BathKernels>(n, reservoirs_);
  v_renorm_ = model_.v_static;
  v_renorm_.diagonal() -= baths_->gamma0_diag();
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(v_renorm_, model_.mass);
  if (es.eigenvalues().minCoeff() <= 0)
    throw std::invalid_argument("renormalized static potential is not positive definite");
}

CMatrix FloquetSolver::inverse_green(double w) const {
  CMatrix g = (model_.v_static - model_.mass * (w * w)).cast<cplx>();
  const Vector k = baths_->reactive_diag(w);
  const Vector i = baths_->spectral_diag(w);
  for (int s = 0; s < g.rows(); ++s) g(s, s) += cplx(-k(s), std::numbers::pi / 2 * i(s));
  return g;
}

CMatrix FloquetSolver::green(double w) const { return inverse_green(w).partialPivLu().inverse(); }

SidebandBlocks FloquetSolver::solve(double omega) const {
  const int n = size(), K = opt_.k_max, nb = 2 * K + 1, D = nb * n;
  const double wd = model_.drive_frequency;
  CMatrix B = CMatrix::Zero(D, D);
  for (int k = -K; k <= K; ++k) {
    const int r = (k + K) * n;
    B.block(r, r, n, n) = inverse_green(omega + k * wd);
    for (auto& [j, vj] : model_.drive) {
      const int m = k - j;
      if (m < -K || m > K) continue;
      B.block(r, (m + K) * n, n, n) += vj;
    }
  }
  CMatrix E = CMatrix::Zero(D, n);
  E.block(K * n, 0, n, n).setIdentity();
  Eigen::PartialPivLU<CMatrix> lu(B);
  CMatrix X = lu.solve(E);

  SidebandBlocks out;
  out.omega = omega;
  out.k_max = K;
  out.rcond = lu.rcond();
  out.residual = (B * X - E).norm() / (B.norm() * X.norm() + E.norm());
  out.A.resize(nb);
  for (int k = -K; k <= K; ++k) out[k] = X.block((k + K) * n, 0, n, n);

  if (!(out.rcond >= opt_.min_rcond) || !(out.residual <= opt_.max_residual) || !X.allFinite()) {
    int worst = 0;
    double big = -1;
    for (int k = -K; k <= K; ++k)
      if (out[k].norm() > big) {
        big = out[k].norm();
        worst = k;
      }
    std::ostringstream os;
    os.precision(17);
    os << "ill-conditioned sideband system at w = " << omega << " (rcond " << out.rcond << ", residual "
       << out.residual << "), dominant sideband k = " << worst;
    throw InstabilityError(os.str(), omega, worst, out.rcond);
  }
  return out;
}

SidebandBlocks FloquetSolver::perturbative(double omega) const {
  const int n = size(), K = opt_.k_max;
  const double wd = model_.drive_frequency;
  std::vector<CMatrix> g;
  for (int k = -K; k <= K; ++k) g.push_back(green(omega + k * wd));
  SidebandBlocks cur;
  cur.omega = omega;
  cur.k_max = K;
  cur.A.assign(2 * K + 1, CMatrix::Zero(n, n));
  cur[0] = g[K];
  // two sweeps of the Neumann series: exact through second order in the drive
  for (int sweep = 0; sweep < 2; ++sweep) {
    SidebandBlocks next = cur;
    for (int k = -K; k <= K; ++k) {
      CMatrix acc = CMatrix::Zero(n, n);
      for (auto& [j, vj] : model_.drive) {
        const int m = k - j;
        if (m < -K || m > K) continue;
        acc += vj * cur[m];
      }
      next[k] = (k == 0 ? g[K] : CMatrix::Zero(n, n)) - g[k + K] * acc;
    }
    cur = std::move(next);
  }
  return cur;
}

SidebandBlocks FloquetSolver::first_order(double omega) const {
  const int n = size(), K = opt_.k_max;
  const double wd = model_.drive_frequency;
  SidebandBlocks b;
  b.omega = omega;
  b.k_max = K;
  b.A.assign(2 * K + 1, CMatrix::Zero(n, n));
  b[0] = green(omega);
  for (auto& [k, vk] : model_.drive)
    if (k >= -K && k <= K) b[k] = -green(omega + k * wd) * vk * b[0];
  return b;
}

SidebandBlocks FloquetSolver::amplitudes(double omega) const {
  return opt_.method == SolverOptions::Method::WeakDrive ? first_order(omega) : solve(omega);
}

std::vector<PeakHint> FloquetSolver::resonances(double omega_max) const {
  if (opt_.method == SolverOptions::Method::WeakDrive && model_.driven()) {
    // poles of the undriven network and their sideband images
    FloquetSolver undriven(*this);
    undriven.model_.drive.clear();
    undriven.opt_.method = SolverOptions::Method::Exact;
    undriven.opt_.k_max = 0;
    std::vector<PeakHint> hints;
    for (auto& h : undriven.resonances(omega_max + opt_.k_max * std::abs(model_.drive_frequency)))
      for (int k = -opt_.k_max; k <= opt_.k_max; ++k) {
        const double c = h.center - k * model_.drive_frequency;
        if (c > 0 && c <= omega_max) hints.push_back({c, h.width});
      }
    std::sort(hints.begin(), hints.end(), [](auto& a, auto& b) { return a.center < b.center; });
    return hints;
  }
  const int n = size(), K = opt_.k_max, nb = 2 * K + 1, D = nb * n;
  const double wd = model_.drive_frequency;
  const Matrix minv = model_.mass.inverse();
  // lambda^2 (1 x M) + lambda (2 diag(k wd) x M) - A0 = 0 with
  // A0 = blockdiag(V_R - M k^2 wd^2) + V_{k-m}; companion form in (x, lambda x)
  CMatrix A0 = CMatrix::Zero(D, D);
  for (int k = -K; k <= K; ++k) {
    const int r = (k + K) * n;
    A0.block(r, r, n, n) = (v_renorm_ - model_.mass * (k * k * wd * wd)).cast<cplx>();
    for (auto& [j, vj] : model_.drive) {
      const int m = k - j;
      if (m < -K || m > K) continue;
      A0.block(r, (m + K) * n, n, n) += vj;
    }
  }
  CMatrix L = CMatrix::Zero(2 * D, 2 * D);
  L.topRightCorner(D, D).setIdentity();
  for (int k = -K; k <= K; ++k) {
    const int r = (k + K) * n;
    L.block(D + r, 0, n, D) = minv.cast<cplx>() * A0.block(r, 0, n, D);
    L.block(D + r, D + r, n, n).diagonal().setConstant(-2.0 * k * wd);
  }
  Eigen::ComplexEigenSolver<CMatrix> es(L);
  std::vector<PeakHint> hints;
  const double floor_width = 1e-10 * std::max(1.0, omega_max);
  for (int e = 0; e < 2 * D; ++e) {
    const cplx lam = es.eigenvalues()(e);
    if (lam.real() <= 0 || lam.real() > omega_max) continue;
    const Eigen::VectorXcd x = es.eigenvectors().col(e).head(D);
    // first-order shift from the reservoirs: delta B = diag(gamma(0) - K + i pi/2 I)
    cplx num = 0, den = 0;
    const double lr = lam.real();
    for (int k = -K; k <= K; ++k) {
      const double wk = lr + k * wd;
      const Vector kr = baths_->reactive_diag(wk);
      const Vector g0 = baths_->gamma0_diag();
      const Vector sp = baths_->spectral_diag(wk);
      for (int s = 0; s < n; ++s) {
        const cplx xs = x((k + K) * n + s);
        num += std::norm(xs) * cplx(g0(s) - kr(s), std::numbers::pi / 2 * sp(s));
      }
      // d/dlambda of the quadratic: -(2 lambda + 2 k wd) M
      const Eigen::VectorXcd xb = x.segment((k + K) * n, n);
      den += -(2.0 * (lr + k * wd)) * (xb.adjoint() * model_.mass.cast<cplx>() * xb)(0, 0);
    }
    if (std::abs(den) == 0) continue;
    cplx shifted = lam - num / den;
    // mixed positive/negative-frequency vectors (near a parametric resonance) make the
    // first-order shift meaningless; keep the bare position then
    if (!(std::abs(num / den) < 0.1 * std::max(lr, wd))) shifted = cplx(lr, 0);
    hints.push_back({shifted.real(), std::max(std::abs(shifted.imag()), floor_width)});
  }
  std::sort(hints.begin(), hints.end(), [](auto& a, auto& b) { return a.center < b.center; });
  return hints;
}

FloquetSolution::FloquetSolution(std::shared_ptr<const FloquetSolver> solver, std::size_t cache_limit)
    : solver_(std::move(solver)), cache_limit_(cache_limit) {}

FloquetSolution::FloquetSolution(NetworkModel model, std::vector<ReservoirSpec> reservoirs, SolverOptions opt)
    : FloquetSolution(std::make_shared<FloquetSolver>(std::move(model), std::move(reservoirs), opt)) {}

SidebandBlocks FloquetSolution::at(double omega) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(omega);
    if (it != cache_.end()) return it->second;
  }
  SidebandBlocks b = solver_->amplitudes(omega);
  std::lock_guard<std::mutex> lock(mutex_);
  if (cache_.size() < cache_limit_) cache_.emplace(omega, b);
  return b;
}

std::vector<double> FloquetSolution::grid() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<double> g;
  for (auto& [w, b] : cache_) g.push_back(w);
  return g;
}

NetworkModel time_reversed(const NetworkModel& m) {
  NetworkModel r = m;
  r.drive.clear();
  for (auto& [k, v] : m.drive) r.drive[-k] = v;
  return r;
}

NetworkModel negated_frequency(const NetworkModel& m) {
  NetworkModel r = m;
  r.drive_frequency = -m.drive_frequency;
  return r;
}

SymmetryReport check_symmetries(const NetworkModel& m, const std::vector<ReservoirSpec>& res,
                                const std::vector<double>& omegas, int k_check, SolverOptions opt) {
  FloquetSolver fwd(m, res, opt), rev(time_reversed(m), res, opt), neg(negated_frequency(m), res, opt);
  k_check = std::min(k_check, opt.k_max);
  const double wd = m.drive_frequency;
  SymmetryReport rep;
  for (double w : omegas) {
    const SidebandBlocks a = fwd.solve(w), ar = rev.solve(w), an = neg.solve(w), am = fwd.solve(-w);
    double scale = 0;
    for (int k = -opt.k_max; k <= opt.k_max; ++k) scale = std::max(scale, a[k].norm());
    for (int k = -k_check; k <= k_check; ++k) {
      rep.reversal = std::max(rep.reversal, (ar[k] - an[-k]).norm() / scale);
      const SidebandBlocks ash = fwd.solve(w + k * wd);
      rep.transpose = std::max(rep.transpose, (ar[k] - ash[-k].transpose()).norm() / scale);
      rep.conjugation = std::max(rep.conjugation, (a[k].conjugate() - am[-k]).norm() / scale);
    }
  }
  return rep;
}

}  // namespace lqr
