#include "lqr/covariance.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "lqr/thermo.hpp"

namespace lqr {

namespace {

// pack the upper triangle j <= k of the three block families into a real vector
struct Packer {
  int K, n;
  std::size_t pairs() const { return static_cast<std::size_t>((2 * K + 1) * (2 * K + 2) / 2); }
  std::size_t dim() const { return pairs() * 3 * 2 * static_cast<std::size_t>(n * n); }
};

Eigen::VectorXd integrand(const FloquetSolution& sol, const std::vector<double>& T, const Packer& pk, double w) {
  const SidebandBlocks b = sol.at(w);
  const double wd = sol.solver().model().drive_frequency;
  const Vector nu = sol.solver().baths().noise_diag(w, T);
  const int K = pk.K, nn = pk.n * pk.n;
  Eigen::VectorXd f(pk.dim());
  std::size_t pos = 0;
  auto put = [&](const CMatrix& m) {
    for (int i = 0; i < nn; ++i) {
      f(static_cast<Eigen::Index>(pos++)) = m.data()[i].real();
      f(static_cast<Eigen::Index>(pos++)) = m.data()[i].imag();
    }
  };
  for (int j = -K; j <= K; ++j) {
    const CMatrix An = b[j] * nu.asDiagonal();
    for (int k = j; k <= K; ++k) {
      const CMatrix h = 0.5 * An * b[k].adjoint();
      put(h);
      put((w + k * wd) * h);
      put((w + j * wd) * (w + k * wd) * h);
    }
  }
  return f;
}

}  // namespace

CovarianceBlocks sigma_blocks(const FloquetSolution& sol, const std::vector<ReservoirSpec>& res,
                              const CovarianceOptions& opt) {
  const FloquetSolver& s = sol.solver();
  std::vector<double> T;
  for (auto& r : res) T.push_back(r.temperature);
  if (T.size() != s.baths().count()) throw std::invalid_argument("reservoir list does not match the solution");
  const Packer pk{s.k_max(), s.size()};
  FrequencyPlan plan = plan_frequency_integral(sol, opt.rel_tol, 0.0, opt.omega_max);
  plan.spec.max_intervals = opt.max_intervals;
  plan.spec.threads = opt.threads;

  // scale from the static traces, so that tiny far-sideband blocks (and blocks that vanish
  // up to round-off) are held to an absolute bound
  auto r0 = integrate(
      [&](double w) {
        const SidebandBlocks b = sol.at(w);
        const Vector nu = s.baths().noise_diag(w, T);
        const double t = 0.5 * (b[0] * nu.asDiagonal() * b[0].adjoint()).trace().real();
        Eigen::VectorXd f(2);
        f << t, w * w * t;
        return f;
      },
      2, 0.0, plan.omega_max, plan.spec);
  const int nn = pk.n * pk.n;
  plan.spec.abs_tol = opt.rel_tol * std::min(std::abs(r0.value(0)), std::abs(r0.value(1))) / pk.n;
  auto r = integrate([&](double w) { return integrand(sol, T, pk, w); }, pk.dim(), 0.0, plan.omega_max,
                     plan.spec);

  CovarianceBlocks out;
  out.k_max = pk.K;
  out.n = pk.n;
  out.drive_frequency = s.model().drive_frequency;
  out.mass = s.model().mass;
  const std::size_t nb = static_cast<std::size_t>((2 * pk.K + 1) * (2 * pk.K + 1));
  out.xx.assign(nb, CMatrix::Zero(pk.n, pk.n));
  out.xp = out.xx;
  out.pp = out.xx;
  std::size_t pos = 0;
  auto take = [&] {
    CMatrix m(pk.n, pk.n);
    for (int i = 0; i < nn; ++i) {
      m.data()[i] = cplx(r.value(static_cast<Eigen::Index>(pos)), r.value(static_cast<Eigen::Index>(pos + 1)));
      pos += 2;
    }
    return m;
  };
  for (int j = -pk.K; j <= pk.K; ++j)
    for (int k = j; k <= pk.K; ++k) {
      CMatrix x = take(), p = take(), q = take();
      out.xx[out.index(j, k)] = x;
      out.xp[out.index(j, k)] = p;
      out.pp[out.index(j, k)] = q;
      if (j != k) {
        out.xx[out.index(k, j)] = x.adjoint();
        out.pp[out.index(k, j)] = q.adjoint();
      }
    }
  // xp_kj carries the weight of its own second index, (w + j w_d) for the (k, j) block
  for (int j = -pk.K; j <= pk.K; ++j)
    for (int k = -pk.K; k < j; ++k) {
      // xp_jk with j > k: (w + k w_d) A_j nu A_k^+ = xp_kj^+ + (k - j) w_d xx_jk
      out.xp[out.index(j, k)] = out.xp[out.index(k, j)].adjoint() + (k - j) * out.drive_frequency * out.xx[out.index(j, k)];
    }
  return out;
}

Matrix sigma_at(const CovarianceBlocks& b, double t) {
  const int n = b.n, K = b.k_max;
  CMatrix xx = CMatrix::Zero(n, n), xp = xx, pp = xx;
  for (int j = -K; j <= K; ++j)
    for (int k = -K; k <= K; ++k) {
      const cplx ph = std::exp(cplx(0, b.drive_frequency * (j - k) * t));
      xx += b.sxx(j, k) * ph;
      xp += b.sxp(j, k) * ph;
      pp += b.spp(j, k) * ph;
    }
  Matrix s(2 * n, 2 * n);
  s.topLeftCorner(n, n) = xx.real();
  const Matrix cxp = xp.imag() * b.mass;
  s.topRightCorner(n, n) = cxp;
  s.bottomLeftCorner(n, n) = cxp.transpose();
  s.bottomRightCorner(n, n) = b.mass * pp.real() * b.mass;
  // guard against round-off asymmetry in the diagonal blocks
  s.topLeftCorner(n, n) = 0.5 * (s.topLeftCorner(n, n) + s.topLeftCorner(n, n).transpose()).eval();
  s.bottomRightCorner(n, n) = 0.5 * (s.bottomRightCorner(n, n) + s.bottomRightCorner(n, n).transpose()).eval();
  return s;
}

Vector symplectic_eigenvalues(const Matrix& sigma) {
  const Eigen::Index n = sigma.rows() / 2;
  Matrix J = Matrix::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n).setIdentity();
  J.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  Eigen::EigenSolver<Matrix> es(J * sigma);
  std::vector<double> v;
  for (Eigen::Index i = 0; i < 2 * n; ++i)
    if (es.eigenvalues()(i).imag() > 0) v.push_back(es.eigenvalues()(i).imag());
  // degenerate pairs can come back with tiny real parts and lost signs
  if (static_cast<Eigen::Index>(v.size()) != n) {
    v.clear();
    std::vector<double> all;
    for (Eigen::Index i = 0; i < 2 * n; ++i) all.push_back(std::abs(es.eigenvalues()(i)));
    std::sort(all.begin(), all.end());
    for (Eigen::Index i = 0; i < n; ++i) v.push_back(all[static_cast<std::size_t>(2 * i)]);
  }
  std::sort(v.begin(), v.end());
  return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double system_energy(const CovarianceBlocks& b, const NetworkModel& m, double t) {
  const Matrix s = sigma_at(b, t);
  const int n = b.n;
  return 0.5 * (m.mass.inverse() * s.bottomRightCorner(n, n)).trace() +
         0.5 * (m.potential(t) * s.topLeftCorner(n, n)).trace();
}

double work_rate(const CovarianceBlocks& b, const NetworkModel& m) {
  double w = 0;
  const int K = b.k_max;
  for (int j = -K; j <= K; ++j)
    for (int k = -K; k <= K; ++k) {
      if (j == k) continue;
      const CMatrix v = m.harmonic(k - j);
      w += -0.5 * (k - j) * b.drive_frequency * (v * b.sxx(j, k)).trace().imag();
    }
  return w;
}

}  // namespace lqr
