#include "lqr/weakcoupling.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "lqr/kernels.hpp"

namespace lqr {

namespace {

double peak_value(const FloquetSolver& s, const Vector& q, double w) {
  const CVector qc = q.cast<cplx>();
  return std::norm(qc.dot(s.green(w) * qc));
}

double thermal(double d, double T, ThermalFactor f) {
  if (T == 0) return 0.0;
  return f == ThermalFactor::Planck ? planck(d, T) : std::exp(-d / T);
}

}  // namespace

double resonance_peak(const FloquetSolver& s, const Vector& q, double guess) {
  // bracket by scanning around the guess, then golden section
  const double step = 1e-3 * guess;
  double best = guess, fbest = peak_value(s, q, guess);
  for (int i = -50; i <= 50; ++i) {
    const double w = guess + i * step;
    const double f = peak_value(s, q, w);
    if (f > fbest) fbest = f, best = w;
  }
  double a = best - step, b = best + step;
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = peak_value(s, q, c), fd = peak_value(s, q, d);
  for (int i = 0; i < 200 && (b - a) > 1e-15 * guess; ++i) {
    if (fc > fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a);
      fc = peak_value(s, q, c);
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a);
      fd = peak_value(s, q, d);
    }
  }
  return 0.5 * (a + b);
}

double resonance_half_width(const FloquetSolver& s, const Vector& q, double guess) {
  const double w0 = resonance_peak(s, q, guess);
  const double top = peak_value(s, q, w0);
  auto edge = [&](double dir) {
    double lo = 0, hi = 1e-12 * w0;
    while (peak_value(s, q, w0 + dir * hi) > top / 2) {
      lo = hi;
      hi *= 2;
      if (hi > w0) throw NumericalError("resonance has no half-maximum point", w0);
    }
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
      const double m = 0.5 * (lo + hi);
      (peak_value(s, q, w0 + dir * m) > top / 2 ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
  };
  return 0.5 * (edge(-1) + edge(1));
}

NormalModeBasis normal_modes(const NetworkModel& model, const std::vector<ReservoirSpec>& reservoirs) {
  NetworkModel m = model;
  m.drive.clear();
  SolverOptions so;
  so.k_max = 1;
  const FloquetSolver s(m, reservoirs, so);

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(renormalized_static(m, reservoirs), m.mass);
  if (es.info() != Eigen::Success) throw NumericalError("normal-mode eigenproblem failed");
  NormalModeBasis b;
  b.frequencies = es.eigenvalues().cwiseSqrt();
  b.modes = es.eigenvectors();
  const int n = m.size();
  b.decay.resize(n);
  for (int a = 0; a < n; ++a) {
    const Vector q = b.modes.col(a);
    b.decay(a) = resonance_half_width(s, q, b.frequencies(a));
    if (b.decay(a) > 0.1 * b.frequencies(a)) {
      std::ostringstream os;
      os << "mode " << a << ": width " << b.decay(a) << " is not small against " << b.frequencies(a);
      b.warnings.push_back(os.str());
    }
  }
  const double gmax = b.decay.maxCoeff();
  for (int a = 0; a + 1 < n; ++a)
    if (b.frequencies(a + 1) - b.frequencies(a) < 10 * gmax)
      throw NumericalError("near-degenerate normal modes " + std::to_string(a) + " and " + std::to_string(a + 1),
                           b.frequencies(a));

  b.weight = Matrix::Zero(n, static_cast<Eigen::Index>(reservoirs.size()));
  for (std::size_t r = 0; r < reservoirs.size(); ++r) {
    b.densities.push_back(reservoirs[r].spectral);
    for (int a = 0; a < n; ++a)
      for (int i : reservoirs[r].sites) b.weight(a, static_cast<Eigen::Index>(r)) += b.modes(i, a) * b.modes(i, a);
  }
  return b;
}

CMatrix weak_green(const NormalModeBasis& b, double w) {
  const Eigen::Index n = b.modes.rows();
  CMatrix g = CMatrix::Zero(n, n);
  for (int a = 0; a < b.count(); ++a) {
    const cplx z = w - cplx(0, b.decay(a));
    const CVector q = b.modes.col(a).cast<cplx>();
    g += q * q.transpose() / (b.frequencies(a) * b.frequencies(a) - z * z);
  }
  return g;
}

ClosedFormHeat resonant_heat_closed_form(int alpha, const NormalModeBasis& b, const Matrix& v1, double wd, double t0,
                                         ThermalFactor factor) {
  if (b.weight.cols() != 2) throw UnsupportedConfiguration("closed form needs exactly two reservoirs");
  if (alpha < 0 || alpha > 1) throw std::out_of_range("reservoir index");
  if (!(t0 >= 0)) throw std::invalid_argument("temperature must be non-negative");
  const double W = b.frequencies(0), d = W - wd;
  if (!(wd > 0) || !(d > 0)) throw UnsupportedConfiguration("closed form needs 0 < w_d < Omega_0");
  const int beta = 1 - alpha;
  const Vector q = b.modes.col(0);
  const double V1 = q.dot(v1 * q);
  const double Ia_W = b.density(0, alpha, W), Ia_d = b.density(0, alpha, d);
  const double Ib_W = b.density(0, beta, W), Ib_d = b.density(0, beta, d);
  const double pref = std::numbers::pi * std::numbers::pi / 8 * thermal(d, t0, factor) / (W * W * b.decay(0)) *
                      V1 * V1 / std::pow(W * W - d * d, 2);
  ClosedFormHeat out;
  out.bracket = d * Ib_W * Ia_d - W * Ia_W * Ib_d - wd * Ia_W * Ia_d;
  out.value = pref * out.bracket;
  return out;
}

ClosedFormHeat resonant_heat_closed_form(int alpha, const NormalModeBasis& b, const NetworkModel& m, double t0,
                                         ThermalFactor factor) {
  if (m.max_harmonic() != 1) throw UnsupportedConfiguration("closed form needs a single-harmonic drive");
  const CMatrix h = m.harmonic(1);
  if (!m.time_reversal_invariant || h.imag().norm() > 0)
    throw UnsupportedConfiguration("closed form needs a time-reversal-invariant drive");
  return resonant_heat_closed_form(alpha, b, h.real(), m.drive_frequency, t0, factor);
}

double peak_integral(int k, int a, int b, const NormalModeBasis& basis, const Matrix& vk, double wd, double t) {
  const double W = basis.frequencies(0), c = W - k * wd;
  if (!(c > 0)) throw UnsupportedConfiguration("sideband peak lies at negative frequency");
  const Vector q = basis.modes.col(0);
  const double v = q.dot(vk * q);
  return std::numbers::pi * std::numbers::pi / 8 * thermal(c, t, ThermalFactor::Planck) / (W * W * basis.decay(0)) *
         v * v * basis.density(0, b, c) * basis.density(0, a, W) / std::pow(W * W - c * c, 2);
}

double adaptive_heat(int alpha, const NormalModeBasis& b, const Matrix& v1, double t0) {
  if (b.weight.cols() != 2) throw UnsupportedConfiguration("adaptive estimate needs exactly two reservoirs");
  if (alpha < 0 || alpha > 1) throw std::out_of_range("reservoir index");
  const double W = b.frequencies(0);
  if (!(t0 > 0) || t0 >= W / 2) throw UnsupportedConfiguration("adaptive estimate needs 0 < T0 < Omega_0 / 2");
  const Vector q = b.modes.col(0);
  const double V1 = q.dot(v1 * q);
  return std::numbers::pi * std::numbers::pi / (8 * std::numbers::e) * V1 * V1 / std::pow(W, 6) * t0 *
         b.density(0, alpha, t0) * b.density(0, 1 - alpha, W) / b.decay(0);
}

}  // namespace lqr
