#include "doctest.h"

#include <cmath>

#include "lqr/cooling.hpp"
#include "lqr/floquet.hpp"

using namespace lqr;

namespace {

std::vector<ReservoirSpec> ohmic(double g, double T = 0.1) {
  return {{"bath", {0}, SpectralDensity(PowerLawCutoff{g, 1.0, 2.0, 0.1}), T}};
}

NetworkModel single(double v1, double wd) {
  NetworkModel m;
  m.mass = Matrix::Identity(1, 1);
  m.v_static = Matrix::Constant(1, 1, 1.0);
  if (v1 != 0) m.set_harmonic(1, CMatrix::Constant(1, 1, v1));
  m.drive_frequency = wd;
  return m;
}

// two oscillators, two baths, a complex (non-time-reversal-invariant) drive
NetworkModel pair_complex() {
  NetworkModel m;
  m.mass = Matrix::Identity(2, 2);
  m.mass(1, 1) = 1.3;
  m.v_static.resize(2, 2);
  m.v_static << 1.2, 0.15, 0.15, 0.9;
  CMatrix v1(2, 2);
  v1 << cplx(0.04, 0.02), cplx(0.01, -0.03), cplx(0.01, -0.03), cplx(0.02, 0.0);
  CMatrix v2(2, 2);
  v2 << cplx(0.0, 0.01), 0.0, 0.0, cplx(0.01, 0.005);
  m.set_harmonic(1, v1);
  m.set_harmonic(2, v2);
  m.drive_frequency = 0.37;
  m.time_reversal_invariant = false;
  return m;
}

std::vector<ReservoirSpec> pair_baths() {
  return {{"a", {0}, SpectralDensity(PowerLawCutoff{0.05, 1.0, 1.5, 0.1}), 0.3},
          {"b", {1}, SpectralDensity(GappedAtOmega0{0.08, 1.0, 1.2, 0.1, 1.4}), 0.1}};
}

// independent scalar continued fraction for a single oscillator with V(t) = V0 + 2 v cos(w_d t)
cplx continued_fraction_A0(const FloquetSolver& s, double w, double v, int depth) {
  auto gi = [&](int k) { return s.inverse_green(w + k * s.model().drive_frequency)(0, 0); };
  cplx up = gi(depth), dn = gi(-depth);
  for (int k = depth - 1; k >= 1; --k) {
    up = gi(k) - v * v / up;
    dn = gi(-k) - v * v / dn;
  }
  return 1.0 / (gi(0) - v * v / up - v * v / dn);
}

}  // namespace

TEST_CASE("undriven solution is the bare Green function") {
  FloquetSolver s(single(0.0, 0.8), ohmic(0.05));
  auto b = s.solve(0.93);
  CHECK((b[0] - s.green(0.93)).norm() < 1e-14);
  for (int k = 1; k <= s.k_max(); ++k) {
    CHECK(b[k].norm() == 0.0);
    CHECK(b[-k].norm() == 0.0);
  }
  CHECK(b.residual < 1e-14);
}

TEST_CASE("sideband solve agrees with a continued fraction") {
  const double v = 0.08;
  SolverOptions opt;
  opt.k_max = 6;
  FloquetSolver s(single(v, 0.73), ohmic(0.05), opt);
  for (double w : {0.1, 0.27, 0.98, 1.5}) {
    auto b = s.solve(w);
    const cplx cf = continued_fraction_A0(s, w, v, 6);
    CHECK(std::abs(b[0](0, 0) - cf) < 1e-12 * std::abs(cf));
  }
}

TEST_CASE("perturbative blocks match the full solve to third order") {
  SolverOptions opt;
  opt.k_max = 4;
  for (double v : {1e-2, 5e-3}) {
    FloquetSolver s(single(v, 0.61), ohmic(0.05), opt);
    auto a = s.solve(0.5), p = s.perturbative(0.5);
    const double d0 = std::abs(a[0](0, 0) - p[0](0, 0)) / std::abs(a[0](0, 0));
    const double d1 = std::abs(a[1](0, 0) - p[1](0, 0)) / std::abs(a[1](0, 0));
    CHECK(d0 < 50 * v * v * v);
    CHECK(d1 < 50 * v * v);
  }
}

TEST_CASE("symmetries of the sideband blocks") {
  SolverOptions opt;
  opt.k_max = 6;
  auto rep = check_symmetries(pair_complex(), pair_baths(), {0.11, 0.52, 0.95, 1.31}, 2, opt);
  CHECK(rep.reversal < 1e-12);
  CHECK(rep.conjugation < 1e-12);
  CHECK(rep.transpose < 1e-8);
}

TEST_CASE("resonance hints locate the damped normal mode") {
  const double g = 0.02;
  FloquetSolver s(single(0.0, 0.8), ohmic(g));
  auto hints = s.resonances(4.0);
  REQUIRE_FALSE(hints.empty());
  // the undriven resonance is where Re g^-1 vanishes
  PeakHint h{0, 0};
  for (auto& x : hints)
    if (std::abs(x.center - 1) < 0.2) h = x;
  REQUIRE(h.width > 0);
  // half width at half maximum of |g|^2, located by bisection
  auto mag = [&](double w) { return std::norm(s.green(w)(0, 0)); };
  double lo = h.center - 0.05, hi = h.center + 0.05, peak = h.center;
  for (int i = 0; i < 200; ++i) {
    double m1 = peak - (hi - lo) / 3, m2 = peak + (hi - lo) / 3;
    (mag(m1) > mag(m2) ? hi : lo) = (mag(m1) > mag(m2) ? m2 : m1);
    peak = 0.5 * (lo + hi);
  }
  const double top = mag(peak);
  double a = peak, b = peak + 0.1;
  for (int i = 0; i < 200; ++i) {
    double m = 0.5 * (a + b);
    (mag(m) > top / 2 ? a : b) = m;
  }
  const double hwhm = a - peak;
  CHECK(h.center == doctest::Approx(peak).epsilon(1e-3));
  CHECK(h.width == doctest::Approx(hwhm).epsilon(0.02));
}

TEST_CASE("driven resonances include sideband images") {
  SolverOptions opt;
  opt.k_max = 2;
  FloquetSolver s(single(0.05, 0.7), ohmic(0.02), opt);
  auto hints = s.resonances(3.0);
  bool image = false;
  for (auto& h : hints)
    if (std::abs(h.center - 0.3) < 0.05) image = true;
  CHECK(image);
}

TEST_CASE("singular sideband system raises an instability error") {
  FloquetSolver s(single(0.0, 0.8), ohmic(0.0));
  CHECK_THROWS_AS(s.solve(1.0), InstabilityError);
}

TEST_CASE("solution cache records the visited grid") {
  FloquetSolution sol(single(0.05, 0.8), ohmic(0.05));
  sol.at(0.5);
  sol.at(0.25);
  sol.at(0.5);
  auto g = sol.grid();
  REQUIRE(g.size() == 2);
  CHECK(g[0] < g[1]);
}

namespace {

// the reference cooler at gamma0 = 1e-3, T = 0.1, w_d = 0.9, exact solve
FloquetSolver reference_solver(int k_max) {
  auto tpl = reference_cooling_setup(1.0);
  auto in = tpl.instantiate(1e-3, 0.1, 0.9);
  SolverOptions so;
  so.k_max = k_max;
  return FloquetSolver(in.model, in.reservoirs, so);
}

// residual of the k_max solution placed in the system truncated at k_max + 2
double embedded_residual(const FloquetSolver& s, const SidebandBlocks& b, double w) {
  const int K = b.k_max + 2, n = s.size();
  const double wd = s.model().drive_frequency;
  auto A = [&](int k) { return std::abs(k) <= b.k_max ? b[k] : CMatrix::Zero(n, n).eval(); };
  double r = 0;
  for (int k = -K; k <= K; ++k) {
    CMatrix row = s.inverse_green(w + k * wd) * A(k);
    for (auto& [j, vj] : s.model().drive)
      if (std::abs(k - j) <= K) row += vj * A(k - j);
    if (k == 0) row -= CMatrix::Identity(n, n);
    r += row.squaredNorm();
  }
  return std::sqrt(r);
}

}  // namespace

TEST_CASE("truncation converges on the reference cooler") {
  const auto s6 = reference_solver(6), s8 = reference_solver(8);
  for (double w : {0.05, 0.45, 0.98, 1.0, 1.37, 2.2}) {
    const auto a = s6.solve(w), b = s8.solve(w);
    double scale = 0, diff = 0;
    for (int k = -6; k <= 6; ++k) {
      scale = std::max(scale, b[k].norm());
      diff = std::max(diff, (a[k] - b[k]).norm());
    }
    CHECK(diff < 1e-9 * scale);
  }
  // the k_max solution fits the larger system better as k_max grows
  for (double w : {0.45, 1.0}) {
    double prev = 1e300;
    for (int K : {1, 2, 4, 6}) {
      const auto s = reference_solver(K);
      const double r = embedded_residual(s, s.solve(w), w);
      CHECK(r < prev);
      prev = r;
    }
  }
}
