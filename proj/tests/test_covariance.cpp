#include "doctest.h"

#include <cmath>
#include <numbers>

#include "lqr/covariance.hpp"
#include "lqr/thermo.hpp"

using namespace lqr;

namespace {

NetworkModel oscillator(double v1, double wd) {
  NetworkModel m;
  m.mass = Matrix::Identity(1, 1);
  m.v_static = Matrix::Constant(1, 1, 1.0);
  if (v1 != 0) m.set_harmonic(1, CMatrix::Constant(1, 1, v1));
  m.drive_frequency = wd;
  return m;
}

}  // namespace

TEST_CASE("weakly damped oscillator relaxes to the thermal covariance") {
  const double g = 1e-4, T = 0.4;
  std::vector<ReservoirSpec> res{{"b", {0}, SpectralDensity(PowerLawCutoff{g, 1, 3, 0.1}), T}};
  NetworkModel m = oscillator(0, 0.8);
  m.v_static = bare_from_renormalized(Matrix::Constant(1, 1, 1.0), res);
  SolverOptions so;
  so.k_max = 1;
  FloquetSolution sol(m, res, so);
  auto b = sigma_blocks(sol, res);
  Matrix s = sigma_at(b, 0.0);
  const double c = 1 / std::tanh(1 / (2 * T));
  CHECK(s(0, 0) == doctest::Approx(c / 2).epsilon(2e-3));
  CHECK(s(1, 1) == doctest::Approx(c / 2).epsilon(2e-3));
  CHECK(std::abs(s(0, 1)) < 1e-6);
  CHECK(symplectic_eigenvalues(s)(0) == doctest::Approx(c / 2).epsilon(2e-3));
}

TEST_CASE("driven covariance: physical, periodic, and consistent with the heat currents") {
  std::vector<ReservoirSpec> res{{"a", {0}, SpectralDensity(PowerLawCutoff{0.03, 1, 1.5, 0.1}), 0.2},
                                 {"b", {1}, SpectralDensity(PowerLawCutoff{0.05, 1, 1.2, 0.1}), 0.0}};
  NetworkModel m;
  m.mass = Matrix::Identity(2, 2);
  m.v_static.resize(2, 2);
  m.v_static << 1.3, 0.1, 0.1, 0.8;
  CMatrix v1(2, 2);
  v1 << 0.05, 0.02, 0.02, 0.03;
  m.set_harmonic(1, v1);
  m.drive_frequency = 0.45;
  SolverOptions so;
  so.k_max = 4;
  FloquetSolution sol(m, res, so);
  auto b = sigma_blocks(sol, res);
  const double tau = 2 * std::numbers::pi / m.drive_frequency;
  for (double t : {0.0, 0.3 * tau, 0.77 * tau}) {
    Matrix s = sigma_at(b, t);
    CHECK((s - s.transpose()).norm() < 1e-12);
    CHECK(symplectic_eigenvalues(s).minCoeff() >= 0.5 - 1e-9);
    CHECK((sigma_at(b, t + tau) - s).norm() < 1e-10 * s.norm());
  }
  CHECK(system_energy(b, m, 0.1) == doctest::Approx(system_energy(b, m, 0.1 + tau)).epsilon(1e-10));
  auto rep = heat_rates(sol, res);
  CHECK(work_rate(b, m) == doctest::Approx(rep.work_rate).epsilon(1e-6));
  CHECK(work_rate(b, m) == doctest::Approx(rep.work_rate_direct).epsilon(1e-6));
}

TEST_CASE("symplectic spectrum of a thermal two-mode state") {
  Matrix s = Matrix::Zero(4, 4);
  s.diagonal() << 0.5, 2.0, 0.5, 2.0;  // x1, x2, p1, p2
  auto v = symplectic_eigenvalues(s);
  CHECK(v(0) == doctest::Approx(0.5));
  CHECK(v(1) == doctest::Approx(2.0));
}

TEST_CASE("covariance at the temperature extremes") {
  std::vector<ReservoirSpec> res{{"b", {0}, SpectralDensity(PowerLawCutoff{1e-3, 1, 3, 0.1}), 0.0}};
  NetworkModel m = oscillator(0, 0.8);
  m.v_static = bare_from_renormalized(Matrix::Constant(1, 1, 1.0), res);
  SolverOptions so;
  so.k_max = 1;
  // T = 0: close to the ground state, never below it
  {
    FloquetSolution sol(m, res, so);
    const Matrix s = sigma_at(sigma_blocks(sol, res), 0.0);
    const double nu = symplectic_eigenvalues(s)(0);
    CHECK(nu >= 0.5);
    CHECK(nu == doctest::Approx(0.5).epsilon(1e-2));
  }
  // T = 10: classical equipartition, <x^2> = <p^2> = T up to the 1/(12 T) quantum correction
  res[0].temperature = 10.0;
  {
    FloquetSolution sol(m, res, so);
    const Matrix s = sigma_at(sigma_blocks(sol, res), 0.0);
    const double c = 0.5 / std::tanh(1 / 20.0);
    CHECK(c == doctest::Approx(10.0 + 1 / 120.0).epsilon(1e-6));
    CHECK(s(0, 0) == doctest::Approx(c).epsilon(5e-3));
    CHECK(s(1, 1) == doctest::Approx(c).epsilon(5e-3));
  }
}
