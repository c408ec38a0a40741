#include "doctest.h"

#include <cmath>
#include <numbers>

#include "lqr/cooling.hpp"
#include "lqr/kernels.hpp"
#include "lqr/weakcoupling.hpp"

using namespace lqr;

namespace {

std::vector<ReservoirSpec> ohmic(double g, std::vector<int> sites = {0}) {
  return {{"b", std::move(sites), SpectralDensity(PowerLawCutoff{g, 1, 3, 0.2}), 0.1}};
}

NetworkModel single(double mass, double vr, const std::vector<ReservoirSpec>& res) {
  NetworkModel m;
  m.mass = Matrix::Constant(1, 1, mass);
  m.v_static = bare_from_renormalized(Matrix::Constant(1, 1, vr), res);
  return m;
}

// reference cooler instance at gamma0, common temperature t and drive w_d
struct Cooler {
  CoolingTemplate tpl;
  CoolingTemplate::Instance in;
  NormalModeBasis basis;
  Cooler(double lambda, double g0, double t, double wd) : tpl(reference_cooling_setup(lambda)) {
    in = tpl.instantiate(g0, t, wd);
    basis = normal_modes(in.model, in.reservoirs);
  }
};

}  // namespace

TEST_CASE("single oscillator normal mode") {
  auto res = ohmic(1e-3);
  auto b = normal_modes(single(2.0, 3.0, res), res);
  CHECK(b.frequencies(0) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-12));
  CHECK(b.modes(0, 0) * b.modes(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(b.warnings.empty());
}

TEST_CASE("measured width matches the golden-rule scale") {
  auto res = ohmic(1e-3);
  auto b = normal_modes(single(1.0, 1.0, res), res);
  const double W = b.frequencies(0);
  const double golden = std::numbers::pi / 2 * res[0].spectral(W) / (2 * W);
  CHECK(b.decay(0) == doctest::Approx(golden).epsilon(0.2));
}

TEST_CASE("two-mode basis is M-orthonormal and diagonalizes V_R") {
  std::vector<ReservoirSpec> res{{"a", {0}, SpectralDensity(PowerLawCutoff{1e-3, 1, 3, 0.2}), 0.1},
                                 {"b", {1}, SpectralDensity(PowerLawCutoff{2e-3, 1, 3, 0.2}), 0.1}};
  NetworkModel m;
  m.mass = Matrix::Identity(2, 2);
  m.mass(1, 1) = 1.7;
  Matrix vr(2, 2);
  vr << 1.0, 0.2, 0.2, 2.5;
  m.v_static = bare_from_renormalized(vr, res);
  auto b = normal_modes(m, res);
  CHECK((b.modes.transpose() * m.mass * b.modes - Matrix::Identity(2, 2)).norm() < 1e-10);
  Matrix d = b.modes.transpose() * vr * b.modes;
  CHECK(std::abs(d(0, 1)) < 1e-10);
  CHECK(d(0, 0) == doctest::Approx(b.frequencies(0) * b.frequencies(0)).epsilon(1e-10));
  CHECK(b.frequencies(0) < b.frequencies(1));
  CHECK((b.decay.array() > 0).all());
  CHECK(b.weight.row(0).sum() == doctest::Approx(b.modes.col(0).squaredNorm()).epsilon(1e-12));

  // normal-mode Green function away from the resonances (the true poles carry a dispersive
  // shift of order gamma, so skip a window much wider than Gamma)
  const SolverOptions so{};
  FloquetSolver s(m, res, so);
  double worst = 0;
  for (double w = 0.05; w < 2.5; w += 0.0173) {
    bool near = false;
    for (int a = 0; a < 2; ++a) near = near || std::abs(w - b.frequencies(a)) < 0.05 * b.frequencies(a);
    if (near) continue;
    const CMatrix g = s.green(w);
    worst = std::max(worst, (g - weak_green(b, w)).norm() / g.norm());
  }
  CHECK(worst < 0.05);
}

TEST_CASE("identical uncoupled oscillators are degenerate") {
  std::vector<ReservoirSpec> res{{"a", {0}, SpectralDensity(PowerLawCutoff{1e-3, 1, 3, 0.2}), 0.1},
                                 {"b", {1}, SpectralDensity(PowerLawCutoff{1e-3, 1, 3, 0.2}), 0.1}};
  NetworkModel m;
  m.mass = Matrix::Identity(2, 2);
  m.v_static = bare_from_renormalized(Matrix::Identity(2, 2), res);
  CHECK_THROWS_AS(normal_modes(m, res), NumericalError);
}

TEST_CASE("closed form: spectrally equivalent baths never cool") {
  std::vector<ReservoirSpec> res{{"a", {0}, SpectralDensity(PowerLawCutoff{1e-3, 1, 1.2, 0.1}), 0.1},
                                 {"b", {0}, SpectralDensity(PowerLawCutoff{1e-3, 1, 1.2, 0.1}), 0.1}};
  auto b = normal_modes(single(1.0, 1.0, res), res);
  for (double t : {0.02, 0.1, 0.5})
    for (double wd : {0.5, 0.9, 0.98}) {
      auto q = resonant_heat_closed_form(0, b, Matrix::Constant(1, 1, 0.05), wd, t);
      CHECK(q.value < 0);
      CHECK_FALSE(q.cools());
    }
}

TEST_CASE("closed form: the gapped reservoir is cooled") {
  Cooler c(1.0, 1e-3, 0.05, 0.95);
  auto q = resonant_heat_closed_form(0, c.basis, c.in.model, 0.05);
  CHECK(q.value > 0);
  CHECK(q.cools());
}

TEST_CASE("closed form agrees with the exact weak-drive currents") {
  for (double g0 : {1e-3, 1e-4})
    for (double t : {0.02, 0.05, 0.1}) {
      auto tpl = reference_cooling_setup(1.0);
      const double W = tpl.resonance(g0);
      auto in = tpl.instantiate(g0, t, W - t);
      auto b = normal_modes(in.model, in.reservoirs);
      const auto ex = cooling_rates(tpl, g0, t, W - t);
      const double cf = resonant_heat_closed_form(0, b, in.model, t).value;
      CHECK(cf == doctest::Approx(ex.rp + ex.rh).epsilon(0.1));
    }
}

TEST_CASE("peak estimate of a sideband integral") {
  const double g0 = 1e-3, t = 0.05;
  auto tpl = reference_cooling_setup(1.0);
  const double W = tpl.resonance(g0), wd = W - t;
  auto in = tpl.instantiate(g0, t, wd);
  auto b = normal_modes(in.model, in.reservoirs);
  FloquetSolution sol(in.model, in.reservoirs, tpl.solver);
  auto plan = plan_frequency_integral(sol, 1e-8);
  // p^(1)_{beta alpha}: a quantum from alpha at W - w_d lands in beta at W
  const double exact = integrate(
      [&](double w) { return sideband_rate(sol.solver(), sol.at(w), 1, 1, 0) * planck(w, t); }, 0.0, plan.omega_max,
      plan.spec);
  const double est = peak_integral(1, 1, 0, b, in.model.harmonic(1).real(), wd, t);
  CHECK(est == doctest::Approx(exact).epsilon(0.15));
}

TEST_CASE("adaptive estimate: scaling and consistency") {
  auto basis_at = [](double g0) {
    auto tpl = reference_cooling_setup(1.0);
    auto in = tpl.instantiate(g0, 0.01, 0.99);
    return std::pair{normal_modes(in.model, in.reservoirs), in.model.harmonic(1).real().eval()};
  };
  auto [b, v1] = basis_at(1e-4);
  for (double t : {0.005, 0.01, 0.025})
    CHECK(adaptive_heat(0, b, v1, 2 * t) / adaptive_heat(0, b, v1, t) == doctest::Approx(4.0).epsilon(0.1));
  auto [b2, v2] = basis_at(2e-4);
  CHECK(adaptive_heat(0, b2, v2, 0.01) / adaptive_heat(0, b, v1, 0.01) == doctest::Approx(2.0).epsilon(0.02));
  const double t = 0.02, wd = b.frequencies(0) - t;
  CHECK(adaptive_heat(0, b, v1, t) ==
        doctest::Approx(resonant_heat_closed_form(0, b, v1, wd, t, ThermalFactor::Boltzmann).value).epsilon(0.05));
}

TEST_CASE("weak-coupling preconditions") {
  Cooler c(1.0, 1e-3, 0.05, 0.95);
  const Matrix v1 = Matrix::Constant(1, 1, 0.05);
  CHECK_THROWS_AS(adaptive_heat(0, c.basis, v1, 0.6), UnsupportedConfiguration);
  CHECK_THROWS_AS(resonant_heat_closed_form(0, c.basis, v1, 1.2, 0.05), UnsupportedConfiguration);
  NetworkModel two = c.in.model;
  two.set_harmonic(2, CMatrix::Constant(1, 1, 0.01));
  CHECK_THROWS_AS(resonant_heat_closed_form(0, c.basis, two, 0.05), UnsupportedConfiguration);
  auto res3 = c.in.reservoirs;
  res3.push_back(res3[1]);
  auto b3 = normal_modes(c.in.model, res3);
  CHECK_THROWS_AS(resonant_heat_closed_form(0, b3, v1, 0.95, 0.05), UnsupportedConfiguration);
}
