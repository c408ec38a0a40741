#include "doctest.h"

#include <cmath>

#include "lqr/errors.hpp"
#include "lqr/kernels.hpp"
#include "lqr/thermo.hpp"

using namespace lqr;

namespace {

NetworkModel pair_model(bool tri = true) {
  NetworkModel m;
  m.mass = Matrix::Identity(2, 2);
  m.mass(1, 1) = 1.3;
  m.v_static.resize(2, 2);
  m.v_static << 1.2, 0.15, 0.15, 0.9;
  CMatrix v1(2, 2);
  v1 << 0.04, 0.01, 0.01, 0.02;
  if (!tri) v1(0, 1) = v1(1, 0) = cplx(0.01, 0.02);
  m.set_harmonic(1, v1);
  m.drive_frequency = 0.37;
  m.time_reversal_invariant = tri;
  return m;
}

std::vector<ReservoirSpec> pair_baths(double Ta = 0.3, double Tb = 0.1) {
  return {{"a", {0}, SpectralDensity(PowerLawCutoff{0.05, 1, 1.5, 0.1}), Ta},
          {"b", {1}, SpectralDensity(PowerLawCutoff{0.08, 1, 1.2, 0.1}), Tb}};
}

// defining trace form: Q_ab(w) = 1/2 Im sum_{jk} (w + k w_d) Tr[P_a V_{k-j} A_j I_b(w) A_k^+]
Matrix transfer_by_trace(const FloquetSolution& sol, const std::vector<ReservoirSpec>& res, double w) {
  const auto& m = sol.solver().model();
  const int K = sol.k_max(), n = m.size();
  auto b = sol.at(w);
  const Vector I = sol.solver().baths().spectral_diag(w);
  Matrix D = Matrix::Zero(res.size(), res.size());
  for (std::size_t a = 0; a < res.size(); ++a)
    for (std::size_t c = 0; c < res.size(); ++c) {
      const CMatrix Pa = res[a].projector(n).cast<cplx>();
      const CMatrix Ic = (res[c].projector(n) * I.asDiagonal()).cast<cplx>();
      cplx acc = 0;
      for (int k = -K; k <= K; ++k)
        for (int j = -K; j <= K; ++j)
          acc += (w + k * m.drive_frequency) * (Pa * m.harmonic(k - j) * b[j] * Ic * b[k].adjoint()).trace();
      D(a, c) = 0.5 * acc.imag();
    }
  return D;
}

}  // namespace

TEST_CASE("transfer matrix equals the defining trace formula") {
  for (bool tri : {true, false}) {
    FloquetSolution sol(pair_model(tri), pair_baths());
    for (double w : {0.07, 0.61, 1.13}) {
      Matrix q = transfer_matrix(sol, w), d = transfer_by_trace(sol, pair_baths(), w);
      CHECK((q - d).norm() <= 1e-12 * d.norm());
    }
  }
}

TEST_CASE("heat currents: first law, second law, sign laws, decomposition") {
  FloquetSolution sol(pair_model(), pair_baths());
  auto rep = heat_rates(sol, pair_baths());
  double sum = 0;
  for (auto& h : rep.reservoirs) {
    CHECK(h.rh <= 0);
    CHECK(h.nrh <= 0);
    CHECK(std::abs(h.decomposition_residual) < 1e-12 * std::abs(h.total) + 1e-15);
    sum += h.total;
  }
  CHECK(rep.work_rate > 0);
  CHECK(std::abs(sum + rep.work_rate_direct) < 1e-10 * std::abs(rep.work_rate));
  CHECK(rep.first_law_residual < 1e-12);
  CHECK(rep.entropy_production > 0);
}

TEST_CASE("spectral reconstruction of the total heat current") {
  auto res = pair_baths();
  FloquetSolution sol(pair_model(), res);
  auto rep = heat_rates(sol, res);
  auto plan = plan_frequency_integral(sol, 1e-10);
  auto r = integrate(
      [&](double w) {
        Matrix q = transfer_matrix(sol, w);
        Eigen::VectorXd f = Eigen::VectorXd::Zero(2);
        for (int a = 0; a < 2; ++a)
          for (int c = 0; c < 2; ++c) f(a) += 0.5 * q(a, c) * coth_factor(w, res[c].temperature);
        return f;
      },
      2, 0.0, plan.omega_max, plan.spec);
  // coth = 2 (N + 1/2); the 1/2 of this convention is absorbed above
  for (int a = 0; a < 2; ++a) CHECK(2 * r.value(a) == doctest::Approx(rep.reservoirs[a].total).epsilon(1e-8));
}

TEST_CASE("zero temperature leaves only non-resonant heating") {
  auto res = pair_baths(0.0, 0.0);
  FloquetSolution sol(pair_model(), res);
  auto rep = heat_rates(sol, res);
  for (auto& h : rep.reservoirs) {
    CHECK(h.rp == 0.0);
    CHECK(h.rh == 0.0);
    CHECK(h.nrh < 0);
    CHECK(h.total == doctest::Approx(h.nrh).epsilon(1e-10));
  }
  CHECK(std::isnan(rep.entropy_production));
  CHECK(heat_rp(0, sol, res) == 0.0);
}

TEST_CASE("single-component entry points agree with the report") {
  auto res = pair_baths();
  FloquetSolution sol(pair_model(), res);
  auto rep = heat_rates(sol, res);
  CHECK(heat_rp(1, sol, res) == doctest::Approx(rep.reservoirs[1].rp).epsilon(1e-8));
  CHECK(heat_rh(0, sol, res) == doctest::Approx(rep.reservoirs[0].rh).epsilon(1e-8));
  CHECK(heat_nrh(0, sol, res) == doctest::Approx(rep.reservoirs[0].nrh).epsilon(1e-8));
  CHECK(heat_total(1, sol, res) == doctest::Approx(rep.reservoirs[1].total).epsilon(1e-8));
  HeatOptions z;
  z.zero_nrh = true;
  CHECK(heat_nrh(0, sol, res, z) == 0.0);
  auto zr = heat_rates(sol, res, z);
  CHECK(zr.reservoirs[0].total == doctest::Approx(rep.reservoirs[0].rp + rep.reservoirs[0].rh).epsilon(1e-8));
}

TEST_CASE("non-resonant heating needs a time-reversal-invariant drive") {
  auto res = pair_baths();
  FloquetSolution sol(pair_model(false), res);
  CHECK_THROWS_AS(heat_nrh(0, sol, res), UnsupportedConfiguration);
  auto rep = heat_rates(sol, res);
  CHECK(std::isnan(rep.reservoirs[0].nrh));
  CHECK(rep.first_law_residual < 1e-12);
}

TEST_CASE("undriven heat flows from hot to cold") {
  NetworkModel m = pair_model();
  m.drive.clear();
  auto res = pair_baths(0.4, 0.1);
  FloquetSolution sol(m, res);
  auto rep = heat_rates(sol, res);
  const double q = undriven_heat(0, sol, res);
  CHECK(q > 0);
  CHECK(rep.reservoirs[0].total == doctest::Approx(q).epsilon(1e-8));
  CHECK(rep.reservoirs[1].total == doctest::Approx(-q).epsilon(1e-8));
  CHECK(rep.reservoirs[0].nrh == 0.0);
  CHECK(std::abs(rep.work_rate) < 1e-12 * q);
}

TEST_CASE("sideband rates carry the sign of the shifted frequency") {
  FloquetSolution sol(pair_model(), pair_baths());
  auto b = sol.at(0.2);
  // w - w_d < 0: the k = -1 sideband is counted with a negative sign
  CHECK(sideband_rate(sol.solver(), b, -1, 0, 0) < 0);
  CHECK(sideband_rate(sol.solver(), b, 1, 0, 0) > 0);
}

TEST_CASE("a single bath only turns work into heat") {
  // no temperature difference to exploit: the drive can only heat the bath
  for (double T : {0.0, 0.3, 2.0}) {
    std::vector<ReservoirSpec> res{{"a", {0, 1}, SpectralDensity(PowerLawCutoff{0.05, 1, 1.5, 0.1}), T}};
    FloquetSolution sol(pair_model(), res);
    const auto rep = heat_rates(sol, res);
    CHECK(rep.work_rate > 0);
    CHECK(rep.reservoirs[0].total < 0);
    CHECK(rep.work_rate_direct == doctest::Approx(-rep.reservoirs[0].total).epsilon(1e-7));
  }
}

TEST_CASE("adaptive sideband cutoff") {
  // undriven: the integrands do not depend on the cutoff at all
  NetworkModel still = pair_model();
  still.drive.clear();
  CHECK(adaptive_k_max(still, pair_baths(), SolverOptions{}).k_max == 4);

  // a slow, strong drive needs more sidebands than a fast, weak one
  NetworkModel slow = pair_model();
  slow.drive_frequency = 0.21;
  slow.set_harmonic(1, slow.harmonic(1) * 2.0);
  const auto fast = adaptive_k_max(pair_model(), pair_baths(), SolverOptions{});
  const auto sel = adaptive_k_max(slow, pair_baths(), SolverOptions{});
  CHECK(sel.k_max > fast.k_max);
  CHECK(sel.change < 1e-10);

  // the chosen cutoff reproduces the currents of a much larger one to the quadrature tolerance
  SolverOptions a, b;
  a.k_max = sel.k_max;
  b.k_max = 2 * sel.k_max + 8;
  const auto ra = heat_rates(FloquetSolution(slow, pair_baths(), a), pair_baths());
  const auto rb = heat_rates(FloquetSolution(slow, pair_baths(), b), pair_baths());
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(ra.reservoirs[i].total == doctest::Approx(rb.reservoirs[i].total).epsilon(1e-8));

  CHECK_THROWS_AS(adaptive_k_max(slow, pair_baths(), SolverOptions{}, HeatOptions{}, 4, 6), NumericalError);
}
