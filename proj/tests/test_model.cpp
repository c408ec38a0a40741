#include "doctest.h"

#include <cmath>

#include "lqr/model.hpp"

using namespace lqr;

namespace {

NetworkModel two_site() {
  NetworkModel m;
  m.mass = Matrix::Identity(2, 2);
  m.v_static.resize(2, 2);
  m.v_static << 2.0, 0.1, 0.1, 1.5;
  CMatrix v1 = CMatrix::Zero(2, 2);
  v1(0, 0) = 0.05;
  m.set_harmonic(1, v1);
  m.drive_frequency = 0.7;
  return m;
}

std::vector<ReservoirSpec> two_baths() {
  return {{"a", {0}, SpectralDensity(PowerLawCutoff{0.01, 1, 2, 0.1}), 0.5},
          {"b", {1}, SpectralDensity(PowerLawCutoff{0.02, 1, 2, 0.1}), 0.2}};
}

}  // namespace

TEST_CASE("spectral densities are odd and follow their formulas") {
  SpectralDensity p(PowerLawCutoff{0.3, 2, 1.5, 0.2});
  const double w = 0.8;
  CHECK(p(w) == doctest::Approx(0.3 * w * w / (1 + std::exp((w - 1.5) / 0.2))).epsilon(1e-14));
  CHECK(p(-w) == -p(w));
  CHECK(p(0.0) == 0.0);

  SpectralDensity g(GappedAtOmega0{0.5, 1, 0.9, 0.04, 1.0});
  CHECK(g(0.5) == doctest::Approx(0.5 * 0.5 * 0.5 * smooth_step((0.5 - 0.9) / 0.04)));
  CHECK(g(1.0) == 0.0);
  CHECK(g(1.3) == 0.0);
  CHECK(g.kinks().at(0) == 1.0);

  SpectralDensity t(Tabulated{{0.5, 1.0, 2.0}, {1.0, 3.0, 1.0}});
  CHECK(t(0.75) == doctest::Approx(2.0));
  CHECK(t(0.25) == doctest::Approx(0.5));
  CHECK(t(-1.5) == doctest::Approx(-2.0));
  CHECK(t(2.5) == 0.0);
  CHECK_THROWS_AS((void)t.at(2.5), std::out_of_range);
  CHECK_THROWS_AS(SpectralDensity(Tabulated{{1.0, 0.5}, {1.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("smooth step is stable for large arguments") {
  CHECK(smooth_step(800) == 0.0);
  CHECK(smooth_step(-800) == 1.0);
  CHECK(smooth_step(0) == 0.5);
}

TEST_CASE("strength rescaling keeps the shape") {
  SpectralDensity p(PowerLawCutoff{0.3, 1, 1.5, 0.2});
  auto q = p.with_strength(0.6);
  CHECK(q(1.1) == doctest::Approx(2 * p(1.1)));
  CHECK(p.shape_key() == q.shape_key());
}

TEST_CASE("drive harmonics and potential") {
  auto m = two_site();
  CHECK(m.harmonic(-1)(0, 0) == cplx(0.05, 0));
  CHECK(m.max_harmonic() == 1);
  const double t = 0.37;
  CHECK(m.potential(t)(0, 0) == doctest::Approx(2.0 + 0.1 * std::cos(0.7 * t)));
  CHECK(m.potential_rate(t)(0, 0) == doctest::Approx(-0.07 * std::sin(0.7 * t)));
  CHECK(m.potential(t)(1, 1) == doctest::Approx(1.5));
}

TEST_CASE("validation accepts a well-formed network") {
  auto r = validate(two_site(), two_baths());
  CHECK(r.ok());
}

TEST_CASE("validation itemizes violations") {
  auto m = two_site();
  m.mass(0, 1) = 0.3;  // not symmetric
  auto res = two_baths();
  res[1].sites = {1, 1};  // listed twice
  res[0].temperature = -1;
  auto r = validate(m, res);
  CHECK_FALSE(r.ok());
  CHECK(r.violations.size() >= 3);

  // two baths on one site are allowed, with a warning
  auto shared = two_baths();
  shared[1].sites = {0};
  const auto rs = validate(two_site(), shared);
  CHECK(rs.ok());
  CHECK(rs.warnings.size() == 1);

  auto m2 = two_site();
  m2.drive[1](0, 0) = cplx(0.05, 0.01);
  m2.drive[-1](0, 0) = cplx(0.05, -0.01);
  CHECK_FALSE(validate(m2, two_baths()).ok());  // complex harmonic flagged as TRI
  m2.time_reversal_invariant = false;
  CHECK(validate(m2, two_baths()).ok());

  auto m3 = two_site();
  m3.drive[-1](0, 0) = 0.07;  // breaks V_{-k} = conj V_k
  CHECK_FALSE(validate(m3, two_baths()).ok());
}

TEST_CASE("mass coupling across a projector boundary is rejected") {
  auto m = two_site();
  m.mass(0, 1) = m.mass(1, 0) = 0.2;
  auto r = validate(m, two_baths());
  CHECK_FALSE(r.ok());
}

TEST_CASE("parametric resonance risk is flagged") {
  NetworkModel m;
  m.mass = Matrix::Identity(1, 1);
  m.v_static = Matrix::Constant(1, 1, 1.0);
  m.set_harmonic(1, CMatrix::Constant(1, 1, 0.05));
  m.drive_frequency = 2.0;  // 2 W0
  std::vector<ReservoirSpec> res{{"a", {0}, SpectralDensity(PowerLawCutoff{0.01, 1, 2, 0.1}), 0.1}};
  auto r = validate(m, res);
  CHECK(r.ok());
  CHECK_FALSE(r.warnings.empty());
  m.drive_frequency = 0.9;
  CHECK(validate(m, res).warnings.empty());
}

TEST_CASE("normal frequencies") {
  Matrix M = Matrix::Identity(2, 2) * 2.0;
  Matrix V = Matrix::Identity(2, 2) * 8.0;
  auto w = normal_frequencies(M, V);
  CHECK(w(0) == doctest::Approx(2.0));
  CHECK(w(1) == doctest::Approx(2.0));
}
