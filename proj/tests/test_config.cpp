#include "doctest.h"

#include <cmath>
#include <string>

#include "lqr/config.hpp"
#include "lqr/errors.hpp"
#include "lqr/kernels.hpp"

using namespace lqr;

namespace {

const std::string kMinimal = R"(model:
  mass: 1.0
  potential: 1.0
reservoirs:
  - name: hot
    sites: [0]
    temperature: 1.0
    spectral: {family: power_law, strength: 0.05, exponent: 1, cutoff: 2.0, sharpness: 0.1}
)";

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -100;
}

}  // namespace

TEST_CASE("config: minimal file and defaults") {
  const auto c = parse_config(kMinimal);
  REQUIRE(c.reservoirs.size() == 1);
  CHECK(c.reservoirs[0].name == "hot");
  CHECK(c.reservoirs[0].temperature == 1.0);
  CHECK(c.reservoirs[0].spectral.strength() == 0.05);
  CHECK(c.renormalized_potential(0, 0) == 1.0);
  // the potential is taken as renormalized, so the stored bare one sits above it
  CHECK(c.model.v_static(0, 0) > 1.0);
  CHECK(renormalized_static(c.model, c.reservoirs)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.solver.k_max == SolverOptions{}.k_max);
  CHECK(c.threads == 1);
  CHECK(!c.model.driven());
}

TEST_CASE("config: bare potential") {
  auto text = kMinimal;
  text.replace(text.find("potential: 1.0"), 14, "potential: 1.0\n  renormalized: false");
  const auto b = parse_config(text);
  CHECK(b.model.v_static(0, 0) == 1.0);
  CHECK(b.renormalized_potential(0, 0) < 1.0);
  const auto a = parse_config(kMinimal);
  CHECK(b.renormalized_potential(0, 0) == doctest::Approx(2.0 - a.model.v_static(0, 0)).epsilon(1e-12));
}

TEST_CASE("config: the reference cooler file") {
  const auto c = load_config(std::string(LQR_SOURCE_DIR) + "/configs/reference_cooler.yaml");
  CHECK(c.model.drive_frequency == 0.9);
  CHECK(c.model.harmonic(1)(0, 0) == std::complex<double>(0.05, 0));
  CHECK(c.model.harmonic(-1)(0, 0) == std::complex<double>(0.05, 0));
  CHECK(c.solver.method == SolverOptions::Method::WeakDrive);
  CHECK(c.solver.k_max == 1);
  CHECK(!c.heat.refine_work);
  REQUIRE(c.heat_grid.temperatures.size() == 4);
  CHECK(c.heat_grid.temperatures[0] == doctest::Approx(0.01));
  CHECK(c.heat_grid.temperatures[3] == doctest::Approx(0.1));
  CHECK(c.heat_grid.temperatures[1] == doctest::Approx(0.01 * std::pow(10.0, 1.0 / 3)));
  REQUIRE(c.cooling.gamma0.size() == 5);
  CHECK(c.cooling.gamma0[2] == doctest::Approx(1e-4));
  CHECK(c.oracle.modes == 300);

  // the template matches the built-in reference cooler
  const auto t = c.cooling_template();
  const auto ref = reference_cooling_setup();
  CHECK(t.alpha == 0);
  CHECK(t.model.v_static(0, 0) == 1.0);
  for (double g : {1e-4, 1e-3}) CHECK(t.resonance(g) == doctest::Approx(ref.resonance(g)).epsilon(1e-12));
  const auto a = cooling_rates(t, 1e-4, 0.02, 0.97), b = cooling_rates(ref, 1e-4, 0.02, 0.97);
  CHECK(a.rp == doctest::Approx(b.rp).epsilon(1e-12));
  CHECK(a.nrh == doctest::Approx(b.nrh).epsilon(1e-12));
}

TEST_CASE("config: drive harmonics, tabulated and gapped families") {
  const std::string text = R"(model:
  mass: [[1, 0], [0, 2]]
  potential: [[1, 0.1], [0.1, 1.5]]
  drive_frequency: 0.4
  time_reversal_invariant: false
  drive:
    - harmonic: 1
      real: [[0.01, 0], [0, 0]]
      imag: [[0, 0.02], [0.02, 0]]
    - {harmonic: 2, real: [[0, 0.003], [0.003, 0]]}
reservoirs:
  - name: t
    sites: [0]
    temperature: 0.2
    spectral: {family: tabulated, omega: [0, 1, 2, 3], value: [0, 0.01, 0.01, 0]}
  - name: g
    sites: [1]
    temperature: 0
    spectral: {family: gapped, strength: 0.02, exponent: 2, cutoff: 0.8, sharpness: 0.05, gap: 1.1}
solver: {k_max: 4}
threads: 3
)";
  const auto c = parse_config(text);
  CHECK(c.model.size() == 2);
  CHECK(c.model.mass(1, 1) == 2.0);
  CHECK(!c.model.time_reversal_invariant);
  CHECK(c.model.max_harmonic() == 2);
  CHECK(c.model.harmonic(1)(0, 1) == std::complex<double>(0, 0.02));
  CHECK(c.model.harmonic(-1)(1, 0) == std::complex<double>(0, -0.02));
  CHECK(c.reservoirs[0].spectral(1.5) == doctest::Approx(0.01));
  CHECK(c.reservoirs[1].temperature == 0.0);
  CHECK(c.reservoirs[1].spectral(1.2) == 0.0);
  CHECK(c.threads == 3);
  CHECK(c.heat.threads == 3);
  CHECK(c.solver.k_max == 4);
}

TEST_CASE("config: errors carry the line of the offending key") {
  auto with = [](const std::string& from, const std::string& to) {
    auto t = kMinimal;
    t.replace(t.find(from), from.size(), to);
    return t;
  };
  // a negative temperature is a parse error, not a runtime one
  CHECK(error_line(with("temperature: 1.0", "temperature: -0.1")) == 6);
  CHECK(error_line(with("sites: [0]", "sites: [3]")) == 5);
  CHECK(error_line(with("  mass: 1.0", "  mass: 1.0\n  colour: red")) == 2);
  CHECK(error_line(kMinimal + "solver: {k_max: -1}\n") == 8);
  CHECK(error_line(kMinimal + "solver: {method: magic}\n") == 8);
  CHECK(error_line(with("family: power_law", "family: lorentzian")) == 7);
  CHECK(error_line("model: [1, 2\n") >= 0);
  CHECK(error_line(kMinimal + "cooling: {cooled: nobody}\n") == 8);
  CHECK(error_line(kMinimal + "cooling: {d: 4}\n") == 8);
  CHECK(error_line(kMinimal + "heat_rates: {temperatures: {from: 0, to: 1, points: 3, spacing: log}}\n") == 8);
  CHECK_THROWS_AS(parse_config("reservoirs: []\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/run.yaml"), ConfigError);
  // an unstable network is refused as a whole
  CHECK_THROWS_AS(parse_config(with("potential: 1.0", "potential: -1.0")), ConfigError);
  try {
    parse_config(with("temperature: 1.0", "temperature: -0.1"));
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("line 7:", 0) == 0);
  }
}

TEST_CASE("config: hash") {
  // FNV-1a reference values
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
  const auto a = parse_config(kMinimal), b = parse_config(kMinimal + "threads: 2\n");
  CHECK(a.hash().size() == 16);
  CHECK(a.hash() != b.hash());
  CHECK(a.hash() == parse_config(kMinimal).hash());
}
