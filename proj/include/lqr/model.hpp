// Driven harmonic networks and the reservoirs attached to them.
#pragma once
#include <complex>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lqr/errors.hpp"

namespace lqr {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

// Fermi-like smooth step, 1/(1+e^x)
double smooth_step(double x);

// I(w) = g w^l theta((w - L)/r)
struct PowerLawCutoff {
  double strength = 0.0;
  double exponent = 1.0;
  double cutoff = 1.0;
  double sharpness = 0.1;
};

// I(w) = g w^l (W - w) theta((w - L)/r) below the gap edge W, zero above it
struct GappedAtOmega0 {
  double strength = 0.0;
  double exponent = 1.0;
  double cutoff = 1.0;
  double sharpness = 0.1;
  double gap = 1.0;
};

// linear interpolation through (omega, value) samples, omega strictly increasing, >= 0
struct Tabulated {
  std::vector<double> omega;
  std::vector<double> value;
};

class SpectralDensity {
 public:
  using Family = std::variant<PowerLawCutoff, GappedAtOmega0, Tabulated>;

  SpectralDensity() : family_(PowerLawCutoff{}) {}
  SpectralDensity(Family f);

  // odd extension; beyond a tabulated grid the density is taken as zero
  double operator()(double w) const;
  // same, but throws std::out_of_range outside the tabulated grid
  double at(double w) const;

  // frequency beyond which the density is negligible
  double support_edge() const;
  // points where the density is not smooth (besides 0)
  std::vector<double> kinks() const;
  // peak strength-like prefactor (multiplies the whole density)
  double strength() const;
  SpectralDensity with_strength(double g) const;
  // unique key of the shape with unit strength, for caching derived tables
  std::string shape_key() const;

  const Family& family() const { return family_; }

 private:
  double eval_positive(double w) const;
  Family family_;
};

struct ReservoirSpec {
  std::string name;
  std::vector<int> sites;  // oscillators this bath couples to
  SpectralDensity spectral;
  double temperature = 0.0;

  Matrix projector(int n) const;
};

// V(t) = V0 + sum_k V_k e^{i k w_d t}; the map holds k != 0 with V_{-k} = conj(V_k)
struct NetworkModel {
  Matrix mass;
  Matrix v_static;  // bare (unrenormalized) static potential
  std::map<int, CMatrix> drive;
  double drive_frequency = 0.0;
  bool time_reversal_invariant = true;

  int size() const { return static_cast<int>(mass.rows()); }
  // sets V_k and V_{-k} = conj(V_k)
  void set_harmonic(int k, const CMatrix& vk);
  CMatrix harmonic(int k) const;  // k = 0 gives V0
  int max_harmonic() const;
  Matrix potential(double t) const;
  Matrix potential_rate(double t) const;  // dV/dt
  bool driven() const { return !drive.empty() && drive_frequency != 0.0; }
};

struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;  // e.g. parametric resonance risk
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

// eigenfrequencies of the undriven, renormalized, undamped network
Vector normal_frequencies(const Matrix& mass, const Matrix& v);

ValidationReport validate(const NetworkModel& m, const std::vector<ReservoirSpec>& res,
                          double resonance_margin = 0.02);

}  // namespace lqr
