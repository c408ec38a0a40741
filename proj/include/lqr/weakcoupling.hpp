// Closed-form weak-coupling, weak-drive estimates of resonant pumping.
#pragma once
#include <string>
#include <vector>

#include "lqr/floquet.hpp"

namespace lqr {

enum class ThermalFactor { Planck, Boltzmann };

// peak position and half width at half maximum of |q^T g(i w) q|^2 near `guess`
double resonance_peak(const FloquetSolver& s, const Vector& q, double guess);
double resonance_half_width(const FloquetSolver& s, const Vector& q, double guess);
inline double resonance_peak(const FloquetSolver& s, int site, double guess) {
  return resonance_peak(s, Vector::Unit(s.size(), site), guess);
}
inline double resonance_half_width(const FloquetSolver& s, int site, double guess) {
  return resonance_half_width(s, Vector::Unit(s.size(), site), guess);
}

struct NormalModeBasis {
  Vector frequencies;  // ascending, from (V_R, M)
  Matrix modes;        // columns q_a, q_a^T M q_b = delta_ab
  Vector decay;        // Gamma_a, measured half widths
  // weight(a, r) = sum over sites of reservoir r of q_a(i)^2, so that I_r in mode a is weight * I_r
  Matrix weight;
  std::vector<SpectralDensity> densities;
  std::vector<std::string> warnings;  // broad resonances (Gamma not << Omega)

  int count() const { return static_cast<int>(frequencies.size()); }
  // mode-projected spectral density of reservoir r
  double density(int a, int r, double w) const { return weight(a, r) * densities[static_cast<std::size_t>(r)](w); }
};

// throws NumericalError on a near-degenerate pair (gap < 10 max Gamma)
NormalModeBasis normal_modes(const NetworkModel& model, const std::vector<ReservoirSpec>& reservoirs);

// sum_a q_a q_a^T / (Omega_a^2 - (w - i Gamma_a)^2)
CMatrix weak_green(const NormalModeBasis& b, double w);

struct ClosedFormHeat {
  double value = 0.0;    // resonant pumping plus resonant heating out of reservoir alpha
  double bracket = 0.0;  // its sign decides whether the reservoir is cooled
  bool cools() const { return bracket > 0; }
};

// lowest mode only, two reservoirs at the common temperature t0, drive V0 + 2 V1 cos(w_d t) with real V1
ClosedFormHeat resonant_heat_closed_form(int alpha, const NormalModeBasis& b, const Matrix& v1, double drive_frequency,
                                         double t0, ThermalFactor factor = ThermalFactor::Planck);
// same, reading V1 and w_d from a single-harmonic time-reversal-invariant model
ClosedFormHeat resonant_heat_closed_form(int alpha, const NormalModeBasis& b, const NetworkModel& m, double t0,
                                         ThermalFactor factor = ThermalFactor::Planck);

// peak estimate of int_0^inf p^(k)_ab(w) N(w) dw, lowest mode only:
//   p^(k)_ab(w) = pi/2 Tr[I_a(|w + k w_d|) A_k I_b(w) A_k^+] with A_k = -g(w + k w_d) V_k g(w)
double peak_integral(int k, int a, int b, const NormalModeBasis& basis, const Matrix& vk, double drive_frequency,
                     double t);

// adaptive protocol w_d = Omega_0 - t0, t0 << Omega_0: leading term with the thermal factor e^{-1}
double adaptive_heat(int alpha, const NormalModeBasis& b, const Matrix& v1, double t0);

}  // namespace lqr
