// Thermal factors, damping and noise kernels of the reservoirs.
#pragma once
#include <memory>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "lqr/model.hpp"
#include "lqr/quadrature.hpp"

namespace lqr {

// Bose-Einstein occupation; zero at T = 0, throws for w <= 0
double planck(double w, double T);
// coth(w / 2T) = 1 + 2 N(w), odd in w; 1 (sign w) at T = 0
double coth_factor(double w, double T);

// Reactive part of a reservoir:
//   K(w) = PV int_0^inf I(u) u / (u^2 - w^2) du,  gamma(0) = K(0) = int I(u)/u du.
// K is tabulated once per spectral shape (unit strength) and rescaled.
class DampingKernel {
 public:
  explicit DampingKernel(const SpectralDensity& j, double rel_tol = 1e-11);

  double K(double w) const;       // even in w
  double gamma0() const { return scale_ * k0_; }
  // Laplace transform gamma^(s) of the damping kernel, Re s >= 0
  cplx laplace(cplx s) const;
  // boundary value gamma^(i w)
  cplx on_axis(double w) const;

  // direct evaluation without the table (slow, used to build and check it)
  static double K_direct(const SpectralDensity& j, double w, double rel_tol = 1e-12);
  double table_edge() const { return edge_; }

 private:
  struct Table;
  SpectralDensity density_;
  double scale_ = 1.0;
  double k0_ = 0.0;
  double edge_ = 0.0;
  double rel_tol_;
  std::shared_ptr<const Table> table_;
};

// all reservoirs of a network: sum_a (scalar kernel) P_a
class BathKernels {
 public:
  BathKernels(int n, const std::vector<ReservoirSpec>& res);

  int size() const { return n_; }
  std::size_t count() const { return kernels_.size(); }
  const DampingKernel& kernel(std::size_t a) const { return kernels_[a]; }
  const std::vector<int>& sites(std::size_t a) const { return sites_[a]; }
  const SpectralDensity& density(std::size_t a) const { return densities_[a]; }

  // diagonal of I(w) = sum_a I_a(w) P_a (odd in w)
  Vector spectral_diag(double w) const;
  // diagonal of K(w) = sum_a K_a(w) P_a
  Vector reactive_diag(double w) const;
  // sum_a gamma_a(0) P_a
  Vector gamma0_diag() const;
  // noise kernel nu~(w) = sum_a I_a(w) coth(w / 2T_a) P_a, with the given temperatures
  Vector noise_diag(double w, const std::vector<double>& temps) const;
  // gamma^(s) as a matrix
  CMatrix laplace(cplx s) const;

  double support_edge() const;
  std::vector<double> kinks() const;

 private:
  int n_;
  std::vector<DampingKernel> kernels_;
  std::vector<std::vector<int>> sites_;
  std::vector<SpectralDensity> densities_;
};

// V0 - sum_a gamma_a(0) P_a
Matrix renormalized_static(const NetworkModel& m, const std::vector<ReservoirSpec>& res);
// bare V0 giving the requested renormalized static potential
Matrix bare_from_renormalized(const Matrix& v_r, const std::vector<ReservoirSpec>& res);

}  // namespace lqr
