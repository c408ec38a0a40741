// Periodic steady-state covariance of the driven network.
#pragma once
#include <vector>

#include "lqr/floquet.hpp"

namespace lqr {

struct CovarianceOptions {
  double rel_tol = 1e-9;
  double omega_max = 0.0;
  std::size_t max_intervals = 400000;
  int threads = 1;
};

// Fourier blocks sigma_jk, j, k = -k_max..k_max:
//   xx_jk = 1/2 int A_j nu A_k^+,  xp_jk adds (w + k w_d),  pp_jk adds (w + j w_d)(w + k w_d)
struct CovarianceBlocks {
  int k_max = 0;
  int n = 0;
  double drive_frequency = 0.0;
  Matrix mass;
  std::vector<CMatrix> xx, xp, pp;

  std::size_t index(int j, int k) const {
    return static_cast<std::size_t>((j + k_max) * (2 * k_max + 1) + (k + k_max));
  }
  const CMatrix& sxx(int j, int k) const { return xx[index(j, k)]; }
  const CMatrix& sxp(int j, int k) const { return xp[index(j, k)]; }
  const CMatrix& spp(int j, int k) const { return pp[index(j, k)]; }
};

CovarianceBlocks sigma_blocks(const FloquetSolution& sol, const std::vector<ReservoirSpec>& res,
                              const CovarianceOptions& opt = {});

// symmetrized covariance [[xx, xp], [px, pp]] at time t
Matrix sigma_at(const CovarianceBlocks& b, double t);

// symplectic spectrum, ascending; a physical state has all values >= 1/2
Vector symplectic_eigenvalues(const Matrix& sigma);

// <H_S>(t) with the Hamiltonian's (bare) potential
double system_energy(const CovarianceBlocks& b, const NetworkModel& m, double t);

// cycle-averaged power delivered by the drive, 1/2 <Tr[dV/dt sigma_xx]>
double work_rate(const CovarianceBlocks& b, const NetworkModel& m);

}  // namespace lqr
