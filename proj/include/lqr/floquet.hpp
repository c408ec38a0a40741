// Sideband (Floquet) solution of the driven network's Green function.
#pragma once
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "lqr/kernels.hpp"
#include "lqr/model.hpp"

namespace lqr {

struct SolverOptions {
  int k_max = 6;
  // below this reciprocal condition number the solve is refused
  double min_rcond = 1e-13;
  // above this relative residual the solve is refused
  double max_residual = 1e-9;
  // WeakDrive: A_0 = g(w), A_k = -g(w + k w_d) V_k g(w), the leading order in the drive
  enum class Method { Exact, WeakDrive } method = Method::Exact;
};

// A_k(w) for k = -k_max..k_max
struct SidebandBlocks {
  double omega = 0.0;
  int k_max = 0;
  std::vector<CMatrix> A;
  double residual = 0.0;
  double rcond = 1.0;

  const CMatrix& operator[](int k) const { return A.at(static_cast<std::size_t>(k + k_max)); }
  CMatrix& operator[](int k) { return A.at(static_cast<std::size_t>(k + k_max)); }
};

class FloquetSolver {
 public:
  FloquetSolver(NetworkModel model, std::vector<ReservoirSpec> reservoirs, SolverOptions opt = {});

  const NetworkModel& model() const { return model_; }
  const std::vector<ReservoirSpec>& reservoirs() const { return reservoirs_; }
  const BathKernels& baths() const { return *baths_; }
  const SolverOptions& options() const { return opt_; }
  int k_max() const { return opt_.k_max; }
  int size() const { return model_.size(); }

  // g^(i w)^{-1} = -M w^2 + V0 - K(w) + i (pi/2) I(w), V0 bare
  CMatrix inverse_green(double w) const;
  CMatrix green(double w) const;

  SidebandBlocks solve(double omega) const;
  // first-order response plus the second-order correction to A_0
  SidebandBlocks perturbative(double omega) const;
  // leading order in the drive amplitude
  SidebandBlocks first_order(double omega) const;
  // solve() or first_order(), per the options
  SidebandBlocks amplitudes(double omega) const;

  // resonance positions and widths of the sideband system, within [0, omega_max]
  std::vector<PeakHint> resonances(double omega_max) const;

 private:
  NetworkModel model_;
  std::vector<ReservoirSpec> reservoirs_;
  SolverOptions opt_;
  std::shared_ptr<BathKernels> baths_;
  Matrix v_renorm_;
};

// lazily evaluated, cached A_k on the frequencies actually visited
class FloquetSolution {
 public:
  explicit FloquetSolution(std::shared_ptr<const FloquetSolver> solver, std::size_t cache_limit = 200000);
  FloquetSolution(NetworkModel model, std::vector<ReservoirSpec> reservoirs, SolverOptions opt = {});

  SidebandBlocks at(double omega) const;
  const FloquetSolver& solver() const { return *solver_; }
  std::shared_ptr<const FloquetSolver> solver_ptr() const { return solver_; }
  int k_max() const { return solver_->k_max(); }
  std::vector<double> grid() const;

 private:
  std::shared_ptr<const FloquetSolver> solver_;
  std::size_t cache_limit_;
  mutable std::mutex mutex_;
  mutable std::map<double, SidebandBlocks> cache_;
};

// time-reversed drive V^r_k = V_{-k}
NetworkModel time_reversed(const NetworkModel& m);
// drive frequency w_d -> -w_d, harmonics reindexed so that V(t) is unchanged as a function
NetworkModel negated_frequency(const NetworkModel& m);

struct SymmetryReport {
  double reversal = 0.0;       // |A^r_k(w, w_d) - A_{-k}(w, -w_d)|
  double transpose = 0.0;      // |A^r_k(w) - A_{-k}^T(w + k w_d)|
  double conjugation = 0.0;    // |A_k(w)^* - A_{-k}(-w)|
  double max() const { return std::max({reversal, transpose, conjugation}); }
};

// relative deviations, maximised over the given frequencies and |k| <= k_check
SymmetryReport check_symmetries(const NetworkModel& m, const std::vector<ReservoirSpec>& res,
                                const std::vector<double>& omegas, int k_check, SolverOptions opt = {});

}  // namespace lqr
