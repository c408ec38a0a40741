// Globally adaptive, vector-valued Gauss-Kronrod (10/21) quadrature.
#pragma once
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "lqr/errors.hpp"

namespace lqr {

struct PeakHint {
  double center;
  double width;
};

struct QuadratureSpec {
  double abs_tol = 0.0;
  // per component: error <= max(abs_tol, rel_tol * integral of |f_i|)
  double rel_tol = 1e-10;
  // for components sharing units: also accept error <= shared_rel_tol * max_j integral of |f_j|
  // (passive ones included), so a component that cancels to round-off does not refine forever
  double shared_rel_tol = 0.0;
  std::vector<double> breakpoints;
  std::vector<PeakHint> peaks;
  // truncation point when the upper limit is infinite
  double upper_cutoff = std::numeric_limits<double>::quiet_NaN();
  std::size_t max_intervals = 200000;
  int threads = 1;
  // components flagged here are integrated along but never drive refinement
  std::vector<bool> passive;
};

struct QuadratureResult {
  Eigen::VectorXd value;
  Eigen::VectorXd error;
  Eigen::VectorXd magnitude;  // integral of |f_i|
  std::size_t evaluations = 0;
  std::size_t intervals = 0;
};

class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, QuadratureResult partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const QuadratureResult& partial() const { return partial_; }

 private:
  QuadratureResult partial_;
};

// f(w) returns `dim` components
using VectorIntegrand = std::function<Eigen::VectorXd(double)>;

// [a, b]; b may be +infinity, in which case spec.upper_cutoff truncates the domain
// and the tail up to twice the cutoff is checked against the tolerance
QuadratureResult integrate(const VectorIntegrand& f, std::size_t dim, double a, double b,
                           const QuadratureSpec& spec);

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSpec& spec, double* error = nullptr);

// initial partition: breakpoints plus geometrically graded points around each peak
std::vector<double> initial_partition(double a, double b, const QuadratureSpec& spec);

}  // namespace lqr
