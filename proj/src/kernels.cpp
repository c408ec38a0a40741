#include "lqr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

namespace lqr {

double planck(double w, double T) {
  if (!(w > 0)) throw std::domain_error("planck: frequency must be positive");
  if (T < 0) throw std::invalid_argument("planck: negative temperature");
  if (T == 0) return 0.0;
  return 1.0 / std::expm1(w / T);
}

double coth_factor(double w, double T) {
  if (T < 0) throw std::invalid_argument("coth_factor: negative temperature");
  if (w == 0) return 0.0;
  if (T == 0) return w > 0 ? 1.0 : -1.0;
  return 1.0 / std::tanh(w / (2 * T));
}

namespace {

QuadratureSpec kernel_spec(const SpectralDensity& j, double rel_tol) {
  QuadratureSpec q;
  q.rel_tol = rel_tol;
  q.abs_tol = 1e-300;
  q.breakpoints = j.kinks();
  q.max_intervals = 20000;
  if (auto* p = std::get_if<PowerLawCutoff>(&j.family())) q.peaks.push_back({p->cutoff, p->sharpness});
  if (auto* p = std::get_if<GappedAtOmega0>(&j.family())) q.peaks.push_back({p->cutoff, p->sharpness});
  return q;
}

// shift breakpoints/peaks of u-space into t = |u - w| space
QuadratureSpec shifted(const QuadratureSpec& q, double w) {
  QuadratureSpec s = q;
  s.breakpoints.clear();
  s.peaks.clear();
  for (double b : q.breakpoints) s.breakpoints.push_back(std::abs(b - w));
  for (auto& p : q.peaks) s.peaks.push_back({std::abs(p.center - w), p.width});
  return s;
}

}  // namespace

double DampingKernel::K_direct(const SpectralDensity& j, double w, double rel_tol) {
  w = std::abs(w);
  const double E = j.support_edge();
  const QuadratureSpec q = kernel_spec(j, rel_tol);
  if (w == 0) return integrate([&j](double u) { return j(u) / u; }, 0.0, E, q);
  // K = 1/2 [PV int I/(u-w) + int I/(u+w)]
  double pv = 0.0;
  if (w < E) {
    const double h = std::min(w, E - w);
    pv += integrate([&j, w](double t) { return (j(w + t) - j(w - t)) / t; }, 0.0, h, shifted(q, w));
    if (2 * w < E) pv += integrate([&j, w](double u) { return j(u) / (u - w); }, 2 * w, E, q);
    else if (w - h > 0) pv += integrate([&j, w](double u) { return j(u) / (u - w); }, 0.0, w - h, q);
  } else {
    pv = integrate([&j, w](double u) { return j(u) / (u - w); }, 0.0, E, q);
  }
  const double reg = integrate([&j, w](double u) { return j(u) / (u + w); }, 0.0, E, q);
  return 0.5 * (pv + reg);
}

struct DampingKernel::Table {
  double edge;
  boost::math::interpolators::cardinal_cubic_b_spline<double> spline;
};

namespace {

std::mutex table_mutex;
std::map<std::string, std::shared_ptr<const void>> table_cache;

double feature_width(const SpectralDensity& j) {
  if (auto* p = std::get_if<PowerLawCutoff>(&j.family())) return p->sharpness;
  if (auto* p = std::get_if<GappedAtOmega0>(&j.family())) return std::min(p->sharpness, 0.05 * p->gap);
  const auto& t = std::get<Tabulated>(j.family());
  double h = t.omega.back();
  for (std::size_t i = 1; i < t.omega.size(); ++i) h = std::min(h, t.omega[i] - t.omega[i - 1]);
  return h;
}

}  // namespace

DampingKernel::DampingKernel(const SpectralDensity& j, double rel_tol) : density_(j), rel_tol_(rel_tol) {
  const bool tab = std::holds_alternative<Tabulated>(j.family());
  scale_ = tab ? 1.0 : j.strength();
  const SpectralDensity unit = tab ? j : j.with_strength(1.0);
  const std::string key = unit.shape_key();
  std::lock_guard<std::mutex> lock(table_mutex);
  auto it = table_cache.find(key);
  if (it != table_cache.end()) {
    table_ = std::static_pointer_cast<const Table>(it->second);
  } else {
    const double E = unit.support_edge();
    const double W = 4 * E + 8;
    const double h = std::clamp(feature_width(unit) / 8, W / 16384, W / 1024);
    const std::size_t n = static_cast<std::size_t>(std::ceil(W / h)) + 1;
    const double step = W / static_cast<double>(n - 1);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = K_direct(unit, step * static_cast<double>(i), rel_tol);
    auto t = std::make_shared<Table>(Table{W, {v.data(), v.size(), 0.0, step, 0.0}});
    table_cache[key] = t;
    table_ = t;
  }
  edge_ = table_->edge;
  k0_ = table_->spline(0.0);
}

double DampingKernel::K(double w) const {
  w = std::abs(w);
  if (w <= edge_) return scale_ * table_->spline(w);
  return K_direct(density_, w, rel_tol_);
}

cplx DampingKernel::on_axis(double w) const {
  const double aw = std::abs(w);
  if (aw == 0) {
    const double eps = 1e-9 * density_.support_edge();
    return {std::numbers::pi / 2 * density_(eps) / eps, 0.0};
  }
  const double re = std::numbers::pi / 2 * density_(aw) / aw;
  const double k0 = K_direct(density_, 0.0, 1e-13);
  const double kw = K_direct(density_, aw, 1e-13);
  return {re, -(k0 - kw) / w};
}

cplx DampingKernel::laplace(cplx s) const {
  if (s.real() < 0) throw std::domain_error("damping kernel transform needs Re s >= 0");
  if (s.real() == 0) return on_axis(s.imag());
  QuadratureSpec q = kernel_spec(density_, 1e-12);
  q.peaks.push_back({std::abs(s.imag()), s.real()});
  const SpectralDensity& j = density_;
  auto r = integrate(
      [&j, s](double u) {
        cplx v = j(u) / u * s / (u * u + s * s);
        Eigen::VectorXd out(2);
        out << v.real(), v.imag();
        return out;
      },
      2, 0.0, j.support_edge(), q);
  return {r.value(0), r.value(1)};
}

BathKernels::BathKernels(int n, const std::vector<ReservoirSpec>& res) : n_(n) {
  for (auto& r : res) {
    kernels_.emplace_back(r.spectral);
    sites_.push_back(r.sites);
    densities_.push_back(r.spectral);
    for (int s : r.sites)
      if (s < 0 || s >= n) throw std::out_of_range("reservoir '" + r.name + "' couples to missing site");
  }
}

Vector BathKernels::spectral_diag(double w) const {
  Vector d = Vector::Zero(n_);
  for (std::size_t a = 0; a < kernels_.size(); ++a) {
    const double v = densities_[a](w);
    for (int s : sites_[a]) d(s) += v;
  }
  return d;
}

Vector BathKernels::reactive_diag(double w) const {
  Vector d = Vector::Zero(n_);
  for (std::size_t a = 0; a < kernels_.size(); ++a) {
    const double v = kernels_[a].K(w);
    for (int s : sites_[a]) d(s) += v;
  }
  return d;
}

Vector BathKernels::gamma0_diag() const {
  Vector d = Vector::Zero(n_);
  for (std::size_t a = 0; a < kernels_.size(); ++a)
    for (int s : sites_[a]) d(s) += kernels_[a].gamma0();
  return d;
}

Vector BathKernels::noise_diag(double w, const std::vector<double>& temps) const {
  Vector d = Vector::Zero(n_);
  for (std::size_t a = 0; a < kernels_.size(); ++a) {
    const double v = densities_[a](w) * coth_factor(w, temps.at(a));
    for (int s : sites_[a]) d(s) += v;
  }
  return d;
}

CMatrix BathKernels::laplace(cplx s) const {
  CMatrix g = CMatrix::Zero(n_, n_);
  for (std::size_t a = 0; a < kernels_.size(); ++a) {
    const cplx v = kernels_[a].laplace(s);
    for (int i : sites_[a]) g(i, i) += v;
  }
  return g;
}

double BathKernels::support_edge() const {
  double e = 0;
  for (auto& d : densities_) e = std::max(e, d.support_edge());
  return e;
}

std::vector<double> BathKernels::kinks() const {
  std::vector<double> k;
  for (auto& d : densities_)
    for (double x : d.kinks()) k.push_back(x);
  return k;
}

Matrix renormalized_static(const NetworkModel& m, const std::vector<ReservoirSpec>& res) {
  BathKernels b(m.size(), res);
  Matrix v = m.v_static;
  v.diagonal() -= b.gamma0_diag();
  return v;
}

Matrix bare_from_renormalized(const Matrix& v_r, const std::vector<ReservoirSpec>& res) {
  BathKernels b(static_cast<int>(v_r.rows()), res);
  Matrix v = v_r;
  v.diagonal() += b.gamma0_diag();
  return v;
}

}  // namespace lqr
