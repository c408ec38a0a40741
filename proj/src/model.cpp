#include "lqr/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace lqr {

double smooth_step(double x) {
  if (x > 0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_tabulated(const Tabulated& t) {
  if (t.omega.size() < 2 || t.omega.size() != t.value.size())
    throw std::invalid_argument("tabulated spectral density needs >= 2 matching samples");
  if (t.omega.front() < 0) throw std::invalid_argument("tabulated frequencies must be >= 0");
  for (std::size_t i = 1; i < t.omega.size(); ++i)
    if (!(t.omega[i] > t.omega[i - 1]))
      throw std::invalid_argument("tabulated frequencies must be strictly increasing");
}

}  // namespace

SpectralDensity::SpectralDensity(Family f) : family_(std::move(f)) {
  if (auto* t = std::get_if<Tabulated>(&family_)) check_tabulated(*t);
}

double SpectralDensity::eval_positive(double w) const {
  return std::visit(
      overloaded{
          [w](const PowerLawCutoff& p) {
            return p.strength * std::pow(w, p.exponent) * smooth_step((w - p.cutoff) / p.sharpness);
          },
          [w](const GappedAtOmega0& p) {
            if (w >= p.gap) return 0.0;
            return p.strength * std::pow(w, p.exponent) * (p.gap - w) *
                   smooth_step((w - p.cutoff) / p.sharpness);
          },
          [w](const Tabulated& t) {
            if (w <= t.omega.front()) {
              // below the first sample: straight line to the origin
              return t.omega.front() > 0 ? t.value.front() * w / t.omega.front() : t.value.front();
            }
            if (w >= t.omega.back()) return 0.0;
            auto it = std::upper_bound(t.omega.begin(), t.omega.end(), w);
            std::size_t i = static_cast<std::size_t>(it - t.omega.begin());
            double x0 = t.omega[i - 1], x1 = t.omega[i];
            double f = (w - x0) / (x1 - x0);
            return (1 - f) * t.value[i - 1] + f * t.value[i];
          }},
      family_);
}

double SpectralDensity::operator()(double w) const {
  if (w == 0.0) return 0.0;
  return w > 0 ? eval_positive(w) : -eval_positive(-w);
}

double SpectralDensity::at(double w) const {
  if (auto* t = std::get_if<Tabulated>(&family_)) {
    if (std::abs(w) > t->omega.back())
      throw std::out_of_range("frequency " + std::to_string(w) + " outside tabulated grid [0, " +
                              std::to_string(t->omega.back()) + "]");
  }
  return (*this)(w);
}

double SpectralDensity::support_edge() const {
  return std::visit(overloaded{[](const PowerLawCutoff& p) { return p.cutoff + 40.0 * p.sharpness; },
                               [](const GappedAtOmega0& p) {
                                 return std::min(p.gap, p.cutoff + 40.0 * p.sharpness);
                               },
                               [](const Tabulated& t) { return t.omega.back(); }},
                    family_);
}

std::vector<double> SpectralDensity::kinks() const {
  return std::visit(overloaded{[](const PowerLawCutoff&) { return std::vector<double>{}; },
                               [](const GappedAtOmega0& p) { return std::vector<double>{p.gap}; },
                               [](const Tabulated& t) {
                                 return std::vector<double>{t.omega.front(), t.omega.back()};
                               }},
                    family_);
}

double SpectralDensity::strength() const {
  return std::visit(overloaded{[](const PowerLawCutoff& p) { return p.strength; },
                               [](const GappedAtOmega0& p) { return p.strength; },
                               [](const Tabulated&) { return 1.0; }},
                    family_);
}

SpectralDensity SpectralDensity::with_strength(double g) const {
  return std::visit(overloaded{[g](PowerLawCutoff p) { p.strength = g; return SpectralDensity(p); },
                               [g](GappedAtOmega0 p) { p.strength = g; return SpectralDensity(p); },
                               [g](Tabulated t) {
                                 for (auto& v : t.value) v *= g;
                                 return SpectralDensity(t);
                               }},
                    family_);
}

std::string SpectralDensity::shape_key() const {
  char buf[256];
  return std::visit(
      overloaded{[&](const PowerLawCutoff& p) {
                   std::snprintf(buf, sizeof buf, "pow:%.17g:%.17g:%.17g", p.exponent, p.cutoff,
                                 p.sharpness);
                   return std::string(buf);
                 },
                 [&](const GappedAtOmega0& p) {
                   std::snprintf(buf, sizeof buf, "gap:%.17g:%.17g:%.17g:%.17g", p.exponent,
                                 p.cutoff, p.sharpness, p.gap);
                   return std::string(buf);
                 },
                 [&](const Tabulated& t) {
                   // tabulated densities are not rescaled, the key is the data itself
                   std::ostringstream os;
                   os.precision(17);
                   os << "tab";
                   for (std::size_t i = 0; i < t.omega.size(); ++i) os << ':' << t.omega[i] << ',' << t.value[i];
                   return os.str();
                 }},
      family_);
}

Matrix ReservoirSpec::projector(int n) const {
  Matrix p = Matrix::Zero(n, n);
  for (int s : sites) {
    if (s < 0 || s >= n) throw std::out_of_range("reservoir '" + name + "' couples to missing site " + std::to_string(s));
    p(s, s) = 1.0;
  }
  return p;
}

void NetworkModel::set_harmonic(int k, const CMatrix& vk) {
  if (k == 0) throw std::invalid_argument("harmonic 0 is the static potential");
  drive[k] = vk;
  drive[-k] = vk.conjugate();
}

CMatrix NetworkModel::harmonic(int k) const {
  if (k == 0) return v_static.cast<cplx>();
  auto it = drive.find(k);
  if (it == drive.end()) return CMatrix::Zero(size(), size());
  return it->second;
}

int NetworkModel::max_harmonic() const {
  int m = 0;
  for (auto& [k, v] : drive)
    if (v.norm() > 0) m = std::max(m, std::abs(k));
  return m;
}

Matrix NetworkModel::potential(double t) const {
  CMatrix v = v_static.cast<cplx>();
  for (auto& [k, vk] : drive) v += vk * std::exp(cplx(0, k * drive_frequency * t));
  return v.real();
}

Matrix NetworkModel::potential_rate(double t) const {
  CMatrix v = CMatrix::Zero(size(), size());
  for (auto& [k, vk] : drive) v += vk * (cplx(0, k * drive_frequency) * std::exp(cplx(0, k * drive_frequency * t)));
  return v.real();
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << (ok() ? "valid" : "invalid");
  for (auto& v : violations) os << "\n  violation: " << v;
  for (auto& w : warnings) os << "\n  warning: " << w;
  return os.str();
}

Vector normal_frequencies(const Matrix& mass, const Matrix& v) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(v, mass);
  Vector lam = es.eigenvalues();
  Vector w(lam.size());
  for (int i = 0; i < lam.size(); ++i) w(i) = lam(i) > 0 ? std::sqrt(lam(i)) : -std::sqrt(-lam(i));
  return w;
}

ValidationReport validate(const NetworkModel& m, const std::vector<ReservoirSpec>& res,
                          double resonance_margin) {
  ValidationReport r;
  const int n = m.size();
  auto fail = [&r](std::string s) { r.violations.push_back(std::move(s)); };
  if (n == 0) {
    fail("network has no oscillators");
    return r;
  }
  if (m.mass.cols() != n || m.v_static.rows() != n || m.v_static.cols() != n) {
    fail("mass and static potential dimensions differ");
    return r;
  }
  auto sym_err = [](const auto& a) { return (a - a.transpose()).norm() / std::max(1.0, a.norm()); };
  if (!m.mass.allFinite() || !m.v_static.allFinite()) fail("non-finite matrix entries");
  if (sym_err(m.mass) > 1e-12) fail("mass matrix is not symmetric");
  if (sym_err(m.v_static) > 1e-12) fail("static potential is not symmetric");
  if (Eigen::LLT<Matrix>(m.mass).info() != Eigen::Success) fail("mass matrix is not positive definite");

  for (auto& [k, vk] : m.drive) {
    const std::string tag = "drive harmonic " + std::to_string(k);
    if (k == 0) {
      fail(tag + ": harmonic 0 belongs to the static potential");
      continue;
    }
    if (vk.rows() != n || vk.cols() != n) {
      fail(tag + ": wrong dimensions");
      continue;
    }
    if (sym_err(vk) > 1e-12) fail(tag + " is not symmetric");
    auto it = m.drive.find(-k);
    if (it == m.drive.end() || (it->second - vk.conjugate()).norm() > 1e-12 * std::max(1.0, vk.norm()))
      fail(tag + ": V_{-k} != conj(V_k), potential would not be real");
    if (m.time_reversal_invariant && vk.imag().norm() > 1e-12 * std::max(1.0, vk.norm()))
      fail(tag + ": complex harmonic in a time-reversal-invariant drive");
  }
  if (!m.drive.empty() && !(m.drive_frequency > 0)) fail("drive frequency must be positive");

  std::map<int, std::string> used;
  for (std::size_t a = 0; a < res.size(); ++a) {
    const auto& rs = res[a];
    const std::string tag = "reservoir '" + (rs.name.empty() ? std::to_string(a) : rs.name) + "'";
    if (!(rs.temperature >= 0) || !std::isfinite(rs.temperature)) fail(tag + ": temperature must be finite and >= 0");
    if (rs.sites.empty()) fail(tag + ": couples to no site");
    std::set<int> own;
    for (int s : rs.sites) {
      if (s < 0 || s >= n) fail(tag + ": site " + std::to_string(s) + " out of range");
      else if (!own.insert(s).second) fail(tag + ": site " + std::to_string(s) + " listed twice");
      else if (auto [it, fresh] = used.emplace(s, tag); !fresh)
        // both baths damp the same coordinate; the currents stay well defined, but the
        // local (system-side) heat only resolves their sum
        r.warnings.push_back(tag + " shares site " + std::to_string(s) + " with " + it->second);
    }
    // heat formulas need the projector to commute with the mass matrix
    for (int s : rs.sites) {
      if (s < 0 || s >= n) continue;
      for (int j = 0; j < n; ++j) {
        bool inside = std::find(rs.sites.begin(), rs.sites.end(), j) != rs.sites.end();
        if (!inside && m.mass(s, j) != 0.0) {
          fail(tag + ": mass couples site " + std::to_string(s) + " to uncoupled site " + std::to_string(j));
          break;
        }
      }
    }
    if (rs.spectral.strength() < 0) fail(tag + ": negative coupling strength");
  }

  if (r.ok()) {
    Vector w = normal_frequencies(m.mass, m.v_static);
    for (int i = 0; i < w.size(); ++i)
      if (w(i) <= 0) fail("static potential is not positive definite");
    if (r.ok() && m.driven()) {
      // parametric resonances sit near k w_d = W_a + W_b
      const int kmax = std::max(2, 2 * m.max_harmonic());
      for (int a = 0; a < w.size(); ++a)
        for (int b = a; b < w.size(); ++b)
          for (int k = 1; k <= kmax; ++k) {
            double target = w(a) + w(b);
            if (std::abs(k * m.drive_frequency - target) < resonance_margin * target) {
              char buf[200];
              std::snprintf(buf, sizeof buf,
                            "parametric resonance risk: %d*w_d = %.6g close to W_%d + W_%d = %.6g", k,
                            k * m.drive_frequency, a, b, target);
              r.warnings.emplace_back(buf);
            }
          }
    }
  }
  return r;
}

}  // namespace lqr
