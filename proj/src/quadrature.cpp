#include "lqr/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace lqr {

namespace {

struct Rule {
  std::array<double, 21> x{};   // nodes on [-1, 1]
  std::array<double, 21> wk{};  // Kronrod weights
  std::array<double, 21> wg{};  // Gauss weights (zero on Kronrod-only nodes)
};

const Rule& rule() {
  static const Rule r = [] {
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    using G = boost::math::quadrature::gauss<double, 10>;
    const auto& xa = GK::abscissa();
    const auto& wa = GK::weights();
    const auto& ga = G::abscissa();
    const auto& gw = G::weights();
    Rule q;
    // centre node then +/- pairs; boost interleaves Gauss nodes at odd positions
    q.x[0] = xa[0];
    q.wk[0] = wa[0];
    q.wg[0] = 0.0;
    int p = 1;
    for (std::size_t i = 1; i < xa.size(); ++i) {
      double wg = 0.0;
      if (i % 2 == 1) {
        std::size_t gi = (i - 1) / 2;
        if (std::abs(ga[gi] - xa[i]) > 1e-14) throw std::logic_error("unexpected Gauss-Kronrod node layout");
        wg = gw[gi];
      }
      for (double s : {-1.0, 1.0}) {
        q.x[p] = s * xa[i];
        q.wk[p] = wa[i];
        q.wg[p] = wg;
        ++p;
      }
    }
    return q;
  }();
  return r;
}

struct Piece {
  double a, b;
  Eigen::VectorXd value, error, magnitude;
  bool frozen = false;  // too narrow to split further
};

void evaluate(const VectorIntegrand& f, std::size_t dim, Piece& pc) {
  const Rule& q = rule();
  const double c = 0.5 * (pc.a + pc.b), h = 0.5 * (pc.b - pc.a);
  Eigen::VectorXd k = Eigen::VectorXd::Zero(dim), g = k, ab = k, asc = k;
  std::array<Eigen::VectorXd, 21> fv;
  for (int i = 0; i < 21; ++i) {
    fv[i] = f(c + h * q.x[i]);
    if (static_cast<std::size_t>(fv[i].size()) != dim) throw std::logic_error("integrand returned wrong dimension");
    if (!fv[i].allFinite()) {
      std::ostringstream os;
      os.precision(17);
      os << "non-finite integrand at w = " << c + h * q.x[i];
      throw NumericalError(os.str(), c + h * q.x[i]);
    }
    k += q.wk[i] * fv[i];
    g += q.wg[i] * fv[i];
    ab += q.wk[i] * fv[i].cwiseAbs();
  }
  const Eigen::VectorXd mean = 0.5 * k;
  for (int i = 0; i < 21; ++i) asc += q.wk[i] * (fv[i] - mean).cwiseAbs();
  pc.value = h * k;
  pc.magnitude = std::abs(h) * ab;
  pc.error.resize(dim);
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 0; i < dim; ++i) {
    // QUADPACK error scaling
    double err = std::abs(h * (k(i) - g(i)));
    double resasc = std::abs(h) * asc(i);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    if (pc.magnitude(i) > std::numeric_limits<double>::min() / (50 * eps))
      err = std::max(50 * eps * pc.magnitude(i), err);
    pc.error(i) = err;
  }
}

void evaluate_all(const VectorIntegrand& f, std::size_t dim, std::vector<Piece>& pcs,
                  const std::vector<std::size_t>& which, int threads) {
  const long n = static_cast<long>(which.size());
  bool failed = false;
  std::string msg;
  double where = 0;
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
  for (long i = 0; i < n; ++i) {
    try {
      evaluate(f, dim, pcs[which[i]]);
    } catch (const NumericalError& e) {
#pragma omp critical
      {
        failed = true;
        msg = e.what();
        where = e.omega();
      }
    } catch (const std::exception& e) {
#pragma omp critical
      {
        failed = true;
        msg = e.what();
      }
    }
  }
  if (failed) throw NumericalError(msg, where);
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

std::vector<double> initial_partition(double a, double b, const QuadratureSpec& spec) {
  std::vector<double> pts{a, b};
  for (double x : spec.breakpoints)
    if (x > a && x < b) pts.push_back(x);
  // graded points c +/- w 4^m, from w/16 outwards, until the next feature or the domain edge
  std::vector<double> centers;
  for (auto& p : spec.peaks)
    if (p.center > a && p.center < b) centers.push_back(p.center);
  for (auto& p : spec.peaks) {
    if (!(p.width > 0) || !std::isfinite(p.center)) continue;
    const double c = p.center;
    if (c < a - 1e3 * p.width || c > b + 1e3 * p.width) continue;
    for (int side : {-1, 1}) {
      double reach = side > 0 ? b - c : c - a;
      for (double cc : centers) {
        double d = side * (cc - c);
        if (d > 0.25 * p.width) reach = std::min(reach, d);
      }
      for (double off = p.width / 16; off < reach; off *= 4) pts.push_back(c + side * off);
    }
    if (c > a && c < b) pts.push_back(c);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  for (double x : pts) {
    if (x < a || x > b) continue;
    if (out.empty() || x - out.back() > 1e-13 * scale) out.push_back(x);
  }
  if (out.back() != b) {
    if (out.size() > 1) out.back() = b;
    else out.push_back(b);
  }
  return out;
}

QuadratureResult integrate(const VectorIntegrand& f, std::size_t dim, double a, double b,
                           const QuadratureSpec& spec) {
  if (!(b > a)) throw std::invalid_argument("integrate: need b > a");
  double hi = b;
  const bool infinite = std::isinf(b);
  if (infinite) {
    if (!std::isfinite(spec.upper_cutoff) || spec.upper_cutoff <= a)
      throw std::invalid_argument("integrate: infinite upper limit needs a finite cutoff above a");
    hi = spec.upper_cutoff;
  }
  const auto pts = initial_partition(a, hi, spec);
  std::vector<Piece> pcs;
  pcs.reserve(std::max<std::size_t>(pts.size() * 4, 64));
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) pcs.push_back(Piece{pts[i], pts[i + 1], {}, {}, {}});
  evaluate_all(f, dim, pcs, all_indices(pcs.size()), spec.threads);

  QuadratureResult res;
  auto totals = [&] {
    res.value = Eigen::VectorXd::Zero(dim);
    res.error = res.value;
    res.magnitude = res.value;
    for (auto& p : pcs) {
      res.value += p.value;
      res.error += p.error;
      res.magnitude += p.magnitude;
    }
    res.intervals = pcs.size();
    res.evaluations = 21 * pcs.size();
  };

  const double narrow = 64 * std::numeric_limits<double>::epsilon();
  auto active = [&](std::size_t i) { return i >= spec.passive.size() || !spec.passive[i]; };
  auto largest = [&] { return dim ? res.magnitude.maxCoeff() : 0.0; };
  for (;;) {
    totals();
    Eigen::VectorXd tol(dim);
    bool done = true;
    const double shared = spec.shared_rel_tol * largest();
    for (std::size_t i = 0; i < dim; ++i) {
      tol(i) = std::max({spec.abs_tol, spec.rel_tol * res.magnitude(i), shared});
      if (active(i) && res.error(i) > tol(i)) done = false;
    }
    if (done) break;
    // score intervals by their worst normalized contribution on failing components
    std::vector<std::pair<double, std::size_t>> score;
    score.reserve(pcs.size());
    double best = 0;
    for (std::size_t j = 0; j < pcs.size(); ++j) {
      if (pcs[j].frozen) continue;
      double s = 0;
      for (std::size_t i = 0; i < dim; ++i)
        if (active(i) && res.error(i) > tol(i)) s = std::max(s, pcs[j].error(i) / std::max(tol(i), 1e-300));
      if (s > 0) {
        score.emplace_back(s, j);
        best = std::max(best, s);
      }
    }
    if (score.empty()) throw QuadratureError("quadrature stalled at round-off level", res);
    if (pcs.size() >= spec.max_intervals) {
      std::ostringstream os;
      os << "quadrature exceeded " << spec.max_intervals << " intervals; max error ratio " << best;
      throw QuadratureError(os.str(), res);
    }
    std::sort(score.begin(), score.end(), std::greater<>());
    const std::size_t cap = std::max<std::size_t>(1, pcs.size() / 8);
    std::vector<std::size_t> todo;
    for (std::size_t r = 0; r < score.size() && r < cap; ++r) {
      if (score[r].first < 0.25 * best) break;
      const std::size_t j = score[r].second;
      const double lo = pcs[j].a, up = pcs[j].b;
      if (up - lo <= narrow * std::max(std::abs(lo), std::abs(up))) {
        pcs[j].frozen = true;
        continue;
      }
      const double mid = 0.5 * (lo + up);
      pcs[j].b = mid;
      todo.push_back(j);
      pcs.push_back(Piece{mid, up, {}, {}, {}});
      todo.push_back(pcs.size() - 1);
    }
    evaluate_all(f, dim, pcs, todo, spec.threads);
  }

  if (infinite) {
    // tail [cutoff, 2 cutoff] must be negligible
    std::vector<Piece> tail;
    const int nt = 8;
    for (int i = 0; i < nt; ++i)
      tail.push_back(Piece{hi + hi * i / nt, hi + hi * (i + 1) / nt, {}, {}, {}});
    evaluate_all(f, dim, tail, all_indices(tail.size()), spec.threads);
    Eigen::VectorXd tv = Eigen::VectorXd::Zero(dim);
    for (auto& p : tail) tv += p.magnitude;
    const double shared = spec.shared_rel_tol * largest();
    for (std::size_t i = 0; i < dim; ++i) {
      double tol = std::max({spec.abs_tol, spec.rel_tol * res.magnitude(i), shared});
      if (active(i) && tv(i) > tol) {
        std::ostringstream os;
        os << "tail beyond cutoff " << hi << " not negligible (component " << i << ": " << tv(i) << " > " << tol << ")";
        throw QuadratureError(os.str(), res);
      }
    }
  }
  return res;
}

double integrate(const std::function<double(double)>& f, double a, double b, const QuadratureSpec& spec,
                 double* error) {
  auto r = integrate([&f](double w) { return Eigen::VectorXd::Constant(1, f(w)); }, 1, a, b, spec);
  if (error) *error = r.error(0);
  return r.value(0);
}

}  // namespace lqr
