#pragma once
/// The collision functional tested against phi, weak-form residuals along
/// trajectories, and the integral identities and inequalities that hold for
/// every weak solution.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernel.hpp"
#include "measure.hpp"

namespace wtk {

/// Neumaier compensated sum.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct RhsOptions {
  double eps = 0.0;
  bool include_diagonal = true;
};

struct RhsResult {
  double value = 0.0;
  /// The 1/2 sum_i w_i^2 K Delta(x_i, x_i) part, included in value when
  /// include_diagonal is set.
  double diagonal = 0.0;
  /// eps = 0 with a test function that is not C^1.
  bool contract_violation = false;
};

inline RhsResult weak_rhs_detailed(const Measure& mu, const TestFunction& phi, const RhsOptions& opt) {
  if (opt.eps < 0.0) throw std::invalid_argument("weak_rhs: eps must be >= 0");
  RhsResult r;
  const auto atoms = mu.atoms();
  const std::size_t n = atoms.size();
  if (opt.eps == 0.0 && phi.smoothness < 1 && n > 0) r.contract_violation = true;
  std::vector<double> fx(n), f2x(n), kdiag(n);
  for (std::size_t i = 0; i < n; ++i) {
    fx[i] = phi.value(atoms[i].position);
    f2x[i] = phi.value(2.0 * atoms[i].position);
  }
  Accumulator off, diag;
  const double phi0 = phi.value(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = atoms[i].position, wi = atoms[i].weight;
    if (wi == 0.0) continue;
    for (std::size_t j = 0; j < i; ++j) {
      const double xj = atoms[j].position, wj = atoms[j].weight;
      if (wj == 0.0) continue;
      const double d = phi.value(xi + xj) - 2.0 * fx[i] + phi.value(xi - xj);
      off.add(wi * wj * kernel_reg(xi, xj, opt.eps) * d);
    }
    const double dd = f2x[i] - 2.0 * fx[i] + phi0;
    diag.add(0.5 * wi * wi * kernel_reg(xi, xi, opt.eps) * dd);
  }
  r.diagonal = diag.value();
  r.value = off.value() + (opt.include_diagonal ? r.diagonal : 0.0);
  return r;
}

inline double weak_rhs(const Measure& mu, const TestFunction& phi, const RhsOptions& opt = {}) {
  return weak_rhs_detailed(mu, phi, opt).value;
}

inline double integrate(const Measure& mu, const TestFunction& phi) {
  Accumulator acc;
  if (mu.condensate() != 0.0) acc.add(mu.condensate() * phi.value(0.0));
  for (const Atom& a : mu.atoms()) acc.add(a.weight * phi.value(a.position));
  return acc.value();
}

struct Snapshot {
  double t = 0.0;
  Measure mu;
};
using Trajectory = std::vector<Snapshot>;

/// phi(s, x) together with its time derivative.
struct SpaceTimeTest {
  std::function<TestFunction(double)> at;
  std::function<double(double, double)> time_derivative;  // (s, x); empty means 0
  std::string name;
};

inline SpaceTimeTest static_test(const TestFunction& phi) {
  SpaceTimeTest t;
  t.at = [phi](double) { return phi; };
  t.name = phi.name;
  return t;
}

struct ResidualReport {
  double residual = 0.0;  // |lhs - rhs| / (1 + |lhs|)
  double lhs = 0.0;
  double rhs = 0.0;
};

inline ResidualReport weak_residual_report(const Trajectory& traj, const SpaceTimeTest& test,
                                           const RhsOptions& opt = {}) {
  if (traj.size() < 2) throw std::invalid_argument("weak_residual: need at least two snapshots");
  for (std::size_t k = 1; k < traj.size(); ++k) {
    if (!(traj[k].t > traj[k - 1].t)) throw std::invalid_argument("weak_residual: times must increase");
  }
  std::vector<double> integrand(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double s = traj[k].t;
    const TestFunction phi = test.at(s);
    double v = weak_rhs(traj[k].mu, phi, opt);
    if (test.time_derivative) {
      Accumulator acc;
      acc.add(traj[k].mu.condensate() * test.time_derivative(s, 0.0));
      for (const Atom& a : traj[k].mu.atoms()) acc.add(a.weight * test.time_derivative(s, a.position));
      v += acc.value();
    }
    integrand[k] = v;
  }
  Accumulator rhs;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    rhs.add(0.5 * (traj[k].t - traj[k - 1].t) * (integrand[k] + integrand[k - 1]));
  }
  ResidualReport r;
  r.lhs = integrate(traj.back().mu, test.at(traj.back().t)) - integrate(traj.front().mu, test.at(traj.front().t));
  r.rhs = rhs.value();
  r.residual = std::abs(r.lhs - r.rhs) / (1.0 + std::abs(r.lhs));
  return r;
}

inline double weak_residual(const Trajectory& traj, const SpaceTimeTest& test, const RhsOptions& opt = {}) {
  return weak_residual_report(traj, test, opt).residual;
}

inline double weak_residual(const Trajectory& traj, const TestFunction& phi, const RhsOptions& opt = {}) {
  return weak_residual_report(traj, static_test(phi), opt).residual;
}

// ---------------------------------------------------------------------------
// The pi^2/12 identity.

struct Pi2Result {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

/// Integral over x > y >= 0 of Delta_phi(x, y) / ((x + eps)(y + eps)) for
/// compactly supported phi. Written in u = x - y and y; the y > L tail
/// (L = support bound) is integrated in closed form.
inline Pi2Result pi2_identity(double eps, const TestFunction& phi, double tol = 1e-8) {
  if (!(eps > 0.0)) throw std::invalid_argument("pi2_identity: eps must be > 0");
  const double L = phi.support_upper;
  if (!std::isfinite(L)) throw std::invalid_argument("pi2_identity: phi must be compactly supported");
  using boost::math::quadrature::gauss_kronrod;
  constexpr unsigned kDepth = 8;
  Pi2Result res;

  auto geometric_breaks = [eps](double lo, double hi, std::vector<double>& out) {
    for (double p = eps; p < hi; p *= 2.0) {
      if (p > lo) out.push_back(p);
    }
  };
  auto piecewise = [&](const std::function<double(double)>& f, std::vector<double> pts, double& err_acc) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double total = 0.0;
    for (std::size_t k = 1; k < pts.size(); ++k) {
      if (!(pts[k] > pts[k - 1])) continue;
      double e = 0.0;
      total += gauss_kronrod<double, 31>::integrate(f, pts[k - 1], pts[k], kDepth, tol, &e);
      err_acc += e;
    }
    return total;
  };

  double inner_err = 0.0;
  auto inner = [&](double u) {
    const double phiu = phi.value(u);
    auto f = [&](double y) {
      const double d = phi.value(2.0 * y + u) - 2.0 * phi.value(y + u) + phiu;
      return d / ((y + u + eps) * (y + eps));
    };
    std::vector<double> pts{0.0, L};
    if (L - u > 0.0) {
      pts.push_back(0.5 * (L - u));
      pts.push_back(L - u);
    }
    geometric_breaks(0.0, L, pts);
    double v = piecewise(f, pts, inner_err);
    const double tail = u > 0.0 ? std::log1p(u / (L + eps)) / u : 1.0 / (L + eps);
    return v + phiu * tail;
  };
  std::vector<double> outer_pts{0.0, L};
  geometric_breaks(0.0, L, outer_pts);
  double outer_err = 0.0;
  res.value = piecewise(inner, outer_pts, outer_err);
  res.error_estimate = outer_err + inner_err;
  res.converged = res.error_estimate <= 1e-6 * (1.0 + std::abs(res.value));
  return res;
}

/// Polynomial extrapolation to eps = 0 through the given points (Neville).
inline double richardson_to_zero(const std::vector<double>& eps, const std::vector<double>& values) {
  if (eps.size() != values.size() || eps.empty()) throw std::invalid_argument("richardson_to_zero: size mismatch");
  std::vector<double> p = values;
  const std::size_t n = eps.size();
  for (std::size_t m = 1; m < n; ++m) {
    for (std::size_t i = 0; i + m < n; ++i) {
      p[i] = (eps[i + m] * p[i] - eps[i] * p[i + 1]) / (eps[i + m] - eps[i]);
    }
  }
  return p[0];
}

// ---------------------------------------------------------------------------
// Inequalities along trajectories.

struct CheckResult {
  bool ok = true;
  double margin = kInf;  // smallest lhs - rhs seen (positive means slack)
};

/// Mass of [0, c] at every snapshot against (1/2c) times the time integral of
/// the double sum over [c, inf)^2 with weight (c - |x - y|)_+ / sqrt(xy).
inline CheckResult key_inequality_check(const Trajectory& traj, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("key_inequality_check: c must be > 0");
  CheckResult out;
  if (traj.empty()) return out;
  auto S = [c](const Measure& mu) {
    Accumulator acc;
    const auto a = mu.atoms();
    auto it = std::lower_bound(a.begin(), a.end(), c,
                               [](const Atom& at, double v) { return at.position < v; });
    const std::size_t lo = static_cast<std::size_t>(it - a.begin());
    for (std::size_t i = lo; i < a.size(); ++i) {
      acc.add(a[i].weight * a[i].weight * c / a[i].position);
      for (std::size_t j = i + 1; j < a.size(); ++j) {
        const double d = a[j].position - a[i].position;
        if (d >= c) break;
        acc.add(2.0 * a[i].weight * a[j].weight * (c - d) / std::sqrt(a[i].position * a[j].position));
      }
    }
    return acc.value();
  };
  double integral = 0.0, slack = 0.0;
  double prev = S(traj.front().mu);
  auto test_at = [&](std::size_t k) {
    const double lhs = near_mass(traj[k].mu, c);
    const double rhs = integral / (2.0 * c);
    const double m = lhs - rhs;
    out.margin = std::min(out.margin, m);
    if (m < -slack / (2.0 * c) - 1e-12 * (1.0 + lhs)) out.ok = false;
  };
  test_at(0);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double cur = S(traj[k].mu);
    const double dt = traj[k].t - traj[k - 1].t;
    integral += 0.5 * dt * (prev + cur);
    slack += 0.5 * dt * std::abs(cur - prev);
    prev = cur;
    test_at(k);
  }
  return out;
}

/// Time integral over [t1, t2] of the mass in (0, r] against
/// 12 sqrt((t2 - t1) M) sqrt(r), M the initial total mass. Snapshots are
/// linearly interpolated at t1 and t2.
inline CheckResult sqrt_bound_check(const Trajectory& traj, double r, double t1, double t2) {
  if (traj.empty()) throw std::invalid_argument("sqrt_bound_check: empty trajectory");
  if (!(r > 0.0)) throw std::invalid_argument("sqrt_bound_check: r must be > 0");
  if (!(t1 >= traj.front().t) || !(t2 <= traj.back().t) || !(t1 <= t2)) {
    throw std::invalid_argument("sqrt_bound_check: [t1, t2] must lie within the trajectory");
  }
  std::vector<double> ts, vs;
  for (const Snapshot& s : traj) {
    ts.push_back(s.t);
    vs.push_back(active_mass_below(s.mu, r));
  }
  auto interp = [&](double t) {
    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    if (it == ts.end()) return vs.back();
    const std::size_t k = static_cast<std::size_t>(it - ts.begin());
    if (ts[k] == t || k == 0) return vs[k];
    const double a = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
    return (1.0 - a) * vs[k - 1] + a * vs[k];
  };
  double lhs = 0.0;
  double tp = t1, vp = interp(t1);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (ts[k] <= t1) continue;
    const double tc = std::min(ts[k], t2);
    const double vc = ts[k] <= t2 ? vs[k] : interp(t2);
    lhs += 0.5 * (tc - tp) * (vp + vc);
    tp = tc;
    vp = vc;
    if (ts[k] >= t2) break;
  }
  const double M = total_mass(traj.front().mu);
  const double bound = 12.0 * std::sqrt((t2 - t1) * M) * std::sqrt(r);
  CheckResult out;
  out.margin = bound - lhs;
  out.ok = lhs <= bound;
  return out;
}

}  // namespace wtk
