#pragma once
/// Self-similar energy profile. The regularized energy dynamics (transport
/// toward the origin with velocity -x eta_eps(x) / 2 plus the cutoff
/// collision operator with kernel (xy)^{-3/2}) are run in pseudo-time until
/// stationary; Phi = Psi / x is the profile of the generalized solution
/// (M - |Phi|_1 / sqrt(t + t0)) delta_0 + Phi(x / sqrt(t + t0)) / (t + t0).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernel.hpp"
#include "measure.hpp"
#include "pde.hpp"
#include "weakform.hpp"

namespace wtk {

/// Nodes x_k = eps e^{k h}, k = 0 .. n-1, with the last node >= x_max.
struct ProfileGrid {
  double eps = 1e-3;
  double h = 0.05;
  double x_max = 60.0;

  void validate() const {
    if (!(eps > 0.0) || !(eps < 1.0)) throw std::invalid_argument("ProfileGrid: eps must lie in (0, 1)");
    if (!(h > 0.0)) throw std::invalid_argument("ProfileGrid: h must be > 0");
    if (!(x_max > 2.0 * eps)) throw std::invalid_argument("ProfileGrid: x_max must exceed 2 eps");
  }

  std::vector<double> nodes() const {
    validate();
    const int n = static_cast<int>(std::ceil(std::log(x_max / eps) / h - 1e-9)) + 1;
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) x[static_cast<std::size_t>(k)] = eps * std::exp(h * k);
    return x;
  }
};

struct ProfileState {
  ProfileGrid grid;
  std::vector<double> x;
  std::vector<double> psi;  // energy per node
  double E = 0.0;
  double eps = 1e-3;
  double pseudo_time = 0.0;
  double overflow = 0.0;  // energy booked beyond the last node

  double energy() const {
    Accumulator acc;
    for (double p : psi) acc.add(p);
    return acc.value();
  }
};

/// Discrete value of the integral of (x - 2)_+^2 / x against Psi.
inline double constraint_value(const std::vector<double>& x, const std::vector<double>& psi) {
  Accumulator acc;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = std::max(0.0, x[k] - 2.0);
    acc.add(d * d / x[k] * psi[k]);
  }
  return acc.value();
}

/// Dual-cell widths of a node set (half-gaps on each side; full gap at the ends).
inline std::vector<double> dual_widths(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double g = 0.5 * (x[k + 1] - x[k]);
    w[k] += g;
    w[k + 1] += g;
  }
  w.front() *= 2.0;
  w.back() *= 2.0;
  return w;
}

/// Seed x exp(-x / s) projected to nodes; s is halved until the constraint holds.
inline ProfileState init_profile(double E, const ProfileGrid& grid) {
  if (!(E >= 0.0)) throw std::invalid_argument("init_profile: E must be >= 0");
  ProfileState st;
  st.grid = grid;
  st.eps = grid.eps;
  st.E = E;
  st.x = grid.nodes();
  st.psi.assign(st.x.size(), 0.0);
  if (E == 0.0) return st;
  const auto w = dual_widths(st.x);
  for (double s = 1.0; s > 1e-12; s *= 0.5) {
    Accumulator tot;
    for (std::size_t k = 0; k < st.x.size(); ++k) {
      st.psi[k] = st.x[k] * std::exp(-st.x[k] / s) * w[k];
      tot.add(st.psi[k]);
    }
    const double scale = E / tot.value();
    for (double& p : st.psi) p *= scale;
    if (constraint_value(st.x, st.psi) <= 36.0 * E * E) return st;
  }
  throw std::runtime_error("init_profile: could not satisfy the energy constraint");
}

namespace detail {

struct Deposit {
  Split split;
  double coeff = 0.0;  // energy deposited per unit intensity
};

struct ProfilePair {
  std::uint32_t i, j;
  double w;     // (1/2 on the diagonal) (x_i x_j)^{-3/2}
  double loss;  // 2 x_i
  Deposit d[3];
  int nd = 0;
};

}  // namespace detail

/// Collision operator of the regularized energy dynamics on a fixed node set.
class ProfileCollision {
 public:
  ProfileCollision(const std::vector<double>& x, double eps) : x_(x), eps_(eps) {
    const std::size_t n = x.size();
    pairs_.reserve(n * (n + 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        // Nodes start at eps so every pair satisfies y >= eps.
        detail::ProfilePair p;
        p.i = static_cast<std::uint32_t>(i);
        p.j = static_cast<std::uint32_t>(j);
        p.w = (i == j ? 0.5 : 1.0) * std::pow(x[i] * x[j], -1.5);
        p.loss = 2.0 * x[i];
        const double e = eta_eps(x[i] - x[j], eps);
        auto add = [&](double z, double c) {
          if (c <= 0.0) return;
          p.d[p.nd++] = detail::Deposit{split_point(x, z), c};
        };
        add(x[i] + x[j], e * (x[i] + x[j]));
        add(x[i] - x[j], e * (x[i] - x[j]));
        add(2.0 * x[i], (1.0 - e) * 2.0 * x[i]);
        pairs_.push_back(p);
      }
    }
  }

  /// d psi / ds and the rate of energy booked as overflow.
  void flow(const std::vector<double>& psi, std::vector<double>& out, double& overflow) const {
    out.assign(x_.size(), 0.0);
    overflow = 0.0;
    for (const auto& p : pairs_) {
      const double a = psi[p.i], b = psi[p.j];
      if (a == 0.0 || b == 0.0) continue;
      const double r = p.w * a * b;
      out[p.i] -= p.loss * r;
      for (int k = 0; k < p.nd; ++k) {
        const auto& d = p.d[k];
        const double g = d.coeff * r;
        if (d.split.overflow) {
          overflow += g;
          continue;
        }
        // z >= eps always, so lo is a real node.
        out[static_cast<std::size_t>(d.split.lo)] += d.split.f_lo * g;
        if (d.split.hi >= 0) out[static_cast<std::size_t>(d.split.hi)] += d.split.f_hi * g;
      }
    }
  }

  double max_loss_rate(const std::vector<double>& psi) const {
    std::vector<double> rate(x_.size(), 0.0);
    for (const auto& p : pairs_) rate[p.i] += p.loss * p.w * psi[p.j];
    return *std::max_element(rate.begin(), rate.end());
  }

  /// Sum over pairs of w psi_i psi_j f(x_i, x_j).
  double pair_sum(const std::vector<double>& psi, const std::function<double(double, double)>& f) const {
    Accumulator acc;
    for (const auto& p : pairs_) {
      const double a = psi[p.i], b = psi[p.j];
      if (a == 0.0 || b == 0.0) continue;
      acc.add(p.w * a * b * f(x_[p.i], x_[p.j]));
    }
    return acc.value();
  }

 private:
  std::vector<double> x_;
  double eps_;
  std::vector<detail::ProfilePair> pairs_;
};

/// Explicit Heun substeps with dt_c <= 0.2 / max loss rate, halved until both
/// stages stay nonnegative.
inline void collision_step(ProfileState& st, const ProfileCollision& op, double dt) {
  double t = 0.0;
  const std::size_t n = st.psi.size();
  std::vector<double> k1, k2, p1(n), p2(n);
  double o1 = 0.0, o2 = 0.0;
  while (t < dt) {
    const double rate = op.max_loss_rate(st.psi);
    if (rate == 0.0) break;
    double h = std::min(dt - t, 0.2 / rate);
    op.flow(st.psi, k1, o1);
    for (;;) {
      bool ok = true;
      for (std::size_t i = 0; i < n; ++i) {
        p1[i] = st.psi[i] + h * k1[i];
        if (p1[i] < 0.0) ok = false;
      }
      if (ok) {
        op.flow(p1, k2, o2);
        for (std::size_t i = 0; i < n; ++i) {
          p2[i] = st.psi[i] + 0.5 * h * (k1[i] + k2[i]);
          if (p2[i] < 0.0) ok = false;
        }
      }
      if (ok) break;
      h *= 0.5;
    }
    st.psi.swap(p2);
    st.overflow += 0.5 * h * (o1 + o2);
    t += h;
    if (dt - t < 1e-14 * dt) t = dt;
  }
  st.pseudo_time += dt;
}

inline void collision_step(ProfileState& st, double dt) {
  collision_step(st, ProfileCollision(st.x, st.eps), dt);
}

/// Position after time T on the characteristic X' = -X eta_eps(X) / 2.
inline double characteristic(double x, double T, double eps) {
  if (x <= eps) return x;
  if (x * std::exp(-0.5 * T) >= 2.0 * eps) return x * std::exp(-0.5 * T);
  const int m = 200;
  const double h = T / m;
  auto f = [eps](double y) { return -0.5 * y * eta_eps(y, eps); };
  double y = x;
  for (int k = 0; k < m; ++k) {
    const double a = f(y), b = f(y + 0.5 * h * a), c = f(y + 0.5 * h * b), d = f(y + h * c);
    y += h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
  }
  return std::max(y, eps);
}

/// Semi-Lagrangian transport: every node's content follows its exact
/// characteristic and is split onto the bracketing nodes. Substeps keep the
/// displacement within one cell.
class ProfileTransport {
 public:
  ProfileTransport(const std::vector<double>& x, double eps, double dt) : dt_(dt) {
    if (!(dt >= 0.0)) throw std::invalid_argument("transport: dt must be >= 0");
    const double h = x.size() > 1 ? std::log(x[1] / x[0]) : 1.0;
    substeps_ = std::max(1, static_cast<int>(std::ceil(dt / (2.0 * h) - 1e-9)));
    const double ds = dt / substeps_;
    splits_.reserve(x.size());
    for (double xk : x) splits_.push_back(split_point(x, characteristic(xk, ds, eps)));
  }

  void apply(ProfileState& st) const {
    std::vector<double> q(st.psi.size());
    for (int s = 0; s < substeps_; ++s) {
      std::fill(q.begin(), q.end(), 0.0);
      for (std::size_t k = 0; k < st.psi.size(); ++k) {
        const Split& sp = splits_[k];
        q[static_cast<std::size_t>(sp.lo)] += sp.f_lo * st.psi[k];
        if (sp.hi >= 0) q[static_cast<std::size_t>(sp.hi)] += sp.f_hi * st.psi[k];
      }
      st.psi.swap(q);
    }
    st.pseudo_time += dt_;
  }

  int substeps() const { return substeps_; }

 private:
  double dt_;
  int substeps_ = 1;
  std::vector<Split> splits_;
};

inline void transport_step(ProfileState& st, double dt) { ProfileTransport(st.x, st.eps, dt).apply(st); }

// ---------------------------------------------------------------------------
// Residuals.

/// Twelve C^2 bumps in ln x, centres log-spaced on [0.01, 20], unit width.
inline std::vector<TestFunction> theta_basis() { return basis(BasisKind::log_bump, {0.01, 20.0, 12, 1.0}); }

/// Scales for the even bumps psi(x) = (1 - (x/L)^2)^3 with psi(0) = 1.
inline std::vector<double> phi_family_scales() { return {0.2, 0.5, 1.0, 2.0, 4.0, 8.0}; }

struct ResidualTable {
  std::vector<double> lhs, rhs;
  double max_residual = 0.0;  // max |lhs - rhs| / (1 + |lhs|)
};

inline void finish(ResidualTable& t) {
  t.max_residual = 0.0;
  for (std::size_t k = 0; k < t.lhs.size(); ++k) {
    t.max_residual = std::max(t.max_residual, std::abs(t.lhs[k] - t.rhs[k]) / (1.0 + std::abs(t.lhs[k])));
  }
}

/// Stationarity of the regularized dynamics: half x eta theta' against Psi
/// versus the cutoff collision term.
inline ResidualTable stationarity_residual(const std::vector<double>& x, const std::vector<double>& psi,
                                           double eps, const ProfileCollision& op,
                                           const std::vector<TestFunction>& thetas) {
  ResidualTable t;
  for (const TestFunction& th : thetas) {
    Accumulator l;
    for (std::size_t k = 0; k < x.size(); ++k) l.add(0.5 * x[k] * eta_eps(x[k], eps) * th.d1(x[k]) * psi[k]);
    const TestFunction phi = times_x(th);
    t.lhs.push_back(l.value());
    t.rhs.push_back(op.pair_sum(psi, [&](double a, double b) { return delta_phi_eps(phi, a, b, eps); }));
  }
  finish(t);
  return t;
}

/// The unregularized energy-profile identity (no eta, plain Delta).
inline ResidualTable psi_residual(const std::vector<double>& x, const std::vector<double>& psi,
                                  const ProfileCollision& op, const std::vector<TestFunction>& thetas) {
  ResidualTable t;
  for (const TestFunction& th : thetas) {
    Accumulator l;
    for (std::size_t k = 0; k < x.size(); ++k) l.add(0.5 * x[k] * th.d1(x[k]) * psi[k]);
    const TestFunction phi = times_x(th);
    t.lhs.push_back(l.value());
    t.rhs.push_back(op.pair_sum(psi, [&](double a, double b) { return delta_phi(phi, a, b); }));
  }
  finish(t);
  return t;
}

/// The profile identity for Phi with test functions that need not vanish at
/// the origin: half (x phi' - phi + phi(0)) against Phi versus the double sum
/// with kernel (xy)^{-1/2}.
inline ResidualTable phi_residual(const std::vector<double>& x, const std::vector<double>& phi_w,
                                  const std::vector<TestFunction>& tests) {
  ResidualTable t;
  const std::size_t n = x.size();
  for (const TestFunction& f : tests) {
    Accumulator l, r;
    const double f0 = f.value(0.0);
    for (std::size_t k = 0; k < n; ++k) l.add(0.5 * (x[k] * f.d1(x[k]) - f.value(x[k]) + f0) * phi_w[k]);
    for (std::size_t i = 0; i < n; ++i) {
      if (phi_w[i] == 0.0) continue;
      for (std::size_t j = 0; j <= i; ++j) {
        if (phi_w[j] == 0.0) continue;
        const double c = (i == j ? 0.5 : 1.0) / std::sqrt(x[i] * x[j]);
        r.add(c * phi_w[i] * phi_w[j] * delta_phi(f, x[i], x[j]));
      }
    }
    t.lhs.push_back(l.value());
    t.rhs.push_back(r.value());
  }
  finish(t);
  return t;
}

inline std::vector<TestFunction> phi_family() {
  std::vector<TestFunction> out;
  for (double L : phi_family_scales()) out.push_back(bump(0.0, L));
  return out;
}

/// Re-atomizes Psi on the node set refined by geometric midpoints, using the
/// piecewise-linear density through the nodes, and normalizes to E.
inline void refine_profile(const std::vector<double>& x, const std::vector<double>& psi, double E,
                           std::vector<double>& xr, std::vector<double>& pr) {
  const auto w = dual_widths(x);
  std::vector<double> dens(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) dens[k] = psi[k] / w[k];
  xr.clear();
  std::vector<double> dr;
  for (std::size_t k = 0; k < x.size(); ++k) {
    xr.push_back(x[k]);
    dr.push_back(dens[k]);
    if (k + 1 < x.size()) {
      const double m = std::sqrt(x[k] * x[k + 1]);
      const double a = (m - x[k]) / (x[k + 1] - x[k]);
      xr.push_back(m);
      dr.push_back((1.0 - a) * dens[k] + a * dens[k + 1]);
    }
  }
  const auto wr = dual_widths(xr);
  pr.resize(xr.size());
  Accumulator tot;
  for (std::size_t k = 0; k < xr.size(); ++k) {
    pr[k] = dr[k] * wr[k];
    tot.add(pr[k]);
  }
  if (tot.value() > 0.0) {
    const double s = E / tot.value();
    for (double& p : pr) p *= s;
  }
}

struct ProfileResult {
  ProfileState psi;
  std::vector<double> phi;  // Phi mass per node, psi_k / x_k
  double residual_stationary = 0.0;
  double residual_psi = 0.0;
  double residual_phi = 0.0;
  double residual_psi_refined = 0.0;  // same identity on the refined re-atomization
  double constraint = 0.0;
  double l1_phi = 0.0;
  double energy = 0.0;
  double overflow = 0.0;
  double l1_change_rate = 0.0;  // |psi_new - psi_old|_1 / (E * pseudo-time) at the end
  std::size_t iterations = 0;
  bool converged = false;
  bool constraint_violated = false;
  std::map<double, double> moments;  // of Psi
};

struct SolveOptions {
  double tol = 1e-3;
  /// Bound on the L1 change per unit pseudo-time; tol when not set.
  std::optional<double> change_tol;
  std::size_t max_iterations = 5000;
  std::size_t check_every = 10;
};

inline const std::vector<double>& profile_moment_orders() {
  static const std::vector<double> a{-1.4, -1.0, -0.5, 1.0, 2.0, 4.0};
  return a;
}

inline void fill_report(ProfileResult& r, const ProfileCollision& op) {
  const auto& st = r.psi;
  r.phi.resize(st.x.size());
  Accumulator l1;
  for (std::size_t k = 0; k < st.x.size(); ++k) {
    r.phi[k] = st.psi[k] / st.x[k];
    l1.add(r.phi[k]);
  }
  r.l1_phi = l1.value();
  r.energy = st.energy();
  r.overflow = st.overflow;
  r.constraint = constraint_value(st.x, st.psi);
  r.moments.clear();
  for (double a : profile_moment_orders()) {
    Accumulator m;
    for (std::size_t k = 0; k < st.x.size(); ++k) m.add(st.psi[k] * std::pow(st.x[k], a));
    r.moments[a] = m.value();
  }
  if (st.E == 0.0) return;
  const auto thetas = theta_basis();
  r.residual_stationary = stationarity_residual(st.x, st.psi, st.eps, op, thetas).max_residual;
  r.residual_psi = psi_residual(st.x, st.psi, op, thetas).max_residual;
  r.residual_phi = phi_residual(st.x, r.phi, phi_family()).max_residual;
  std::vector<double> xr, pr;
  refine_profile(st.x, st.psi, st.E, xr, pr);
  const ProfileCollision op_r(xr, st.eps);
  r.residual_psi_refined = psi_residual(xr, pr, op_r, thetas).max_residual;
}

/// Strang-split pseudo-time iteration: collision(h), transport(2h),
/// collision(h), where h is the log spacing so that transport is an exact
/// one-cell shift above 2 eps. Energy booked as overflow is put back by
/// rescaling to E. Stops when the L1 change per unit pseudo-time falls below
/// change_tol and the stationarity residual below tol.
inline ProfileResult solve_profile(double E, const ProfileGrid& grid, const SolveOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("solve_profile: tol must be > 0");
  ProfileResult r;
  r.psi = init_profile(E, grid);
  ProfileState& st = r.psi;
  const ProfileCollision op(st.x, st.eps);
  if (E == 0.0) {
    r.converged = true;
    fill_report(r, op);
    return r;
  }
  const double h = grid.h;
  const ProfileTransport tr(st.x, st.eps, 2.0 * h);
  const auto thetas = theta_basis();
  const double bound = 36.0 * E * E;
  std::vector<double> prev = st.psi;
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    collision_step(st, op, h);
    tr.apply(st);
    collision_step(st, op, h);
    const double total = st.energy();
    if (total > 0.0) {
      for (double& p : st.psi) p *= E / total;
    }
    r.iterations = it;
    st.pseudo_time = 2.0 * h * double(it);
    if (constraint_value(st.x, st.psi) > bound * (1.0 + 1e-12)) {
      r.constraint_violated = true;
      break;
    }
    if (it % opt.check_every == 0) {
      Accumulator d;
      for (std::size_t k = 0; k < st.psi.size(); ++k) d.add(std::abs(st.psi[k] - prev[k]));
      r.l1_change_rate = d.value() / (E * 2.0 * h * double(opt.check_every));
      prev = st.psi;
      if (r.l1_change_rate < opt.change_tol.value_or(opt.tol)) {
        const double res = stationarity_residual(st.x, st.psi, st.eps, op, thetas).max_residual;
        if (res < opt.tol) {
          r.converged = true;
          break;
        }
      }
    }
  }
  fill_report(r, op);
  return r;
}

// ---------------------------------------------------------------------------
// Generalized self-similar solution.

class GeneralizedSolution {
 public:
  GeneralizedSolution(const ProfileResult& profile, double M, double t0)
      : x_(profile.psi.x), phi_(profile.phi), l1_(profile.l1_phi), M_(M), t0_(t0) {
    if (!(t0 > 0.0)) throw std::invalid_argument("assemble_generalized: t0 must be > 0");
    if (M * std::sqrt(t0) < l1_ * (1.0 - 1e-14)) {
      throw std::invalid_argument("assemble_generalized: need M sqrt(t0) >= |Phi|_1");
    }
  }

  Measure at(double t) const {
    const double rt = std::sqrt(t + t0_);
    std::vector<Atom> atoms;
    atoms.reserve(x_.size());
    for (std::size_t k = 0; k < x_.size(); ++k) atoms.push_back({x_[k] * rt, phi_[k] / rt});
    return Measure(std::max(0.0, M_ - l1_ / rt), std::move(atoms));
  }

  Trajectory trajectory(double t_end, std::size_t n_intervals) const {
    Trajectory tr;
    for (std::size_t k = 0; k <= n_intervals; ++k) {
      const double t = t_end * double(k) / double(n_intervals);
      tr.push_back({t, at(t)});
    }
    return tr;
  }

  double M() const { return M_; }
  double t0() const { return t0_; }

 private:
  std::vector<double> x_, phi_;
  double l1_, M_, t0_;
};

inline GeneralizedSolution assemble_generalized(const ProfileResult& profile, double M, double t0) {
  return GeneralizedSolution(profile, M, t0);
}

/// phi(s, x) = psi(x / sqrt(s + t0)) for a fixed psi.
inline SpaceTimeTest self_similar_test(const TestFunction& psi, double t0) {
  SpaceTimeTest t;
  t.at = [psi, t0](double s) { return dilate(psi, std::sqrt(s + t0)); };
  t.time_derivative = [psi, t0](double s, double x) {
    const double tau = s + t0;
    const double rt = std::sqrt(tau);
    return psi.d1(x / rt) * x * (-0.5) / (tau * rt);
  };
  t.name = psi.name + "/self-similar";
  return t;
}

// ---------------------------------------------------------------------------
// Regularity and moment checks.

struct PropertyReport {
  double near_origin_exponent = 0.0;
  double near_origin_max_ratio = 0.0;  // max over the decade of mass(0, delta] / delta
  bool near_origin_ok = true;
  std::map<double, double> moments;
  double moment_max_rel_change = 0.0;  // vs refined result, if given
  bool moments_ok = true;
  double holder_quotient = 0.0;
  double holder_quotient_refined = 0.0;
  bool holder_ok = true;
  bool all_ok() const { return near_origin_ok && moments_ok && holder_ok; }
};

/// Max |Phi(x) - Phi(y)| / |x - y|^0.45 over node pairs in [10 eps, 10] with
/// |x - y| <= 1, Phi taken as a density (mass over dual width).
inline double holder_quotient(const std::vector<double>& x, const std::vector<double>& phi_w, double eps,
                              double alpha = 0.45) {
  const auto w = dual_widths(x);
  std::vector<double> xs, ds;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] >= 10.0 * eps && x[k] <= 10.0) {
      xs.push_back(x[k]);
      ds.push_back(phi_w[k] / w[k]);
    }
  }
  double q = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const double dx = xs[j] - xs[i];
      if (dx > 1.0) break;
      q = std::max(q, std::abs(ds[j] - ds[i]) / std::pow(dx, alpha));
    }
  }
  return q;
}

inline PropertyReport profile_property_checks(const ProfileResult& r, const ProfileResult* refined = nullptr) {
  PropertyReport rep;
  rep.moments = r.moments;
  const auto& x = r.psi.x;
  const auto& psi = r.psi.psi;
  if (r.psi.E == 0.0) return rep;
  // (a) mass of Psi on (0, delta] over delta in [1e-2, 1e-1].
  std::vector<double> ld, lm;
  for (int k = 0; k <= 5; ++k) {
    const double d = std::pow(10.0, -2.0 + k / 5.0);
    Accumulator m;
    for (std::size_t i = 0; i < x.size() && x[i] <= d; ++i) m.add(psi[i]);
    if (m.value() <= 0.0) continue;
    ld.push_back(std::log(d));
    lm.push_back(std::log(m.value()));
    rep.near_origin_max_ratio = std::max(rep.near_origin_max_ratio, m.value() / d);
  }
  if (ld.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < ld.size(); ++k) {
      mx += ld[k];
      my += lm[k];
    }
    mx /= ld.size();
    my /= ld.size();
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < ld.size(); ++k) {
      sxy += (ld[k] - mx) * (lm[k] - my);
      sxx += (ld[k] - mx) * (ld[k] - mx);
    }
    rep.near_origin_exponent = sxy / sxx;
    rep.near_origin_ok = rep.near_origin_exponent >= 1.0 && std::isfinite(rep.near_origin_max_ratio);
  }
  // (b) moments finite, and stable against the refined solve.
  for (const auto& [a, v] : r.moments) {
    if (!std::isfinite(v)) rep.moments_ok = false;
    if (refined) {
      const double c = std::abs(refined->moments.at(a) - v) / std::abs(v);
      rep.moment_max_rel_change = std::max(rep.moment_max_rel_change, c);
    }
  }
  if (rep.moment_max_rel_change > 0.05) rep.moments_ok = false;
  // (c) Hoelder quotient bounded, and not growing under refinement.
  rep.holder_quotient = holder_quotient(x, r.phi, r.psi.eps);
  rep.holder_ok = std::isfinite(rep.holder_quotient);
  if (refined) {
    rep.holder_quotient_refined = holder_quotient(refined->psi.x, refined->phi, refined->psi.eps);
    if (!(rep.holder_quotient_refined <= 1.2 * rep.holder_quotient)) rep.holder_ok = false;
  }
  return rep;
}

}  // namespace wtk
