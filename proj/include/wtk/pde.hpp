#pragma once
/// Deterministic conservative evolution on a logarithmic grid. Each node pair
/// exchanges mass through the mean of the two interaction outcomes; off-grid
/// outcomes are split between bracketing nodes so that mass and first moment
/// are kept. The condensate plays the role of a node at position 0 and
/// outcomes beyond x_max are booked in an overflow ledger.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "kernel.hpp"
#include "measure.hpp"
#include "weakform.hpp"

namespace wtk {

struct GridSpec {
  double x_min = 1e-4;
  double x_max = 1e2;
  int n_nodes = 240;

  void validate() const {
    if (!(x_min > 0.0) || !(x_max > x_min) || n_nodes < 2) {
      throw std::invalid_argument("GridSpec: need 0 < x_min < x_max and n_nodes >= 2");
    }
  }

  /// Positive nodes x_0 = x_min < ... < x_{n-1} = x_max.
  std::vector<double> nodes() const {
    validate();
    std::vector<double> x(static_cast<std::size_t>(n_nodes));
    const double ratio = x_max / x_min;
    for (int k = 0; k < n_nodes; ++k) {
      x[static_cast<std::size_t>(k)] = x_min * std::pow(ratio, double(k) / double(n_nodes - 1));
    }
    x.back() = x_max;
    return x;
  }
};

/// Two-point split of a deposit at z. Index -1 stands for the condensate;
/// overflow is set when z lies beyond the last node.
struct Split {
  int lo = -1;
  int hi = -1;
  double f_lo = 0.0;
  double f_hi = 0.0;
  bool overflow = false;
};

inline Split split_point(const std::vector<double>& x, double z) {
  Split s;
  if (z <= 0.0) {
    s.lo = -1;
    s.f_lo = 1.0;
    return s;
  }
  if (z > x.back()) {
    s.overflow = true;
    return s;
  }
  if (z < x.front()) {
    s.lo = -1;
    s.hi = 0;
    s.f_hi = z / x.front();
    s.f_lo = 1.0 - s.f_hi;
    return s;
  }
  auto it = std::upper_bound(x.begin(), x.end(), z);
  int k = static_cast<int>(it - x.begin()) - 1;
  if (x[static_cast<std::size_t>(k)] == z) {
    s.lo = k;
    s.f_lo = 1.0;
    return s;
  }
  const double a = x[static_cast<std::size_t>(k)], b = x[static_cast<std::size_t>(k) + 1];
  s.lo = k;
  s.hi = k + 1;
  s.f_lo = (b - z) / (b - a);
  s.f_hi = (z - a) / (b - a);
  return s;
}

struct SolverState {
  GridSpec grid;
  std::vector<double> weights;  // per positive node
  double condensate = 0.0;
  double overflow_mass = 0.0;
  double overflow_energy = 0.0;
  double time = 0.0;
  double eps = 1e-3;

  Measure measure() const {
    const auto x = grid.nodes();
    std::vector<Atom> atoms;
    atoms.reserve(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) atoms.push_back({x[k], weights[k]});
    return Measure(condensate, std::move(atoms));
  }

  double mass_total() const {
    Accumulator acc;
    acc.add(condensate);
    for (double g : weights) acc.add(g);
    acc.add(overflow_mass);
    return acc.value();
  }

  double energy_active() const {
    const auto x = grid.nodes();
    Accumulator acc;
    for (std::size_t k = 0; k < x.size(); ++k) acc.add(x[k] * weights[k]);
    return acc.value();
  }
};

/// Rates of change of every account.
struct Flow {
  std::vector<double> weights;
  double condensate = 0.0;
  double overflow_mass = 0.0;
  double overflow_energy = 0.0;
};

/// Precomputed pair interactions for a grid and eps.
class PairTable {
 public:
  PairTable(const GridSpec& grid, double eps) : grid_(grid), eps_(eps), x_(grid.nodes()) {
    if (!(eps >= 0.0)) throw std::invalid_argument("PairTable: eps must be >= 0");
    const std::size_t n = x_.size();
    pairs_.reserve(n * (n + 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        Pair p;
        p.i = static_cast<std::uint32_t>(i);
        p.j = static_cast<std::uint32_t>(j);
        p.k = (i == j ? 0.5 : 1.0) * kernel_reg(x_[i], x_[j], eps);
        p.plus = split_point(x_, x_[i] + x_[j]);
        p.minus = i == j ? split_point(x_, 0.0) : split_point(x_, x_[i] - x_[j]);
        p.z_plus = x_[i] + x_[j];
        pairs_.push_back(p);
      }
    }
  }

  const std::vector<double>& nodes() const { return x_; }
  const GridSpec& grid() const { return grid_; }
  double eps() const { return eps_; }

  /// Accumulates the flows for the weights g into out (which is reset).
  void flow(const std::vector<double>& g, Flow& out) const {
    const std::size_t n = x_.size();
    out.weights.assign(n, 0.0);
    out.condensate = 0.0;
    out.overflow_mass = 0.0;
    out.overflow_energy = 0.0;
    for (const Pair& p : pairs_) {
      const double gi = g[p.i], gj = g[p.j];
      if (gi == 0.0 || gj == 0.0) continue;
      const double r = gi * gj * p.k;
      out.weights[p.i] -= 2.0 * r;
      deposit(p.plus, r, p.z_plus, out);
      deposit(p.minus, r, 0.0, out);
    }
  }

  /// Largest per-node relative loss rate.
  double max_loss_rate(const std::vector<double>& g) const {
    std::vector<double> rate(x_.size(), 0.0);
    for (const Pair& p : pairs_) rate[p.i] += 2.0 * g[p.j] * p.k;
    return *std::max_element(rate.begin(), rate.end());
  }

 private:
  struct Pair {
    std::uint32_t i, j;
    double k;
    double z_plus;
    Split plus, minus;
  };

  static void deposit(const Split& s, double amount, double z, Flow& out) {
    if (s.overflow) {
      out.overflow_mass += amount;
      out.overflow_energy += amount * z;
      return;
    }
    if (s.lo < 0) {
      out.condensate += amount * s.f_lo;
    } else {
      out.weights[static_cast<std::size_t>(s.lo)] += amount * s.f_lo;
    }
    if (s.hi >= 0) out.weights[static_cast<std::size_t>(s.hi)] += amount * s.f_hi;
  }

  GridSpec grid_;
  double eps_;
  std::vector<double> x_;
  std::vector<Pair> pairs_;
};

/// Projects a measure onto the grid with the two-point split. Throws when the
/// support reaches beyond x_max.
inline SolverState project(const Measure& mu, const GridSpec& grid, double eps) {
  SolverState s;
  s.grid = grid;
  s.eps = eps;
  const auto x = grid.nodes();
  s.weights.assign(x.size(), 0.0);
  s.condensate = mu.condensate();
  for (const Atom& a : mu.atoms()) {
    if (a.position > grid.x_max) throw std::invalid_argument("initial support extends beyond x_max");
    const Split sp = split_point(x, a.position);
    if (sp.lo < 0) {
      s.condensate += a.weight * sp.f_lo;
    } else {
      s.weights[static_cast<std::size_t>(sp.lo)] += a.weight * sp.f_lo;
    }
    if (sp.hi >= 0) s.weights[static_cast<std::size_t>(sp.hi)] += a.weight * sp.f_hi;
  }
  return s;
}

inline Flow rhs(const SolverState& s, const PairTable& table) {
  Flow f;
  table.flow(s.weights, f);
  return f;
}

inline Flow rhs(const SolverState& s) { return rhs(s, PairTable(s.grid, s.eps)); }

struct StepInfo {
  double dt = 0.0;
  int halvings = 0;
};

/// One Heun step with dt = min(dt_max, cfl / max relative loss rate), halved
/// until both stages stay nonnegative. The step is also clipped so that it
/// does not pass t_stop.
inline StepInfo step(SolverState& s, const PairTable& table, double dt_max,
                     double t_stop = kInf, double cfl = 0.1) {
  if (!(dt_max > 0.0)) throw std::invalid_argument("step: dt_max must be > 0");
  if (!(cfl > 0.0)) throw std::invalid_argument("step: cfl must be > 0");
  StepInfo info;
  const double rate = table.max_loss_rate(s.weights);
  double dt = rate > 0.0 ? std::min(dt_max, cfl / rate) : dt_max;
  if (s.time + dt > t_stop) dt = t_stop - s.time;
  if (!(dt > 0.0)) return info;
  if (rate == 0.0) {
    s.time += dt;
    info.dt = dt;
    return info;
  }
  Flow k1, k2;
  table.flow(s.weights, k1);
  const std::size_t n = s.weights.size();
  std::vector<double> g1(n), g2(n);
  for (;;) {
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      g1[i] = s.weights[i] + dt * k1.weights[i];
      if (g1[i] < 0.0) ok = false;
    }
    if (ok) {
      table.flow(g1, k2);
      for (std::size_t i = 0; i < n; ++i) {
        g2[i] = s.weights[i] + 0.5 * dt * (k1.weights[i] + k2.weights[i]);
        if (g2[i] < 0.0) ok = false;
      }
    }
    if (ok) break;
    dt *= 0.5;
    ++info.halvings;
  }
  s.weights = g2;
  s.condensate += 0.5 * dt * (k1.condensate + k2.condensate);
  s.overflow_mass += 0.5 * dt * (k1.overflow_mass + k2.overflow_mass);
  s.overflow_energy += 0.5 * dt * (k1.overflow_energy + k2.overflow_energy);
  s.time += dt;
  info.dt = dt;
  return info;
}

inline StepInfo step(SolverState& s, double dt_max) {
  return step(s, PairTable(s.grid, s.eps), dt_max);
}

struct PdeSnapshot {
  double t = 0.0;
  Measure mu;
  double overflow_mass = 0.0;
  double overflow_energy = 0.0;
};

struct PdeRun {
  std::vector<PdeSnapshot> snapshots;
  SolverState final_state;
  std::size_t steps = 0;
  std::size_t halvings = 0;

  Trajectory trajectory() const {
    Trajectory t;
    t.reserve(snapshots.size());
    for (const auto& s : snapshots) t.push_back({s.t, s.mu});
    return t;
  }

  /// Snapshots with the overflow mass put back as one atom at 2 x_max. Test
  /// functions supported below x_max / 2 vanish there, and so does every
  /// second difference involving that atom, so only constants see it.
  Trajectory trajectory_with_ledger() const {
    Trajectory t;
    t.reserve(snapshots.size());
    const double far = 2.0 * final_state.grid.x_max;
    for (const auto& s : snapshots) {
      if (s.overflow_mass <= 0.0) {
        t.push_back({s.t, s.mu});
        continue;
      }
      std::vector<Atom> atoms(s.mu.atoms().begin(), s.mu.atoms().end());
      atoms.push_back({far, s.overflow_mass});
      t.push_back({s.t, Measure(s.mu.condensate(), std::move(atoms))});
    }
    return t;
  }
};

struct EvolveOptions {
  double dt_max = 0.01;
  double cfl = 0.1;
  /// Optional early stop, checked at every snapshot.
  std::function<bool(const SolverState&)> stop;
};

/// Evolves from t = 0 and records snapshots at multiples of cadence (plus the
/// final time).
inline PdeRun evolve(const Measure& initial, const GridSpec& grid, double eps, double t_end,
                     double cadence, const EvolveOptions& opt = {}) {
  if (!(t_end >= 0.0) || !(cadence > 0.0)) throw std::invalid_argument("evolve: bad t_end or cadence");
  PdeRun run;
  SolverState s = project(initial, grid, eps);
  const PairTable table(grid, eps);
  auto record = [&]() {
    run.snapshots.push_back({s.time, s.measure(), s.overflow_mass, s.overflow_energy});
  };
  record();
  const auto n_out = static_cast<std::size_t>(std::ceil(t_end / cadence - 1e-9));
  for (std::size_t k = 1; k <= n_out; ++k) {
    const double target = std::min(t_end, double(k) * cadence);
    while (s.time < target) {
      const StepInfo info = step(s, table, opt.dt_max, target, opt.cfl);
      ++run.steps;
      run.halvings += static_cast<std::size_t>(info.halvings);
      if (info.dt == 0.0) break;
      if (target - s.time <= 1e-12 * target) s.time = target;
    }
    record();
    if (opt.stop && opt.stop(s)) break;
  }
  run.final_state = std::move(s);
  return run;
}

}  // namespace wtk
