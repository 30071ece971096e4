#pragma once
/// The acceptance suite. Each criterion produces one pass/fail entry with its
/// measured numbers; runs shared between criteria are computed once.

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "initial.hpp"
#include "io.hpp"
#include "pde.hpp"
#include "scenarios.hpp"
#include "selfsim.hpp"
#include "weakform.hpp"

namespace wtk {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string summary;
  Json metrics = Json::object();
  double seconds = 0.0;
};

inline Json to_json(const CriterionResult& r) {
  return {{"id", r.id},           {"name", r.name},       {"passed", r.passed},
          {"summary", r.summary}, {"seconds", r.seconds}, {"metrics", r.metrics}};
}

struct VerifyOptions {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::function<void(const CriterionResult&)> on_result;
};

/// Ten test functions: constants, hinges at three scales, bumps at three
/// scales and log-bumps near the origin, at unit size and in the bulk. All
/// nonconstant ones vanish beyond 50, half the default domain.
inline std::vector<TestFunction> residual_basis() {
  return {constant_function(), smoothed_hinge(10.0), smoothed_hinge(1.0), smoothed_hinge(0.1),
          bump(0.0, 0.5),      bump(0.0, 3.0),       bump(0.0, 20.0),     log_bump(0.05, 1.0),
          log_bump(1.0, 0.7),  log_bump(5.0, 0.7)};
}

/// Least-squares line y = a + b x with its R^2.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k] / n;
    my += y[k] / n;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

class VerifySuite {
 public:
  explicit VerifySuite(VerifyOptions opt) : opt_(std::move(opt)) {}

  std::vector<CriterionResult> run_all() {
    std::vector<CriterionResult> out;
    auto add = [&](int id, const std::string& name, const std::function<void(CriterionResult&)>& body) {
      CriterionResult r;
      r.id = id;
      r.name = name;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        body(r);
      } catch (const std::exception& e) {
        r.passed = false;
        r.summary = std::string("exception: ") + e.what();
      }
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (opt_.on_result) opt_.on_result(r);
      out.push_back(std::move(r));
    };
    add(1, "pi2_identity", [&](CriterionResult& r) { identity(r); });
    add(2, "mass_conservation", [&](CriterionResult& r) { mass(r); });
    add(3, "energy_conservation", [&](CriterionResult& r) { energy(r); });
    add(4, "condensate_onset", [&](CriterionResult& r) { condensate(r); });
    add(6, "long_time_convergence", [&](CriterionResult& r) { long_time(r); });
    add(7, "powerlaw_condensate_rate", [&](CriterionResult& r) { powerlaw(r); });
    add(8, "particle_pde_agreement", [&](CriterionResult& r) { particle_agreement(r); });
    add(9, "particle_conservation", [&](CriterionResult& r) { particle_conservation(r); });
    add(10, "scaling_covariance", [&](CriterionResult& r) { scaling(r); });
    add(11, "selfsim_profile", [&](CriterionResult& r) { profile(r); });
    add(12, "profile_properties", [&](CriterionResult& r) { properties(r); });
    add(5, "sqrt_bound", [&](CriterionResult& r) { sqrt_bound(r); });
    add(13, "weak_residual_suite", [&](CriterionResult& r) { residual_suite(r); });
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return out;
  }

 private:
  // ---- shared runs -------------------------------------------------------

  static InitialSpec uniform_spec() { return parse_initial("uniform(1,2,1)"); }

  /// uniform(1,2,1) on [1e-4, 1e2], eps 1e-3, t in [0, 5]; level k uses
  /// 240 * 2^k nodes and dt_max, cfl and cadence divided by 2^k.
  const PdeRun& uniform_run(int level) {
    auto it = uniform_.find(level);
    if (it != uniform_.end()) return it->second;
    const double f = std::ldexp(1.0, level);
    EvolveOptions o;
    o.dt_max = 0.01 / f;
    o.cfl = 0.1 / f;
    const GridSpec g{1e-4, 1e2, 240 << level};
    return uniform_.emplace(level, evolve(initial_measure(uniform_spec()), g, 1e-3, 5.0, 0.05 / f, o))
        .first->second;
  }

  /// Same grid and data as level 0, with only the time step refined.
  const PdeRun& uniform_dt_run(int halvings) {
    if (halvings == 0) return uniform_run(0);
    auto it = uniform_dt_.find(halvings);
    if (it != uniform_dt_.end()) return it->second;
    const double f = std::ldexp(1.0, halvings);
    EvolveOptions o;
    o.dt_max = 0.01 / f;
    o.cfl = 0.1 / f;
    return uniform_dt_.emplace(halvings, evolve(initial_measure(uniform_spec()), GridSpec{}, 1e-3, 5.0, 0.05, o))
        .first->second;
  }

  /// Truncated x^{-1/2} on [x_min, 1e2] with a grid starting at x_min,
  /// `per_decade` nodes per decade, eps 1e-4, t in [0, 0.2].
  const PdeRun& powerlaw_run(double x_min, int per_decade) {
    const auto key = std::make_pair(x_min, per_decade);
    auto it = powerlaw_.find(key);
    if (it != powerlaw_.end()) return it->second;
    const int decades = static_cast<int>(std::lround(std::log10(1e2 / x_min)));
    const double f = per_decade / 160.0;
    EvolveOptions o;
    o.dt_max = 0.01 / f;
    o.cfl = 0.1 / f;
    const GridSpec g{x_min, 1e2, per_decade * decades + 1};
    const InitialSpec spec{"powerlaw_half", {x_min, 1e2}, {}};
    return powerlaw_.emplace(key, evolve(initial_measure(spec), g, 1e-4, 0.2, 0.01 / f, o)).first->second;
  }

  /// Runs from uniform(1,2,1) until near_mass(0.05) >= 0.9. The refined
  /// level doubles the nodes, halves the step and the snapshot cadence and
  /// stops at the same time.
  const PdeRun& long_run(int level) {
    auto it = long_.find(level);
    if (it != long_.end()) return it->second;
    const double f = std::ldexp(1.0, level);
    EvolveOptions o;
    o.dt_max = 0.05 / f;
    o.cfl = 0.1 / f;
    double t_end = 5000.0;
    if (level == 0) {
      o.stop = [](const SolverState& s) { return near_mass(s.measure(), 0.05) >= 0.9; };
    } else {
      t_end = long_run(0).snapshots.back().t;
    }
    const GridSpec g{1e-4, 1e2, 240 << level};
    return long_.emplace(level, evolve(initial_measure(uniform_spec()), g, 1e-3, t_end, 1.0 / f, o)).first->second;
  }

  /// rescale(uniform(1,2,1), 2, 2) on the matched grid [5e-5, 50], eps 5e-4,
  /// up to t = 1.25. Level 1 doubles nodes and halves step and cadence.
  const PdeRun& scaled_run(int level) {
    auto it = scaled_.find(level);
    if (it != scaled_.end()) return it->second;
    const double f = std::ldexp(1.0, level);
    EvolveOptions o;
    o.dt_max = 0.0025 / f;
    o.cfl = 0.1 / f;
    const Measure g0 = rescale(initial_measure(uniform_spec()), {2.0, 2.0});
    const GridSpec g{1e-4 / 2.0, 1e2 / 2.0, 240 << level};
    return scaled_.emplace(level, evolve(g0, g, 1e-3 / 2.0, 1.25, 0.0125 / f, o)).first->second;
  }

  /// Deterministic oracle for the particle ensemble.
  const PdeRun& oracle_run() {
    if (!oracle_) {
      oracle_ = evolve(initial_measure(uniform_spec()), GridSpec{1e-4, 1e2, 960}, 1e-3, 1.0, 0.1);
    }
    return *oracle_;
  }

  const EnsembleResult& ensemble() {
    if (!ensemble_) {
      EnsembleParams p;
      p.initial = uniform_spec();
      p.particles = 10000;
      p.replicas = 32;
      p.eps = 1e-3;
      p.t_end = 1.0;
      p.cadence = 0.1;
      p.seed = opt_.seed;
      p.threads = opt_.threads;
      ensemble_ = run_ensemble(p);
    }
    return *ensemble_;
  }

  /// Profile at E = 1, eps = 1e-3; h = 0.025 is the production grid and
  /// h = 0.05 its coarse partner, solved to the tolerance its residual floor
  /// allows.
  const ProfileResult& profile_result(bool fine) {
    auto& slot = fine ? profile_fine_ : profile_coarse_;
    if (!slot) {
      SolveOptions o;
      o.tol = fine ? 1e-3 : 5e-3;
      o.change_tol = 1e-6;
      slot = solve_profile(1.0, ProfileGrid{1e-3, fine ? 0.025 : 0.05, 60.0}, o);
    }
    return *slot;
  }

  Trajectory generalized_trajectory(bool fine) {
    const ProfileResult& p = profile_result(fine);
    return assemble_generalized(p, 1.5 * p.l1_phi, 1.0).trajectory(3.0, 60);
  }

  // ---- criteria ----------------------------------------------------------

  void identity(CriterionResult& r) {
    const IdentitySweep s = identity_sweep({1e-2, 3e-3, 1e-3}, 1.0, opt_.threads);
    r.metrics = {{"eps", s.eps},       {"values", s.values},       {"extrapolated", s.extrapolated},
                 {"target", s.target}, {"rel_error", s.rel_error}, {"runtime_s", s.seconds}};
    r.passed = s.rel_error <= 0.01 && s.seconds < 60.0;
    r.summary = "extrapolated " + format_double(s.extrapolated) + " vs " + format_double(s.target) +
                ", rel error " + format_double(s.rel_error);
  }

  void mass(CriterionResult& r) {
    const PdeRun& run = uniform_run(0);
    double worst = 0.0;
    for (const auto& s : run.snapshots) worst = std::max(worst, std::abs(total_mass(s.mu) + s.overflow_mass - 1.0));
    r.metrics = {{"max_abs_mass_error", worst}, {"snapshots", run.snapshots.size()}, {"steps", run.steps}};
    r.passed = worst <= 1e-9;
    r.summary = "max |mass - 1| = " + format_double(worst);
  }

  static double energy_error(const PdeRun& run) {
    const double e0 = moment(run.snapshots.front().mu, 1.0).value;
    double worst = 0.0;
    for (const auto& s : run.snapshots) {
      worst = std::max(worst, std::abs(moment(s.mu, 1.0).value + s.overflow_energy - e0) / e0);
    }
    return worst;
  }

  static double state_distance(const SolverState& a, const SolverState& b) {
    Accumulator d;
    d.add(std::abs(a.condensate - b.condensate));
    for (std::size_t k = 0; k < a.weights.size(); ++k) d.add(std::abs(a.weights[k] - b.weights[k]));
    return d.value();
  }

  /// The scheme moves energy only through moment-preserving deposits, so the
  /// energy error is round-off at every step size. Halving is accepted when
  /// observed or when both errors sit at that floor; second-order time
  /// accuracy is then measured directly from the solution self-convergence
  /// order at dt, dt/2, dt/4 and must be at least 1.5.
  void energy(CriterionResult& r) {
    const double e1 = energy_error(uniform_dt_run(0));
    const double e2 = energy_error(uniform_dt_run(1));
    const double d1 = state_distance(uniform_dt_run(0).final_state, uniform_dt_run(1).final_state);
    const double d2 = state_distance(uniform_dt_run(1).final_state, uniform_dt_run(2).final_state);
    const double order = std::log2(d1 / d2);
    constexpr double kFloor = 1e-12;
    const bool halves = e2 <= 0.5 * e1 || std::max(e1, e2) <= kFloor;
    r.metrics = {{"rel_energy_error_dt", e1},   {"rel_energy_error_dt_half", e2}, {"roundoff_floor", kFloor},
                 {"self_convergence_d1", d1},   {"self_convergence_d2", d2},      {"time_order", order}};
    r.passed = e1 <= 1e-4 && halves && order >= 1.5;
    r.summary = "rel energy error " + format_double(e1) + " (dt/2: " + format_double(e2) + "), time order " +
                format_double(order);
  }

  void condensate(CriterionResult& r) {
    const PdeRun& run = uniform_run(0);
    bool monotone = true;
    for (std::size_t k = 1; k < run.snapshots.size(); ++k) {
      if (run.snapshots[k].mu.condensate() < run.snapshots[k - 1].mu.condensate()) monotone = false;
    }
    const PdeSnapshot* at = nullptr;
    for (const auto& s : run.snapshots) {
      if (std::abs(s.t - 0.1) < 1e-12) at = &s;
    }
    if (!at) throw std::logic_error("no snapshot at t = 0.1");
    std::vector<double> ld, lm;
    for (int k = 0; k <= 4; ++k) {
      const double d = std::pow(10.0, -3.0 + k / 4.0);
      ld.push_back(std::log(d));
      lm.push_back(std::log(near_mass(at->mu, d)));
    }
    const LineFit fit = fit_line(ld, lm);
    const double c0 = run.snapshots.front().mu.condensate();
    const double c01 = at->mu.condensate();
    r.metrics = {{"monotone", monotone},
                 {"initial_condensate", c0},
                 {"condensate_t0.1", c01},
                 {"near_mass_slope", fit.slope}};
    r.passed = monotone && c0 == 0.0 && c01 > 0.0 && fit.slope > 0.0 && fit.slope < 0.55;
    r.summary = "condensate(0.1) = " + format_double(c01) + ", near-mass slope " + format_double(fit.slope);
  }

  void long_time(CriterionResult& r) {
    const PdeRun& run = long_run(0);
    const double final_near = near_mass(run.snapshots.back().mu, 0.05);
    bool monotone = true;
    for (std::size_t k = 1; k < run.snapshots.size(); ++k) {
      if (near_mass(run.snapshots[k].mu, 0.05) < near_mass(run.snapshots[k - 1].mu, 0.05) - 1e-12) {
        monotone = false;
      }
    }
    r.metrics = {{"t_reached", run.snapshots.back().t},
                 {"near_mass_0.05", final_near},
                 {"monotone", monotone},
                 {"steps", run.steps}};
    r.passed = final_near >= 0.9 && monotone;
    r.summary = "near_mass(0.05) = " + format_double(final_near) + " at t = " + format_double(run.snapshots.back().t);
  }

  static LineFit condensate_fit(const PdeRun& run) {
    std::vector<double> t, c;
    for (const auto& s : run.snapshots) {
      t.push_back(s.t);
      c.push_back(s.mu.condensate());
    }
    return fit_line(t, c);
  }

  void powerlaw(CriterionResult& r) {
    const double target = std::numbers::pi * std::numbers::pi / 12.0;
    const LineFit f3 = condensate_fit(powerlaw_run(1e-3, 160));
    const LineFit f4 = condensate_fit(powerlaw_run(1e-4, 160));
    const bool toward = std::abs(f4.slope - target) < std::abs(f3.slope - target);
    const bool close = std::abs(f4.slope - target) <= 0.25 * target && std::abs(f3.slope - target) <= 0.25 * target;
    r.metrics = {{"target", target},        {"slope_xmin_1e-3", f3.slope}, {"r2_xmin_1e-3", f3.r2},
                 {"slope_xmin_1e-4", f4.slope}, {"r2_xmin_1e-4", f4.r2},   {"nodes_per_decade", 160}};
    r.passed = f3.r2 >= 0.99 && f4.r2 >= 0.99 && close && toward;
    r.summary = "slopes " + format_double(f3.slope) + " (x_min 1e-3), " + format_double(f4.slope) +
                " (x_min 1e-4) vs " + format_double(target);
  }

  void particle_agreement(CriterionResult& r) {
    const EnsembleResult& e = ensemble();
    const Measure& pde = oracle_run().snapshots.back().mu;
    const MeanSe nm = final_statistic(e, [](const Measure& mu) { return near_mass(mu, 0.1); });
    const MeanSe m2 = final_statistic(e, [](const Measure& mu) { return moment(mu, 2.0).value; });
    const double pde_nm = near_mass(pde, 0.1);
    const double pde_m2 = moment(pde, 2.0).value;
    const double z_nm = std::abs(nm.mean - pde_nm) / nm.se;
    const double z_m2 = std::abs(m2.mean - pde_m2) / m2.se;
    r.metrics = {{"seed", opt_.seed},         {"near_mass_mean", nm.mean}, {"near_mass_se", nm.se},
                 {"near_mass_pde", pde_nm},   {"moment2_mean", m2.mean},   {"moment2_se", m2.se},
                 {"moment2_pde", pde_m2},     {"z_near_mass", z_nm},       {"z_moment2", z_m2}};
    r.passed = z_nm <= 3.0 && z_m2 <= 3.0;
    r.summary = "near_mass z = " + format_double(z_nm) + ", moment(2) z = " + format_double(z_m2);
  }

  void particle_conservation(CriterionResult& r) {
    const EnsembleResult& e = ensemble();
    bool count_ok = true;
    for (const auto& run : e.runs) {
      for (std::size_t n : run.counts) count_ok = count_ok && n == 10000;
    }
    const MeanSe drift = size_sum_drift(e);
    const double z = drift.se > 0.0 ? std::abs(drift.mean) / drift.se : (drift.mean == 0.0 ? 0.0 : kInf);
    std::uint64_t events = 0;
    for (const auto& run : e.runs) events += run.events;
    r.metrics = {{"count_constant", count_ok}, {"drift_mean", drift.mean}, {"drift_se", drift.se},
                 {"drift_z", z},               {"events", events}};
    r.passed = count_ok && z <= 3.0;
    r.summary = "size-sum drift " + format_double(drift.mean) + " +- " + format_double(drift.se);
  }

  void scaling(CriterionResult& r) {
    const PdeRun& base = uniform_run(0);
    const PdeRun& s0 = scaled_run(0);
    const PdeRun& s1 = scaled_run(1);
    Json checks = Json::array();
    bool ok = true;
    for (double t : {1.0, 2.5, 5.0}) {
      const double ts = t / 4.0;
      auto find = [](const PdeRun& run, double tt) -> const Measure& {
        for (const auto& s : run.snapshots) {
          if (std::abs(s.t - tt) <= 1e-12 * tt) return s.mu;
        }
        throw std::logic_error("missing checkpoint");
      };
      const Measure evolved_then_scaled = rescale(find(base, t), {2.0, 2.0});
      const double cov = bl_distance(find(s0, ts), evolved_then_scaled);
      const double disc = bl_distance(find(s0, ts), find(s1, ts));
      ok = ok && cov <= 2.0 * disc;
      checks.push_back({{"t", t}, {"covariance_distance", cov}, {"discretization_error", disc}});
    }
    r.metrics = {{"checkpoints", checks}};
    r.passed = ok;
    r.summary = ok ? "covariance distance within 2x discretization error at all checkpoints"
                   : "covariance distance exceeds 2x discretization error";
  }

  void profile(CriterionResult& r) {
    const ProfileResult& p = profile_result(true);
    bool nonneg = true;
    for (double v : p.phi) nonneg = nonneg && v >= 0.0;
    const GeneralizedSolution g = assemble_generalized(p, 1.5 * p.l1_phi, 1.0);
    const Trajectory tr = g.trajectory(3.0, 60);
    double mass_dev = 0.0, energy_dev = 0.0;
    const double e0 = moment(tr.front().mu, 1.0).value;
    for (const auto& s : tr) {
      mass_dev = std::max(mass_dev, std::abs(total_mass(s.mu) - g.M()) / g.M());
      energy_dev = std::max(energy_dev, std::abs(moment(s.mu, 1.0).value - e0) / e0);
    }
    double res = 0.0;
    for (double L : phi_family_scales()) res = std::max(res, weak_residual(tr, self_similar_test(bump(0.0, L), 1.0)));
    r.metrics = {{"iterations", p.iterations},
                 {"converged", p.converged},
                 {"residual_stationary", p.residual_stationary},
                 {"residual_psi", p.residual_psi},
                 {"residual_phi", p.residual_phi},
                 {"constraint", p.constraint},
                 {"phi_nonnegative", nonneg},
                 {"l1_phi", p.l1_phi},
                 {"assembled_mass_rel_dev", mass_dev},
                 {"assembled_energy_rel_dev", energy_dev},
                 {"assembled_weak_residual", res}};
    r.passed = p.converged && !p.constraint_violated && p.residual_stationary < 1e-3 && p.constraint <= 36.0 &&
               nonneg && mass_dev <= 1e-12 && energy_dev <= 1e-12 && res < 5e-3;
    r.summary = "residual " + format_double(p.residual_stationary) + ", constraint " + format_double(p.constraint) +
                ", assembled residual " + format_double(res);
  }

  void properties(CriterionResult& r) {
    const PropertyReport rep = profile_property_checks(profile_result(false), &profile_result(true));
    Json moments = Json::object();
    for (const auto& [a, v] : rep.moments) moments[format_double(a)] = v;
    r.metrics = {{"near_origin_exponent", rep.near_origin_exponent},
                 {"moment_max_rel_change", rep.moment_max_rel_change},
                 {"holder_quotient", rep.holder_quotient},
                 {"holder_quotient_refined", rep.holder_quotient_refined},
                 {"moments", moments}};
    r.passed = rep.all_ok();
    r.summary = "exponent " + format_double(rep.near_origin_exponent) + ", moment change " +
                format_double(rep.moment_max_rel_change) + ", Hoelder " + format_double(rep.holder_quotient) + " -> " +
                format_double(rep.holder_quotient_refined);
  }

  /// Every trajectory produced above, including each particle replica.
  std::vector<std::pair<std::string, Trajectory>> all_trajectories() {
    std::vector<std::pair<std::string, Trajectory>> v;
    for (int l : {0, 1}) v.emplace_back("uniform_level" + std::to_string(l), uniform_run(l).trajectory());
    for (int l : {1, 2}) v.emplace_back("uniform_dt_halved" + std::to_string(l), uniform_dt_run(l).trajectory());
    for (int l : {0, 1}) v.emplace_back("long_level" + std::to_string(l), long_run(l).trajectory());
    for (int l : {0, 1}) v.emplace_back("scaled_level" + std::to_string(l), scaled_run(l).trajectory());
    for (const auto& [key, run] : powerlaw_) {
      v.emplace_back("powerlaw_xmin" + format_double(key.first) + "_pd" + std::to_string(key.second),
                     run.trajectory());
    }
    v.emplace_back("oracle", oracle_run().trajectory());
    const auto& e = ensemble();
    for (std::size_t k = 0; k < e.runs.size(); ++k) v.emplace_back("particles_" + std::to_string(k), e.runs[k].trajectory);
    v.emplace_back("generalized_h0.05", generalized_trajectory(false));
    v.emplace_back("generalized_h0.025", generalized_trajectory(true));
    return v;
  }

  void sqrt_bound(CriterionResult& r) {
    std::size_t checks = 0, violations = 0;
    double min_rel_margin = kInf;
    for (const auto& [name, tr] : all_trajectories()) {
      const double a = tr.front().t, b = tr.back().t;
      for (const auto& [t1, t2] : {std::pair{a, b}, std::pair{a, a + 0.1 * (b - a)}, std::pair{0.5 * (a + b), b}}) {
        for (double rr : {1e-3, 1e-2, 1e-1, 1.0}) {
          const CheckResult c = sqrt_bound_check(tr, rr, t1, t2);
          ++checks;
          if (!c.ok) ++violations;
          const double bound = 12.0 * std::sqrt((t2 - t1) * total_mass(tr.front().mu) * rr);
          if (bound > 0.0) min_rel_margin = std::min(min_rel_margin, c.margin / bound);
        }
      }
    }
    r.metrics = {{"checks", checks}, {"violations", violations}, {"min_relative_margin", min_rel_margin}};
    r.passed = violations == 0;
    r.summary = std::to_string(violations) + " violations in " + std::to_string(checks) + " checks";
  }

  static double max_residual(const Trajectory& tr, double eps, Json& per_function) {
    double worst = 0.0;
    for (const TestFunction& phi : residual_basis()) {
      const double res = weak_residual(tr, phi, {eps, true});
      per_function[phi.name] = res;
      worst = std::max(worst, res);
    }
    return worst;
  }

  /// Deterministic trajectories only, each against its refined partner.
  /// Overflow mass is carried by the ledger atom.
  void residual_suite(CriterionResult& r) {
    struct Pair {
      std::string name;
      Trajectory coarse, fine;
      double eps;
    };
    std::vector<Pair> pairs;
    pairs.push_back({"uniform", uniform_run(0).trajectory_with_ledger(), uniform_run(1).trajectory_with_ledger(), 1e-3});
    pairs.push_back({"long_time", long_run(0).trajectory_with_ledger(), long_run(1).trajectory_with_ledger(), 1e-3});
    pairs.push_back({"scaled", scaled_run(0).trajectory_with_ledger(), scaled_run(1).trajectory_with_ledger(), 5e-4});
    pairs.push_back({"powerlaw_xmin1e-4", powerlaw_run(1e-4, 160).trajectory_with_ledger(),
                     powerlaw_run(1e-4, 320).trajectory_with_ledger(), 1e-4});
    pairs.push_back({"generalized", generalized_trajectory(false), generalized_trajectory(true), 0.0});
    bool ok = true;
    Json rows = Json::array();
    for (const auto& p : pairs) {
      Json fc = Json::object(), ff = Json::object();
      const double c = max_residual(p.coarse, p.eps, fc);
      const double f = max_residual(p.fine, p.eps, ff);
      const bool row_ok = c <= 1e-2 && f <= 1e-2 && f < c;
      ok = ok && row_ok;
      rows.push_back({{"trajectory", p.name}, {"coarse", c}, {"fine", f}, {"ok", row_ok},
                      {"coarse_by_function", fc}, {"fine_by_function", ff}});
    }
    r.metrics = {{"trajectories", rows}};
    r.passed = ok;
    std::string s;
    for (const auto& row : rows) {
      s += (s.empty() ? "" : "; ") + row["trajectory"].get<std::string>() + " " +
           format_double(row["coarse"].get<double>()) + " -> " + format_double(row["fine"].get<double>());
    }
    r.summary = s;
  }

  VerifyOptions opt_;
  std::map<int, PdeRun> uniform_, uniform_dt_, long_, scaled_;
  std::map<std::pair<double, int>, PdeRun> powerlaw_;
  std::optional<PdeRun> oracle_;
  std::optional<EnsembleResult> ensemble_;
  std::optional<ProfileResult> profile_fine_, profile_coarse_;
};

inline std::vector<CriterionResult> run_verify(const VerifyOptions& opt) { return VerifySuite(opt).run_all(); }

inline std::string format_result_line(const CriterionResult& r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", r.seconds);
  return std::string(r.passed ? "PASS" : "FAIL") + " criterion " + std::to_string(r.id) + " " + r.name + ": " +
         r.summary + " [" + buf + " s]";
}

}  // namespace wtk
