#pragma once
/// Scenario runner: turns a validated RunConfig into files on disk.

#include <filesystem>
#include <iostream>
#include <string>

#include "config.hpp"
#include "initial.hpp"
#include "io.hpp"
#include "pde.hpp"
#include "scenarios.hpp"
#include "selfsim.hpp"
#include "verify.hpp"

namespace wtk {

namespace fs = std::filesystem;

inline Json grid_json(const RunConfig& c) {
  return {{"x_min", c.x_min}, {"x_max", c.x_max}, {"n_nodes", c.n_nodes}};
}

inline int run_evolve_pde(const RunConfig& c, const fs::path& out) {
  const InitialSpec spec = parse_initial(c.initial);
  const GridSpec grid{c.x_min, c.x_max, c.n_nodes};
  EvolveOptions o;
  o.dt_max = c.dt_max;
  o.cfl = c.cfl;
  const PdeRun run = evolve(initial_measure(spec), grid, c.eps, c.t_end, c.cadence, o);
  write_trajectory_csv(out / "trajectory.csv", pde_rows(run, c.delta, c.R));
  write_snapshot_dump(out / "profile.csv", run.trajectory());
  const SolverState& s = run.final_state;
  const double m0 = total_mass(run.snapshots.front().mu);
  const double e0 = moment(run.snapshots.front().mu, 1.0).value;
  write_summary(out / "summary.json", c.scenario,
                {{"grid", grid_json(c)},
                 {"eps", c.eps},
                 {"t_end", s.time},
                 {"steps", run.steps},
                 {"halvings", run.halvings},
                 {"initial_mass", m0},
                 {"final_mass_total", s.mass_total()},
                 {"mass_error", s.mass_total() - m0},
                 {"initial_energy", e0},
                 {"final_energy_with_overflow", s.energy_active() + s.overflow_energy},
                 {"condensate", s.condensate},
                 {"overflow_mass", s.overflow_mass},
                 {"overflow_energy", s.overflow_energy}});
  return 0;
}

inline int run_evolve_particles(const RunConfig& c, const fs::path& out) {
  EnsembleParams p;
  p.initial = parse_initial(c.initial);
  p.particles = static_cast<std::size_t>(c.particles);
  p.replicas = static_cast<std::size_t>(c.replicas);
  p.eps = c.eps;
  p.t_end = c.t_end;
  p.cadence = c.cadence;
  p.absorb_threshold = c.absorb_threshold;
  p.seed = c.seed;
  p.threads = resolve_threads(c.threads);
  p.log_first_replica = true;
  const EnsembleResult e = run_ensemble(p);
  write_trajectory_csv(out / "trajectory.csv", ensemble_mean_rows(e, c.delta, c.R));
  write_text(out / "events.log", e.events_replica0);
  write_snapshot_dump(out / "profile.csv", e.runs.front().trajectory);
  const MeanSe nm = final_statistic(e, [&](const Measure& mu) { return near_mass(mu, c.delta); });
  const MeanSe m2 = final_statistic(e, [](const Measure& mu) { return moment(mu, 2.0).value; });
  const MeanSe cond = final_statistic(e, [](const Measure& mu) { return mu.condensate(); });
  const MeanSe drift = size_sum_drift(e);
  std::uint64_t events = 0;
  for (const auto& r : e.runs) events += r.events;
  write_summary(out / "summary.json", c.scenario,
                {{"particles", c.particles},
                 {"replicas", c.replicas},
                 {"seed", c.seed},
                 {"eps", c.eps},
                 {"t_end", c.t_end},
                 {"events", events},
                 {"near_mass_delta", {{"mean", nm.mean}, {"se", nm.se}}},
                 {"moment2", {{"mean", m2.mean}, {"se", m2.se}}},
                 {"condensate", {{"mean", cond.mean}, {"se", cond.se}}},
                 {"size_sum_rel_drift", {{"mean", drift.mean}, {"se", drift.se}}}});
  return 0;
}

inline ProfileResult solve_from_config(const RunConfig& c) {
  SolveOptions o;
  o.tol = c.tol;
  o.change_tol = c.change_tol;
  o.max_iterations = static_cast<std::size_t>(c.max_iterations);
  return solve_profile(c.energy, ProfileGrid{c.eps, c.profile_h, c.profile_x_max}, o);
}

inline Json profile_json(const ProfileResult& r) {
  Json moments = Json::object();
  for (const auto& [a, v] : r.moments) moments[format_double(a)] = v;
  return {{"E", r.psi.E},
          {"eps", r.psi.eps},
          {"l1_phi", r.l1_phi},
          {"residual_stationary", r.residual_stationary},
          {"residual_psi", r.residual_psi},
          {"residual_psi_refined", r.residual_psi_refined},
          {"residual_phi", r.residual_phi},
          {"constraint", r.constraint},
          {"constraint_bound", 36.0 * r.psi.E * r.psi.E},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"constraint_violated", r.constraint_violated},
          {"l1_change_rate", r.l1_change_rate},
          {"moments", moments}};
}

inline void write_profile_csv(const fs::path& path, const ProfileResult& r) {
  auto os = open_output(path);
  os << "node,x,psi,phi\n";
  for (std::size_t k = 0; k < r.psi.x.size(); ++k) {
    os << k << ',' << format_double(r.psi.x[k]) << ',' << format_double(r.psi.psi[k]) << ','
       << format_double(r.phi[k]) << '\n';
  }
}

inline int run_selfsim_profile(const RunConfig& c, const fs::path& out) {
  const ProfileResult r = solve_from_config(c);
  write_profile_csv(out / "profile.csv", r);
  write_summary(out / "summary.json", c.scenario, profile_json(r));
  if (r.constraint_violated) {
    std::cerr << "profile constraint exceeded 36 E^2 after " << r.iterations << " iterations\n";
    return 1;
  }
  return r.converged ? 0 : 1;
}

inline int run_assemble_selfsim(const RunConfig& c, const fs::path& out) {
  const ProfileResult r = solve_from_config(c);
  const double M = c.M > 0.0 ? c.M : 1.5 * r.l1_phi / std::sqrt(c.t0);
  const GeneralizedSolution g = assemble_generalized(r, M, c.t0);
  const auto n = static_cast<std::size_t>(std::ceil(c.t_end / c.cadence - 1e-9));
  const Trajectory tr = g.trajectory(c.t_end, n);
  write_profile_csv(out / "profile.csv", r);
  write_trajectory_csv(out / "trajectory.csv", trajectory_rows(tr, c.delta, c.R));
  double res = 0.0;
  for (double L : phi_family_scales()) res = std::max(res, weak_residual(tr, self_similar_test(bump(0.0, L), c.t0)));
  Json body = profile_json(r);
  body["M"] = M;
  body["t0"] = c.t0;
  body["weak_residual"] = res;
  write_summary(out / "summary.json", c.scenario, body);
  return 0;
}

inline int run_identity_check(const RunConfig& c, const fs::path& out) {
  const IdentitySweep s = identity_sweep(c.eps_ladder, c.phi_radius, resolve_threads(c.threads));
  write_summary(out / "summary.json", c.scenario,
                {{"test_function", "bump(0," + format_double(c.phi_radius) + ")"},
                 {"eps", s.eps},
                 {"values", s.values},
                 {"error_estimates", s.error_estimates},
                 {"extrapolated", s.extrapolated},
                 {"target", s.target},
                 {"rel_error", s.rel_error}});
  std::cout << "extrapolated " << format_double(s.extrapolated) << " target " << format_double(s.target)
            << " rel_error " << format_double(s.rel_error) << '\n';
  return 0;
}

inline int run_verify_scenario(const RunConfig& c, const fs::path& out) {
  VerifyOptions o;
  o.seed = c.seed;
  o.threads = resolve_threads(c.threads);
  o.on_result = [](const CriterionResult& r) { std::cout << format_result_line(r) << std::endl; };
  const auto results = run_verify(o);
  Json list = Json::array();
  bool all = true;
  for (const auto& r : results) {
    list.push_back(to_json(r));
    all = all && r.passed;
  }
  write_text(out / "verify.json", Json{{"passed", all}, {"criteria", list}}.dump(2) + "\n");
  return all ? 0 : 1;
}

/// Runs the configured scenario into c.out and echoes the effective config
/// there. Returns the process exit status.
inline int run(const RunConfig& c) {
  const fs::path out(c.out);
  fs::create_directories(out);
  write_text(out / "effective_config.txt", echo_config(c));
  if (c.scenario == "evolve-pde") return run_evolve_pde(c, out);
  if (c.scenario == "evolve-particles") return run_evolve_particles(c, out);
  if (c.scenario == "selfsim-profile") return run_selfsim_profile(c, out);
  if (c.scenario == "assemble-selfsim") return run_assemble_selfsim(c, out);
  if (c.scenario == "identity-check") return run_identity_check(c, out);
  if (c.scenario == "verify") return run_verify_scenario(c, out);
  throw std::invalid_argument("unknown scenario '" + c.scenario + "'");
}

}  // namespace wtk
