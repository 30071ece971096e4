#pragma once
/// Building blocks shared by the CLI scenarios and the verification suite:
/// a small worker pool, particle ensembles and the identity sweep.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>
#include <vector>

#include "initial.hpp"
#include "io.hpp"
#include "kernel.hpp"
#include "particle.hpp"
#include "weakform.hpp"

namespace wtk {

inline unsigned resolve_threads(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs f(0..n-1) on up to `threads` workers. Each index writes only its own
/// result slot, so the outcome does not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  const unsigned w = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (w <= 1) {
    for (std::size_t k = 0; k < n; ++k) f(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) {
        try {
          f(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  MeanSe r;
  if (v.empty()) return r;
  Accumulator s;
  for (double x : v) s.add(x);
  r.mean = s.value() / double(v.size());
  if (v.size() < 2) return r;
  Accumulator q;
  for (double x : v) q.add((x - r.mean) * (x - r.mean));
  r.se = std::sqrt(q.value() / double(v.size() - 1) / double(v.size()));
  return r;
}

// ---------------------------------------------------------------------------
// Particle ensembles.

struct EnsembleParams {
  InitialSpec initial;
  std::size_t particles = 10000;
  std::size_t replicas = 32;
  double eps = 1e-3;
  double t_end = 1.0;
  double cadence = 0.1;
  double absorb_threshold = 0.0;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool log_first_replica = false;
};

struct EnsembleResult {
  std::vector<ParticleRun> runs;
  std::string events_replica0;  // event log text of replica 0 when requested
};

/// Replica r samples its sizes from stream 2r and runs the dynamics on
/// stream 2r + 1 of the base seed.
inline EnsembleResult run_ensemble(const EnsembleParams& p) {
  EnsembleResult out;
  out.runs.resize(p.replicas);
  parallel_for(p.replicas, p.threads, [&](std::size_t r) {
    Rng sampler(replica_seed(p.seed, 2 * r));
    ParticleSample sample = sample_particles(p.initial, p.particles, sampler);
    ParticleState state(std::move(sample.sizes), sample.weight, p.eps, replica_seed(p.seed, 2 * r + 1),
                        p.absorb_threshold);
    if (r == 0 && p.log_first_replica) {
      std::ostringstream log;
      out.runs[r] = run(state, p.t_end, p.cadence, &log);
      out.events_replica0 = log.str();
    } else {
      out.runs[r] = run(state, p.t_end, p.cadence);
    }
  });
  return out;
}

/// Replica mean of each trajectory column, snapshot by snapshot.
inline std::vector<TrajectoryRow> ensemble_mean_rows(const EnsembleResult& e, double delta, double R) {
  std::vector<TrajectoryRow> mean;
  if (e.runs.empty()) return mean;
  const std::size_t ns = e.runs.front().trajectory.size();
  const double n = double(e.runs.size());
  for (std::size_t k = 0; k < ns; ++k) {
    TrajectoryRow acc;
    acc.t = e.runs.front().trajectory[k].t;
    for (const auto& run : e.runs) {
      const auto r = make_row(run.trajectory[k].t, run.trajectory[k].mu, 0.0, 0.0, delta, R);
      acc.mass_total += r.mass_total / n;
      acc.mass_condensate += r.mass_condensate / n;
      acc.energy_active += r.energy_active / n;
      acc.near_mass_delta += r.near_mass_delta / n;
      acc.tail_mass_R += r.tail_mass_R / n;
      acc.moment_m05 += r.moment_m05 / n;
    }
    mean.push_back(acc);
  }
  return mean;
}

/// Replica statistic of a functional of the final snapshot.
template <class F>
MeanSe final_statistic(const EnsembleResult& e, F&& f) {
  std::vector<double> v;
  for (const auto& run : e.runs) v.push_back(f(run.trajectory.back().mu));
  return mean_se(v);
}

/// Per-replica relative change of the size sum between first and last
/// snapshot.
inline MeanSe size_sum_drift(const EnsembleResult& e) {
  std::vector<double> v;
  for (const auto& run : e.runs) v.push_back((run.size_sums.back() - run.size_sums.front()) / run.size_sums.front());
  return mean_se(v);
}

// ---------------------------------------------------------------------------
// The pi^2/12 identity sweep.

struct IdentitySweep {
  std::vector<double> eps;
  std::vector<double> values;
  std::vector<double> error_estimates;
  double extrapolated = 0.0;
  double target = 0.0;  // phi(0) pi^2 / 12
  double rel_error = 0.0;
  double seconds = 0.0;
};

/// Sweep with the C^2 bump of height 1 and the given radius.
inline IdentitySweep identity_sweep(const std::vector<double>& ladder, double radius, unsigned threads) {
  const auto t0 = std::chrono::steady_clock::now();
  IdentitySweep s;
  s.eps = ladder;
  s.values.resize(ladder.size());
  s.error_estimates.resize(ladder.size());
  const TestFunction phi = bump(0.0, radius);
  parallel_for(ladder.size(), threads, [&](std::size_t k) {
    const Pi2Result r = pi2_identity(ladder[k], phi);
    s.values[k] = r.value;
    s.error_estimates[k] = r.error_estimate;
  });
  s.extrapolated = richardson_to_zero(s.eps, s.values);
  s.target = phi.value(0.0) * std::numbers::pi * std::numbers::pi / 12.0;
  s.rel_error = std::abs(s.extrapolated - s.target) / std::abs(s.target);
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

}  // namespace wtk
