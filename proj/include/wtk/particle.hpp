#pragma once
/// Event-driven particle system: a pair {x, y} interacts at rate
/// 2 (M/N) K_eps(x, y) and becomes {x + y, min} or {|x - y|, min} with equal
/// probability. Pairs are proposed uniformly among active particles and
/// thinned against the bound 2 (M/N) / eps.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernel.hpp"
#include "measure.hpp"
#include "weakform.hpp"

namespace wtk {

/// splitmix64, used only to derive seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// mt19937_64 seeded through seed_seq from splitmix64 output. Uniforms and
/// exponentials are computed here rather than through <random>
/// distributions, whose algorithms differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t s = seed;
    std::array<std::uint32_t, 8> words{};
    for (std::size_t k = 0; k < words.size(); k += 2) {
      const std::uint64_t v = splitmix64(s);
      words[k] = static_cast<std::uint32_t>(v);
      words[k + 1] = static_cast<std::uint32_t>(v >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Exponential with rate 1.
  double exponential() { return -std::log1p(-uniform()); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }
  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

/// Seed for replica r of a run with base seed s.
inline std::uint64_t replica_seed(std::uint64_t base, std::uint64_t replica) {
  std::uint64_t st = base ^ (0xD1B54A32D192ED03ULL * (replica + 1));
  return splitmix64(st);
}

struct ParticleEvent {
  double t = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  bool sum_branch = true;  // heads: x + y, tails: |x - y|
  double new_xi = 0.0;
  double new_xj = 0.0;
};

inline void write_event(std::ostream& os, const ParticleEvent& e) {
  os << format_double(e.t) << ',' << e.i << ',' << e.j << ',' << (e.sum_branch ? "sum" : "diff") << ','
     << format_double(e.new_xi) << ',' << format_double(e.new_xj) << '\n';
}

class ParticleState {
 public:
  ParticleState(std::vector<double> sizes, double weight_per_particle, double eps, std::uint64_t seed,
                double absorb_threshold = 0.0)
      : sizes_(std::move(sizes)),
        weight_(weight_per_particle),
        eps_(eps),
        absorb_(absorb_threshold),
        seed_(seed),
        rng_(seed) {
    if (!(weight_ > 0.0)) throw std::invalid_argument("ParticleState: weight must be > 0");
    if (!(eps_ > 0.0)) throw std::invalid_argument("ParticleState: eps must be > 0");
    if (!(absorb_ >= 0.0)) throw std::invalid_argument("ParticleState: absorb_threshold must be >= 0");
    pos_.assign(sizes_.size(), kNone);
    for (std::size_t k = 0; k < sizes_.size(); ++k) {
      if (!(sizes_[k] >= 0.0) || !std::isfinite(sizes_[k])) {
        throw std::invalid_argument("ParticleState: sizes must be finite and >= 0");
      }
      if (sizes_[k] > absorb_) {
        pos_[k] = active_.size();
        active_.push_back(k);
      }
    }
  }

  std::size_t count() const { return sizes_.size(); }
  std::size_t active_count() const { return active_.size(); }
  double weight_per_particle() const { return weight_; }
  double eps() const { return eps_; }
  double time() const { return time_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& sizes() const { return sizes_; }
  bool is_active(std::size_t k) const { return pos_[k] != kNone; }

  /// Interaction rate of two particles; 0 if either is inactive.
  double pair_rate(double x, double y) const {
    if (x <= absorb_ || y <= absorb_) return 0.0;
    return 2.0 * weight_ * kernel_reg(x, y, eps_);
  }

  double rate_bound() const { return 2.0 * weight_ / eps_; }

  /// Advances to the next accepted event, unless that would pass t_stop, in
  /// which case time is set to t_stop and nothing is returned. Also returns
  /// nothing (time unchanged) when fewer than two particles are active.
  std::optional<ParticleEvent> step(double t_stop = kInf) {
    const double bound = rate_bound();
    for (;;) {
      const std::size_t na = active_.size();
      if (na < 2) return std::nullopt;
      const double total = 0.5 * double(na) * double(na - 1) * bound;
      const double t_next = time_ + rng_.exponential() / total;
      if (t_next > t_stop) {
        time_ = t_stop;
        return std::nullopt;
      }
      time_ = t_next;
      const std::size_t a = static_cast<std::size_t>(rng_.below(na));
      std::size_t b = static_cast<std::size_t>(rng_.below(na - 1));
      if (b >= a) ++b;
      const std::size_t i = active_[a], j = active_[b];
      const double x = sizes_[i], y = sizes_[j];
      if (rng_.uniform() * bound >= pair_rate(x, y)) continue;
      const bool heads = rng_.coin();
      const double lo = std::min(x, y);
      const double hi = heads ? x + y : std::abs(x - y);
      // The smaller particle keeps its size; the larger one takes the outcome.
      const std::size_t keep = x <= y ? i : j;
      const std::size_t change = keep == i ? j : i;
      sizes_[keep] = lo;
      sizes_[change] = hi;
      if (hi <= absorb_) deactivate(change);
      ++events_;
      return ParticleEvent{time_, i, j, heads, sizes_[i], sizes_[j]};
    }
  }

  /// Empirical measure; inactive particles are pooled into the condensate.
  Measure measure() const {
    double cond = 0.0;
    std::vector<Atom> atoms;
    atoms.reserve(active_.size());
    for (std::size_t k = 0; k < sizes_.size(); ++k) {
      if (pos_[k] == kNone) {
        cond += weight_;
      } else {
        atoms.push_back({sizes_[k], weight_});
      }
    }
    return Measure(cond, std::move(atoms));
  }

  double size_sum() const {
    Accumulator acc;
    for (double s : sizes_) acc.add(s);
    return acc.value();
  }

  std::uint64_t events() const { return events_; }

  void advance_to(double t) { time_ = std::max(time_, t); }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  void deactivate(std::size_t k) {
    const std::size_t p = pos_[k];
    const std::size_t last = active_.back();
    active_[p] = last;
    pos_[last] = p;
    active_.pop_back();
    pos_[k] = kNone;
  }

  std::vector<double> sizes_;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> pos_;
  double weight_;
  double eps_;
  double absorb_;
  double time_ = 0.0;
  std::uint64_t seed_;
  std::uint64_t events_ = 0;
  Rng rng_;
};

struct ParticleRun {
  Trajectory trajectory;
  std::vector<double> size_sums;   // at each snapshot
  std::vector<std::size_t> counts;  // particle count at each snapshot
  std::uint64_t events = 0;
};

/// Runs to t_end recording snapshots at multiples of cadence. Events go to
/// the log stream when one is given.
inline ParticleRun run(ParticleState& state, double t_end, double cadence, std::ostream* event_log = nullptr) {
  if (!(t_end > state.time())) throw std::invalid_argument("run: t_end must exceed the current time");
  if (!(cadence > 0.0)) throw std::invalid_argument("run: cadence must be > 0");
  ParticleRun out;
  const std::size_t n = state.count();
  auto record = [&]() {
    if (state.count() != n) throw std::logic_error("particle count changed");
    out.trajectory.push_back({state.time(), state.measure()});
    out.size_sums.push_back(state.size_sum());
    out.counts.push_back(state.count());
  };
  record();
  const double t0 = state.time();
  const auto n_out = static_cast<std::size_t>(std::ceil((t_end - t0) / cadence - 1e-9));
  for (std::size_t k = 1; k <= n_out; ++k) {
    const double target = std::min(t_end, t0 + double(k) * cadence);
    for (;;) {
      auto ev = state.step(target);
      if (!ev) break;
      ++out.events;
      if (state.count() != n) throw std::logic_error("particle count changed");
      if (event_log) write_event(*event_log, *ev);
    }
    // With fewer than two active particles nothing can happen anymore.
    state.advance_to(target);
    record();
  }
  return out;
}

}  // namespace wtk
