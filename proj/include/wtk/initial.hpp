#pragma once
/// Named initial data: a deterministic atomization for the PDE solver and a
/// sampler for the particle system.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "measure.hpp"
#include "particle.hpp"

namespace wtk {

inline Measure load_measure_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open measure file '" + path + "'");
  return read_measure(in);
}

/// Atomizes a density into cells, one atom per cell at the cell centroid
/// carrying the cell mass, so mass and first moment are exact per cell.
/// Uniform uses equal cells, powerlaw_half log-spaced ones.
inline Measure initial_measure(const InitialSpec& spec, std::size_t cells = 0) {
  const auto& p = spec.params;
  if (spec.family == "dirac0") return Measure(p[0], {});
  if (spec.family == "twoatom") return Measure(0.0, {{p[0], p[2]}, {p[1], p[3]}});
  if (spec.family == "profile_file") return load_measure_file(spec.path);
  std::vector<Atom> atoms;
  if (spec.family == "uniform") {
    const std::size_t m = cells ? cells : 1000;
    const double a = p[0], b = p[1], w = p[2] / double(m);
    for (std::size_t k = 0; k < m; ++k) atoms.push_back({a + (b - a) * (double(k) + 0.5) / double(m), w});
    return Measure(0.0, std::move(atoms));
  }
  if (spec.family == "powerlaw_half") {
    const std::size_t m = cells ? cells : 20000;
    const double lo = std::log(p[0]), hi = std::log(p[1]);
    for (std::size_t k = 0; k < m; ++k) {
      const double c0 = std::exp(lo + (hi - lo) * double(k) / double(m));
      const double c1 = std::exp(lo + (hi - lo) * double(k + 1) / double(m));
      const double mass = 2.0 * (std::sqrt(c1) - std::sqrt(c0));
      const double first = (2.0 / 3.0) * (c1 * std::sqrt(c1) - c0 * std::sqrt(c0));
      atoms.push_back({first / mass, mass});
    }
    return Measure(0.0, std::move(atoms));
  }
  throw std::invalid_argument("initial_measure: unknown family '" + spec.family + "'");
}

/// Total mass of the family, exact where a closed form exists.
inline double initial_mass(const InitialSpec& spec) {
  const auto& p = spec.params;
  if (spec.family == "dirac0") return p[0];
  if (spec.family == "uniform") return p[2];
  if (spec.family == "powerlaw_half") return 2.0 * (std::sqrt(p[1]) - std::sqrt(p[0]));
  if (spec.family == "twoatom") return p[2] + p[3];
  return total_mass(load_measure_file(spec.path));
}

struct ParticleSample {
  std::vector<double> sizes;
  double weight = 0.0;  // mass per particle
};

/// Draws n i.i.d. sizes from the normalized initial datum.
inline ParticleSample sample_particles(const InitialSpec& spec, std::size_t n, Rng& rng) {
  ParticleSample out;
  out.sizes.resize(n);
  const auto& p = spec.params;
  if (spec.family == "dirac0") {
    std::fill(out.sizes.begin(), out.sizes.end(), 0.0);
  } else if (spec.family == "uniform") {
    for (double& s : out.sizes) s = p[0] + (p[1] - p[0]) * rng.uniform();
  } else if (spec.family == "powerlaw_half") {
    // Inverse CDF of x^{-1/2} on [x_min, x_max].
    const double a = std::sqrt(p[0]), b = std::sqrt(p[1]);
    for (double& s : out.sizes) {
      const double r = a + (b - a) * rng.uniform();
      s = r * r;
    }
  } else if (spec.family == "twoatom") {
    const double q = p[2] / (p[2] + p[3]);
    for (double& s : out.sizes) s = rng.uniform() < q ? p[0] : p[1];
  } else {
    const Measure mu = load_measure_file(spec.path);
    std::vector<double> cdf{mu.condensate()};
    for (const Atom& a : mu.atoms()) cdf.push_back(cdf.back() + a.weight);
    const double total = cdf.back();
    if (!(total > 0.0)) throw std::invalid_argument("sample_particles: measure has no mass");
    for (double& s : out.sizes) {
      const double u = rng.uniform() * total;
      const auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      s = k == 0 ? 0.0 : mu.atoms()[std::min(k, cdf.size() - 1) - 1].position;
    }
  }
  const double M = initial_mass(spec);
  if (!(M > 0.0)) throw std::invalid_argument("sample_particles: initial mass must be > 0");
  out.weight = M / double(n);
  return out;
}

}  // namespace wtk
