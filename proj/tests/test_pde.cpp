#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wtk/pde.hpp"

using namespace wtk;

namespace {

/// Piecewise-linear interpolant through (0, v0) and (x_k, v_k), zero beyond
/// the last node.
double interpolate(const std::vector<double>& x, const std::vector<double>& v, double v0, double z) {
  if (z <= 0.0) return v0;
  if (z > x.back()) return 0.0;
  if (z <= x.front()) return v0 + (v.front() - v0) * z / x.front();
  std::size_t k = 0;
  while (x[k + 1] < z) ++k;
  const double t = (z - x[k]) / (x[k + 1] - x[k]);
  return (1.0 - t) * v[k] + t * v[k + 1];
}

/// The projected scheme is the weak form tested against the grid interpolant
/// of phi. Direct pair sum with the half-weight diagonal.
double projected_oracle(const std::vector<double>& x, const std::vector<double>& g, const std::vector<double>& v,
                        double v0, double eps) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const std::size_t a = std::max(i, j), b = std::min(i, j);
      const double k = 1.0 / std::sqrt((x[a] + eps) * (x[b] + eps));
      s += 0.5 * g[i] * g[j] * k *
           (interpolate(x, v, v0, x[a] + x[b]) - 2.0 * v[a] + interpolate(x, v, v0, x[a] - x[b]));
    }
  }
  return s;
}

double pair_flow_dot(const Flow& f, const std::vector<double>& v, double v0) {
  double s = v0 * f.condensate;
  for (std::size_t k = 0; k < v.size(); ++k) s += v[k] * f.weights[k];
  return s;
}

SolverState random_state(std::mt19937_64& gen, const GridSpec& grid, double eps, double cond = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SolverState s;
  s.grid = grid;
  s.eps = eps;
  s.condensate = cond;
  s.weights.resize(static_cast<std::size_t>(grid.n_nodes));
  for (auto& w : s.weights) w = u(gen) < 0.3 ? 0.0 : u(gen);
  return s;
}

}  // namespace

TEST(Split, OnNodeAndMidway) {
  const std::vector<double> x{1.0, 2.0, 4.0};
  const Split on = split_point(x, 2.0);
  EXPECT_EQ(on.lo, 1);
  EXPECT_EQ(on.f_lo, 1.0);
  EXPECT_EQ(on.hi, -1);
  const Split mid = split_point(x, 1.5);
  EXPECT_EQ(mid.lo, 0);
  EXPECT_EQ(mid.hi, 1);
  EXPECT_EQ(mid.f_lo, 0.5);
  EXPECT_EQ(mid.f_hi, 0.5);
  EXPECT_TRUE(split_point(x, 4.5).overflow);
  const Split low = split_point(x, 0.25);
  EXPECT_EQ(low.lo, -1);
  EXPECT_EQ(low.hi, 0);
  EXPECT_EQ(low.f_hi, 0.25);
}

TEST(Split, KeepsMassAndFirstMoment) {
  std::mt19937_64 gen(31);
  const auto x = GridSpec{1e-3, 10.0, 50}.nodes();
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double z = u(gen);
    const Split s = split_point(x, z);
    const double xl = s.lo < 0 ? 0.0 : x[static_cast<std::size_t>(s.lo)];
    const double xh = s.hi < 0 ? 0.0 : x[static_cast<std::size_t>(s.hi)];
    EXPECT_NEAR(s.f_lo + s.f_hi, 1.0, 1e-15);
    EXPECT_NEAR(s.f_lo * xl + s.f_hi * xh, z, 1e-14 * (1.0 + z));
  }
}

TEST(Rhs, TwoNodeSquareMoment) {
  // Nodes 1, 2, 4 with unit weight at 1 and 2. The unsplit drift of the
  // second moment is sqrt(2) + 3; the deposit at 3 is split between 2 and 4,
  // which adds rate * (3 - 2) * (4 - 3) with rate 1/sqrt(2).
  const GridSpec grid{1.0, 4.0, 3};
  ASSERT_EQ(grid.nodes(), (std::vector<double>{1.0, 2.0, 4.0}));
  SolverState s;
  s.grid = grid;
  s.eps = 0.0;
  s.weights = {1.0, 1.0, 0.0};
  const Flow f = rhs(s);
  const std::vector<double> x{1.0, 2.0, 4.0};
  double m0 = f.condensate, m1 = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    m0 += f.weights[k];
    m1 += x[k] * f.weights[k];
    m2 += x[k] * x[k] * f.weights[k];
  }
  EXPECT_NEAR(m0, 0.0, 1e-15);
  EXPECT_NEAR(m1, 0.0, 1e-15);
  EXPECT_NEAR(m2, std::sqrt(2.0) + 3.0 + 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(f.condensate, 0.75, 1e-15);
}

TEST(Rhs, MatchesInterpolatedWeakForm) {
  std::mt19937_64 gen(32);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const GridSpec grid{1e-2, 5.0, 25};
  const auto x = grid.nodes();
  for (int trial = 0; trial < 20; ++trial) {
    for (double eps : {0.0, 1e-3}) {
      const SolverState s = random_state(gen, grid, eps, 0.4);
      // Nodal values that vanish on the upper half keep overflow out of the
      // comparison.
      std::vector<double> v(x.size());
      for (std::size_t k = 0; k < x.size(); ++k) v[k] = x[k] <= 2.5 ? u(gen) : 0.0;
      const double v0 = u(gen);
      const Flow f = rhs(s);
      const double expect = projected_oracle(x, s.weights, v, v0, eps);
      EXPECT_NEAR(pair_flow_dot(f, v, v0), expect, 1e-11 * (1.0 + std::abs(expect)));
    }
  }
}

TEST(Rhs, ConservesMassAndEnergyWithLedger) {
  std::mt19937_64 gen(33);
  const GridSpec grid{1e-3, 2.0, 40};
  const auto x = grid.nodes();
  for (int trial = 0; trial < 20; ++trial) {
    const SolverState s = random_state(gen, grid, 1e-3);
    const Flow f = rhs(s);
    double m = f.condensate + f.overflow_mass, e = f.overflow_energy, scale = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      m += f.weights[k];
      e += x[k] * f.weights[k];
      scale += std::abs(x[k] * f.weights[k]);
    }
    EXPECT_NEAR(m, 0.0, 1e-12 * scale / x.front());
    EXPECT_NEAR(e, 0.0, 1e-13 * scale);
    EXPECT_GE(f.condensate, 0.0);
  }
}

TEST(Rhs, ZeroMeasureAndPureCondensateAreFixed) {
  const GridSpec grid{1e-2, 10.0, 20};
  SolverState s;
  s.grid = grid;
  s.eps = 1e-3;
  s.weights.assign(20, 0.0);
  for (double c : {0.0, 3.0}) {
    s.condensate = c;
    const Flow f = rhs(s);
    for (double w : f.weights) EXPECT_EQ(w, 0.0);
    EXPECT_EQ(f.condensate, 0.0);
    SolverState t = s;
    step(t, 0.1);
    EXPECT_EQ(t.weights, s.weights);
    EXPECT_EQ(t.condensate, c);
  }
}

TEST(Rhs, CondensateDoesNotInteract) {
  std::mt19937_64 gen(34);
  const GridSpec grid{1e-2, 10.0, 30};
  for (int trial = 0; trial < 10; ++trial) {
    SolverState s = random_state(gen, grid, 1e-3);
    const Flow a = rhs(s);
    s.condensate = 5.0;
    const Flow b = rhs(s);
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_EQ(a.condensate, b.condensate);
  }
}

TEST(Evolve, DiracAtZeroIsConstant) {
  const PdeRun run = evolve(Measure(1.5, {}), GridSpec{1e-3, 10.0, 30}, 1e-3, 1.0, 0.1);
  ASSERT_EQ(run.snapshots.size(), 11u);
  for (const auto& s : run.snapshots) {
    EXPECT_EQ(s.mu.condensate(), 1.5);
    for (const Atom& a : s.mu.atoms()) EXPECT_EQ(a.weight, 0.0);
  }
}

TEST(Evolve, MassConservedAndCondensateMonotone) {
  std::mt19937_64 gen(35);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const GridSpec grid{1e-3, 20.0, 60};
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Atom> atoms;
    for (int k = 0; k < 5; ++k) atoms.push_back({0.1 + 1.9 * u(gen), u(gen)});
    SolverState s = project(Measure(0.0, atoms), grid, 1e-3);
    const PairTable table(grid, 1e-3);
    const double m0 = s.mass_total();
    const double e0 = s.energy_active();
    double cond = s.condensate;
    for (int n = 0; n < 200; ++n) {
      const double before = s.mass_total();
      step(s, table, 0.01);
      EXPECT_NEAR(s.mass_total(), before, 1e-12 * before);
      EXPECT_GE(s.condensate, cond);
      cond = s.condensate;
      for (double w : s.weights) EXPECT_GE(w, 0.0);
    }
    EXPECT_NEAR(s.mass_total(), m0, 1e-12 * m0);
    EXPECT_NEAR(s.energy_active() + s.overflow_energy, e0, 1e-12 * e0);
    EXPECT_GT(s.condensate, 0.0);
  }
}

TEST(Evolve, SecondOrderInTime) {
  const GridSpec grid{1e-2, 10.0, 40};
  const Measure mu(0.0, {{1.0, 0.5}, {1.7, 0.5}});
  std::vector<Measure> finals;
  for (double dt : {0.02, 0.01, 0.005}) {
    EvolveOptions o;
    o.dt_max = dt;
    o.cfl = 10.0;
    finals.push_back(evolve(mu, grid, 1e-3, 0.5, 0.5, o).final_state.measure());
  }
  const double e1 = bl_distance(finals[0], finals[1]);
  const double e2 = bl_distance(finals[1], finals[2]);
  EXPECT_GT(std::log2(e1 / e2), 1.7);
}

TEST(Evolve, SnapshotsOnCadence) {
  const PdeRun run = evolve(Measure(0.0, {{1.0, 1.0}}), GridSpec{1e-2, 10.0, 20}, 1e-3, 0.35, 0.1);
  ASSERT_EQ(run.snapshots.size(), 5u);
  EXPECT_EQ(run.snapshots[1].t, 0.1);
  EXPECT_EQ(run.snapshots[3].t, 0.30000000000000004);
  EXPECT_EQ(run.snapshots.back().t, 0.35);
}

TEST(Project, RejectsSupportBeyondGrid) {
  EXPECT_THROW(project(Measure(0.0, {{11.0, 1.0}}), GridSpec{1e-2, 10.0, 20}, 1e-3), std::invalid_argument);
  EXPECT_THROW(GridSpec({1.0, 0.5, 10}).validate(), std::invalid_argument);
}

TEST(Evolve, SatisfiesKeyInequality) {
  const PdeRun run = evolve(Measure(0.0, {{1.0, 0.6}, {2.0, 0.4}}), GridSpec{1e-3, 50.0, 80}, 1e-3, 2.0, 0.25);
  for (double c : {0.1, 0.5, 1.0, 3.0}) {
    const CheckResult r = key_inequality_check(run.trajectory_with_ledger(), c);
    EXPECT_TRUE(r.ok) << "c=" << c << " margin " << r.margin;
  }
}

TEST(Evolve, ScalingCovarianceIsExactForPowersOfTwo) {
  // Positions halved, weights doubled and eps halved: time runs at the same
  // rate, so the scaled run reproduces the rescaled original bit for bit.
  const Measure mu(0.0, {{1.0, 0.6}, {2.0, 0.4}});
  const GridSpec grid{1e-3, 10.0, 40};
  const PdeRun a = evolve(mu, grid, 1e-3, 0.5, 0.1);
  const PdeRun b = evolve(rescale(mu, {2.0, 2.0}), GridSpec{0.5e-3, 5.0, 40}, 0.5e-3, 0.5 / 4.0, 0.1 / 4.0,
                          EvolveOptions{0.01 / 4.0, 0.1, {}});
  ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    EXPECT_EQ(rescale(a.snapshots[k].mu, {2.0, 2.0}), b.snapshots[k].mu) << "snapshot " << k;
  }
}
