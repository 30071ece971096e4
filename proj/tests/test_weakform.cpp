#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "wtk/weakform.hpp"

using namespace wtk;

namespace {

Measure random_measure(std::mt19937_64& gen, int n, double cond = 0.0) {
  std::uniform_real_distribution<double> pos(0.01, 4.0), w(0.0, 1.0);
  std::vector<Atom> atoms;
  for (int k = 0; k < n; ++k) atoms.push_back({pos(gen), w(gen)});
  return Measure(cond, std::move(atoms));
}

/// Direct double sum over the ordered pairs of a product measure with the
/// half-weight diagonal rule, written independently of weak_rhs.
double rhs_oracle(const Measure& mu, const TestFunction& phi, double eps) {
  const auto a = mu.atoms();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double x = std::max(a[i].position, a[j].position), y = std::min(a[i].position, a[j].position);
      const double term = a[i].weight * a[j].weight / std::sqrt((x + eps) * (y + eps)) *
                          (phi(x + y) - 2.0 * phi(x) + phi(x - y));
      // Unordered off-diagonal pairs appear twice, the diagonal once.
      s += 0.5 * term;
    }
  }
  return s;
}

}  // namespace

TEST(WeakRhs, CondensateOnlyGivesZero) {
  for (const auto& phi : {bump(0.0, 1.0), power(2.0), smoothed_hinge(3.0)}) {
    EXPECT_EQ(weak_rhs(Measure(2.5, {}), phi), 0.0);
  }
}

TEST(WeakRhs, SingleAtomIdentityGivesZero) { EXPECT_EQ(weak_rhs(Measure(0.0, {{1.7, 0.3}}), power(1.0)), 0.0); }

TEST(WeakRhs, TwoAtomSquareExample) {
  const Measure mu(0.0, {{2.0, 1.0}, {1.0, 1.0}});
  EXPECT_NEAR(weak_rhs(mu, power(2.0)), std::sqrt(2.0) + 3.0, 1e-14);
  const RhsResult r = weak_rhs_detailed(mu, power(2.0), {});
  EXPECT_NEAR(r.diagonal, 3.0, 1e-14);
  EXPECT_NEAR(weak_rhs(mu, power(2.0), {0.0, false}), std::sqrt(2.0), 1e-14);
}

TEST(WeakRhs, MatchesDirectDoubleSum) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Measure mu = random_measure(gen, 12);
    for (const auto& phi : {bump(0.0, 3.0), log_bump(1.0, 0.8), power(3.0)}) {
      for (double eps : {0.0, 0.01}) {
        const double expect = rhs_oracle(mu, phi, eps);
        EXPECT_NEAR(weak_rhs(mu, phi, {eps, true}), expect, 1e-12 * (1.0 + std::abs(expect)));
      }
    }
  }
}

TEST(WeakRhs, ConstantTestFunctionGivesZero) {
  std::mt19937_64 gen(22);
  for (int trial = 0; trial < 50; ++trial) {
    EXPECT_EQ(weak_rhs(random_measure(gen, 20, 0.5), constant_function(3.0)), 0.0);
  }
}

TEST(WeakRhs, SaturatedIdentityTendsToZero) {
  std::mt19937_64 gen(23);
  const Measure mu = random_measure(gen, 30);
  // The second difference of x / (1 + e x) is O(e) once e x is small.
  double prev = std::abs(weak_rhs(mu, saturating(1e-2)));
  for (double e = 1e-3; e > 1e-7; e /= 10.0) {
    const double v = std::abs(weak_rhs(mu, saturating(e)));
    EXPECT_LT(v, 0.11 * prev) << e;
    prev = v;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(WeakRhs, PermutationAndMergeInvariant) {
  std::mt19937_64 gen(24);
  std::vector<Atom> atoms{{0.5, 0.2}, {1.0, 0.3}, {2.0, 0.4}, {3.5, 0.1}};
  const Measure base(0.0, atoms);
  const TestFunction phi = bump(0.0, 4.0);
  const double ref = weak_rhs(base, phi);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(atoms.begin(), atoms.end(), gen);
    EXPECT_EQ(weak_rhs(Measure(0.0, atoms), phi), ref);
  }
  // Splitting an atom into two at the same position changes nothing once merged.
  std::vector<Atom> split{{0.5, 0.2}, {1.0, 0.1}, {1.0, 0.2}, {2.0, 0.4}, {3.5, 0.1}};
  EXPECT_NEAR(weak_rhs(Measure(0.0, split), phi), ref, 1e-15);
}

TEST(WeakRhs, NonnegativeForConvex) {
  std::mt19937_64 gen(25);
  for (int trial = 0; trial < 100; ++trial) {
    const Measure mu = random_measure(gen, 10, 0.3);
    for (const auto& phi : {smoothed_hinge(1.0), smoothed_hinge(0.2), power(2.0)}) {
      EXPECT_GE(weak_rhs(mu, phi), -1e-14);
    }
  }
}

TEST(WeakRhs, ScalingCovariance) {
  // Positions scale by 1/lambda, weights by kappa and eps by 1/lambda: the
  // kernel picks up a factor lambda and the product measure kappa^2.
  std::mt19937_64 gen(26);
  for (int trial = 0; trial < 20; ++trial) {
    const Measure mu = random_measure(gen, 15);
    for (const auto& [kappa, lambda] : {std::pair{2.0, 2.0}, std::pair{0.5, 4.0}, std::pair{3.0, 0.7}}) {
      const TestFunction phi = bump(0.0, 2.0);
      const double eps = 0.01;
      const double lhs = weak_rhs(rescale(mu, {kappa, lambda}), phi, {eps / lambda, true});
      const double rhs = kappa * kappa * lambda * weak_rhs(mu, dilate(phi, lambda), {eps, true});
      EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST(WeakResidual, StationaryCondensateIsExact) {
  Trajectory tr;
  for (int k = 0; k <= 10; ++k) tr.push_back({0.1 * k, Measure(1.0, {})});
  EXPECT_EQ(weak_residual(tr, bump(0.0, 1.0)), 0.0);
}

TEST(WeakResidual, ConstantFunctionOnMassConservingTrajectory) {
  std::mt19937_64 gen(27);
  Trajectory tr;
  for (int k = 0; k <= 10; ++k) tr.push_back({0.1 * k, random_measure(gen, 5)});
  // Renormalize every snapshot to unit mass.
  for (auto& s : tr) s.mu = rescale(s.mu, {1.0 / total_mass(s.mu), 1.0});
  EXPECT_LT(weak_residual(tr, constant_function()), 1e-15);
}

TEST(WeakResidual, RejectsEmptyTrajectory) { EXPECT_THROW(weak_residual(Trajectory{}, bump(0.0, 1.0)), std::invalid_argument); }

TEST(Pi2Identity, ExtrapolatesToPiSquaredOverTwelve) {
  const std::vector<double> eps{1e-2, 3e-3, 1e-3};
  for (double height : {1.0, 2.0}) {
    std::vector<double> v;
    for (double e : eps) v.push_back(pi2_identity(e, bump(0.0, 1.0, height)).value);
    const double target = height * std::numbers::pi * std::numbers::pi / 12.0;
    EXPECT_NEAR(richardson_to_zero(eps, v), target, 0.01 * target);
  }
}

TEST(Pi2Identity, VanishesWhenPhiVanishesAtZero) {
  const std::vector<double> eps{1e-2, 3e-3, 1e-3};
  std::vector<double> v;
  for (double e : eps) v.push_back(pi2_identity(e, bump(1.0, 0.5)).value);
  EXPECT_NEAR(richardson_to_zero(eps, v), 0.0, 5e-3);
}

TEST(Pi2Identity, RequiresCompactSupport) {
  EXPECT_THROW(pi2_identity(1e-2, saturating(1.0)), std::invalid_argument);
  EXPECT_THROW(pi2_identity(0.0, bump(0.0, 1.0)), std::invalid_argument);
}

TEST(Richardson, ExactForPolynomials) {
  const std::vector<double> e{0.3, 0.2, 0.1};
  std::vector<double> v;
  for (double x : e) v.push_back(1.5 - 2.0 * x + 4.0 * x * x);
  EXPECT_NEAR(richardson_to_zero(e, v), 1.5, 1e-13);
}

TEST(KeyInequality, TrivialSolutionHolds) {
  Trajectory tr;
  for (int k = 0; k <= 5; ++k) tr.push_back({0.2 * k, Measure(2.0, {})});
  const CheckResult r = key_inequality_check(tr, 0.5);
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.margin, 2.0);
}

TEST(KeyInequality, SingleAtomBelowThresholdHolds) {
  // With c above the atom the double sum is empty and the left side is the
  // atom's mass.
  Trajectory tr;
  for (int k = 0; k <= 5; ++k) tr.push_back({0.2 * k, Measure(0.0, {{1.0, 0.7}})});
  const CheckResult r = key_inequality_check(tr, 1.5);
  EXPECT_TRUE(r.ok);
  EXPECT_DOUBLE_EQ(r.margin, 0.7);
}

TEST(SqrtBound, Examples) {
  Trajectory trivial;
  for (int k = 0; k <= 4; ++k) trivial.push_back({0.25 * k, Measure(1.0, {})});
  const CheckResult t = sqrt_bound_check(trivial, 0.01, 0.0, 1.0);
  EXPECT_TRUE(t.ok);
  EXPECT_DOUBLE_EQ(t.margin, 12.0 * 0.1);
  // Everything below r: the left side is (t2 - t1) M.
  Trajectory all;
  for (int k = 0; k <= 4; ++k) all.push_back({0.25 * k, Measure(0.0, {{0.5, 1.0}})});
  const CheckResult a = sqrt_bound_check(all, 1.0, 0.0, 1.0);
  EXPECT_TRUE(a.ok);
  EXPECT_NEAR(a.margin, 12.0 - 1.0, 1e-14);
  EXPECT_THROW(sqrt_bound_check(all, 1.0, 0.0, 2.0), std::invalid_argument);
}
