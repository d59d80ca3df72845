#include <gtest/gtest.h>

#include <cmath>

#include "renyi/entanglement.hpp"

using namespace renyi;

namespace {

const BipartiteSplit kAB{{"A"}, {"B"}};

DensityMatrix depolarized_phi2(double p) {
  const Matrix m = (1.0 - p) * maximally_entangled(2).density().matrix() + p * Matrix::Identity(4, 4) / 4.0;
  return DensityMatrix::validate(m, SubsystemDims({{"A", 2}, {"B", 2}}));
}

DensityMatrix random_separable(int terms, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m = Matrix::Zero(6, 6);
  double total = 0.0;
  for (int i = 0; i < terms; ++i) {
    const double w = uniform01(rng) + 0.1;
    const auto a = random_density(SubsystemDims::single(2, "A"), derive_seed(seed, 2 * i));
    const auto b = random_density(SubsystemDims::single(3, "B"), derive_seed(seed, 2 * i + 1));
    m += w * kron(a.matrix(), b.matrix());
    total += w;
  }
  return DensityMatrix::validate(m / total, SubsystemDims({{"A", 2}, {"B", 3}}));
}

}  // namespace

TEST(RreeLower, MaximallyEntangledIsLogK) {
  for (int k = 2; k <= 4; ++k) {
    for (double a : {0.5, 1.25, 2.0}) EXPECT_NEAR(rree_lower(maximally_entangled(k).density(), kAB, a), std::log2(k), 1e-9);
  }
}

TEST(RreeLower, ProductStateIsNotPositive) {
  const auto rho = tensor(random_density(SubsystemDims::single(2, "A"), 1), random_density(SubsystemDims::single(2, "B"), 2));
  for (double a : {0.5, 1.0, 1.5, 2.0}) EXPECT_LE(rree_lower(rho, kAB, a), 1e-12);
}

TEST(RreeLower, MaxOfBothDirections) {
  const auto rho = random_density(SubsystemDims({{"A", 2}, {"B", 2}}), 4, 3);
  const double ab = coherent_information_renyi(rho, kAB, 1.5);
  const double ba = coherent_information_renyi(rho, BipartiteSplit{{"B"}, {"A"}}, 1.5);
  EXPECT_DOUBLE_EQ(rree_lower(rho, kAB, 1.5), std::max(ab, ba));
}

TEST(RreeLower, OrderAboveTwoRejected) {
  EXPECT_THROW(rree_lower(maximally_entangled(2).density(), kAB, 2.5), Error);
}

TEST(RreeBoundsPure, SandwichCollapsesOnMaximallyEntangled) {
  for (int k = 2; k <= 4; ++k) {
    const auto b = rree_bounds_pure(maximally_entangled(k), kAB, 1.5);
    EXPECT_NEAR(b.lower, std::log2(k), 1e-12);
    EXPECT_NEAR(b.upper, std::log2(k), 1e-12);
  }
}

TEST(RreeBoundsPure, ProductIsZero) {
  const auto b = rree_bounds_pure(basis_state(SubsystemDims({{"A", 2}, {"B", 2}}), 0), kAB, 1.5);
  EXPECT_NEAR(b.lower, 0.0, 1e-12);
  EXPECT_NEAR(b.upper, 0.0, 1e-12);
}

TEST(RreeBoundsPure, SchmidtEightTwo) {
  const auto b = rree_bounds_pure(schmidt_state({0.8, 0.2}), kAB, 1.5);
  EXPECT_NEAR(b.lower, 0.8026759431540638, 1e-9);
  EXPECT_NEAR(b.upper, 0.8479969065549501, 1e-9);
}

TEST(RreeEstimate, SeparableInputIsNearZero) {
  const auto rho = random_separable(4, 19);
  RreeConfig cfg;
  cfg.seed = 3;
  const auto est = rree_estimate(rho, kAB, 1.5, cfg);
  EXPECT_LE(est.upper_estimate, 1e-6);
}

TEST(RreeEstimate, BellPairAtTwo) {
  RreeConfig cfg;
  cfg.seed = 1;
  const auto est = rree_estimate(maximally_entangled(2).density(), kAB, 2.0, cfg);
  EXPECT_NEAR(est.upper_estimate, 1.0, 1e-4);
  EXPECT_NEAR(est.analytic_lower, 1.0, 1e-9);
  ASSERT_TRUE(est.analytic_upper.has_value());
  EXPECT_NEAR(*est.analytic_upper, 1.0, 1e-9);
}

TEST(RreeEstimate, SchmidtStateInsideSandwich) {
  RreeConfig cfg;
  cfg.seed = 11;
  const auto est = rree_estimate(schmidt_state({0.8, 0.2}).density(), kAB, 1.5, cfg);
  EXPECT_GE(est.upper_estimate, 0.8026759431540638 - 1e-6);
  EXPECT_LE(est.upper_estimate, 0.8479969065549501 + 1e-6);
}

TEST(RreeEstimate, WitnessIsSeparableAndReproducesValue) {
  const auto rho = random_density(SubsystemDims({{"A", 2}, {"B", 2}}), 3, 41);
  RreeConfig cfg;
  cfg.seed = 5;
  cfg.restarts = 2;
  const auto est = rree_estimate(rho, kAB, 1.5, cfg);
  EXPECT_NO_THROW(est.witness.validate(1e-9));
  const double direct = renyi_relative(rho, est.witness.density(), 1.5).value;
  EXPECT_NEAR(direct, est.upper_estimate, 1e-9);
  EXPECT_GE(est.upper_estimate, est.analytic_lower - 1e-9);
}

TEST(RreeEstimate, DeterministicAcrossJobs) {
  const auto rho = random_density(SubsystemDims({{"A", 2}, {"B", 2}}), 4, 8);
  RreeConfig cfg;
  cfg.seed = 9;
  cfg.restarts = 3;
  cfg.max_iters = 60;
  cfg.jobs = 1;
  const auto one = rree_estimate(rho, kAB, 1.25, cfg);
  cfg.jobs = 3;
  const auto three = rree_estimate(rho, kAB, 1.25, cfg);
  EXPECT_EQ(one.upper_estimate, three.upper_estimate);
  EXPECT_EQ(one.best_restart, three.best_restart);
}

TEST(RreeEstimate, MonotoneUnderLocalChannel) {
  const auto rho = random_density(SubsystemDims({{"A", 2}, {"B", 2}}), 2, 23);
  const auto out = apply_local_channel(random_channel(SubsystemDims::single(2, "B"), SubsystemDims::single(2, "B"), 2, 24), rho, "B");
  RreeConfig cfg;
  cfg.seed = 2;
  const double before = rree_estimate(rho, kAB, 1.5, cfg).upper_estimate;
  const double after = rree_estimate(out, kAB, 1.5, cfg).upper_estimate;
  EXPECT_LE(after, before + 1e-6);
}

TEST(RreeEstimate, WeakGuaranteeBelowOne) {
  RreeConfig cfg;
  cfg.restarts = 1;
  cfg.max_iters = 30;
  EXPECT_TRUE(rree_estimate(maximally_entangled(2).density(), kAB, 0.5, cfg).weak_guarantee);
  EXPECT_FALSE(rree_estimate(maximally_entangled(2).density(), kAB, 1.5, cfg).weak_guarantee);
}

TEST(Optimizer, GradientMatchesFiniteDifferences) {
  const auto rho = random_density(SubsystemDims({{"A", 2}, {"B", 2}}), 4, 61);
  const detail::ProductParametrization par(2, 2, 5);
  Rng rng(62);
  const RealVector th = detail::random_theta(par, 2, 2, rng);
  for (double a : {0.5, 1.0, 1.5, 2.0}) {
    const detail::DivergenceObjective obj(rho.matrix(), a);
    Matrix h;
    obj(par.sigma_of(th), &h);
    const RealVector g = par.pullback(th, h);
    const double step = 1e-6;
    for (Eigen::Index i = 0; i < th.size(); ++i) {
      RealVector tp = th;
      RealVector tm = th;
      tp(i) += step;
      tm(i) -= step;
      const double fd = (obj(par.sigma_of(tp), nullptr) - obj(par.sigma_of(tm), nullptr)) / (2.0 * step);
      EXPECT_NEAR(g(i), fd, 1e-5 * std::max(1.0, std::abs(fd))) << "alpha " << a << " coordinate " << i;
    }
  }
}

TEST(FidelityPerturbedLower, PurePointMatchesEntropy) {
  const auto psi = random_pure(SubsystemDims({{"A", 2}, {"B", 2}}), 71);
  for (double a : {1.25, 1.5}) {
    const double v = lemma5_lower(psi, psi.density(), kAB, a, 1.0);
    EXPECT_NEAR(v, renyi_entropy(partial_trace(psi, {"A"}), 1.0 / (2.0 - a)), 1e-12);
    EXPECT_LE(v, rree_lower(psi.density(), kAB, a) + 1e-9);
  }
}

TEST(FidelityPerturbedLower, VanishingFidelityIsMinusInfinity) {
  const auto psi = maximally_entangled(2);
  const auto orth = basis_state(psi.dims(), 1).density();
  EXPECT_EQ(lemma5_lower(psi, orth, kAB, 1.5, 0.0), -kInf);
}

TEST(FidelityPerturbedLower, DepolarizedBellPair) {
  const auto psi = maximally_entangled(2);
  const auto rho = depolarized_phi2(0.1);
  const double f = fidelity(psi, rho);
  EXPECT_NEAR(f, std::sqrt(0.925), 1e-12);
  EXPECT_LE(lemma5_lower(psi, rho, kAB, 2.0, f), coherent_information_renyi(rho, kAB, 2.0) + 1e-9);
}

TEST(FidelityPerturbedLower, RejectsOverstatedFidelity) {
  const auto psi = maximally_entangled(2);
  try {
    lemma5_lower(psi, depolarized_phi2(0.5), kAB, 1.5, 0.99);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FidelityPreconditionFailed);
  }
}

TEST(VanDamHayden, EqualStatesGiveOrderGap) {
  const auto rho = random_density(SubsystemDims::single(3), 81);
  EXPECT_GE(van_dam_hayden_gap(rho, rho, 0.5), 0.0);
  EXPECT_NEAR(van_dam_hayden_gap(rho, rho, 0.5), renyi_entropy(rho, 0.5) - renyi_entropy(rho, kInf), 1e-12);
}

TEST(VanDamHayden, RandomPairsNonnegative) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto rho = random_density(SubsystemDims::single(4), 1000 + s);
    const auto sigma = random_density(SubsystemDims::single(4), 2000 + s);
    for (double a : {0.5, 0.6, 0.75, 0.9}) EXPECT_GE(van_dam_hayden_gap(rho, sigma, a), -1e-9);
  }
}
