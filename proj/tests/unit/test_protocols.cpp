#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "renyi/protocols.hpp"

using namespace renyi;

namespace {

// Kept mass by listing every string of rho^{(x) n} explicitly.
double eta_by_strings(const std::vector<double>& lambda, int n, long keep) {
  std::vector<double> probs{1.0};
  for (int c = 0; c < n; ++c) {
    std::vector<double> next;
    for (double p : probs) {
      for (double l : lambda) next.push_back(p * l);
    }
    probs = std::move(next);
  }
  std::sort(probs.begin(), probs.end(), std::greater<>());
  double total = 0.0;
  for (long i = 0; i < std::min<long>(keep, static_cast<long>(probs.size())); ++i) total += probs[i];
  return total;
}

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

TEST(FloorPow2, SnapsNearIntegers) {
  EXPECT_EQ(floor_pow2(5.0), BigInt(32));
  EXPECT_EQ(floor_pow2(5.0 - 1e-12), BigInt(32));
  EXPECT_EQ(floor_pow2(0.5), BigInt(1));
  EXPECT_EQ(floor_pow2(1.5), BigInt(2));
  EXPECT_EQ(floor_pow2(200.0), BigInt(1) << 200);
  EXPECT_NEAR(big_log2(floor_pow2(150.3)), 150.3, 1e-12);
  EXPECT_THROW(floor_pow2(-1.0), Error);
}

TEST(TypeClasses, MultiplicitiesAndMassSumToOne) {
  const auto classes = type_classes({0.5, 0.3, 0.2}, 12);
  EXPECT_EQ(classes.size(), 91u);
  BigInt strings = 0;
  double mass = 0.0;
  for (const auto& c : classes) {
    strings += c.multiplicity;
    mass += c.mass();
  }
  EXPECT_EQ(strings, BigInt(531441));
  EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST(TypeClasses, HugeCountsStayExact) {
  const auto classes = type_classes({0.5, 0.5}, 10000);
  EXPECT_EQ(classes.size(), 10001u);
  EXPECT_NEAR(classes[5000].log2_multiplicity, 9993.030359678113, 1e-9);
  EXPECT_THROW(type_classes({0.5, 0.5}, 10001), Error);
}

TEST(SchumacherMass, MatchesStringEnumeration) {
  const std::vector<std::vector<double>> spectra{{0.9, 0.1}, {0.6, 0.4}, {0.5, 0.3, 0.2}};
  for (const auto& lambda : spectra) {
    const double log_d = std::log2(static_cast<double>(lambda.size()));
    for (int n = 1; n <= 8; ++n) {
      for (double frac : {0.0, 0.2, 0.45, 0.7, 1.0}) {
        const double rate = frac * log_d;
        const auto res = schumacher_mass(lambda, n, rate);
        const long keep = std::stol(res.kept_dimension);
        EXPECT_NEAR(res.eta, eta_by_strings(lambda, n, keep), 1e-12) << "n " << n << " rate " << rate;
      }
    }
  }
}

TEST(SchumacherMass, FlatSpectrumIsExactPower) {
  for (int n : {4, 10, 30}) {
    const auto res = schumacher_mass({0.5, 0.5}, n, 0.5);
    EXPECT_NEAR(res.eta, std::exp2(-0.5 * n), 1e-14);
  }
}

TEST(SchumacherMass, FrozenValues) {
  const auto ten = schumacher_mass({0.9, 0.1}, 10, 0.5);
  EXPECT_EQ(ten.kept_dimension, "32");
  EXPECT_NEAR(ten.eta, 0.8264970432, 1e-12);
  const auto low = schumacher_mass({0.9, 0.1}, 200, 0.3);
  EXPECT_NEAR(low.eta, 0.0186416662447326, 1e-12);
  ASSERT_TRUE(low.postselected_fidelity.has_value());
  EXPECT_NEAR(*low.postselected_fidelity, 0.1365344873822455, 1e-12);
  EXPECT_NEAR(schumacher_mass({0.9, 0.1}, 400, 0.6).eta, 0.9993477821135298, 1e-12);
}

TEST(SchumacherMass, FullRateKeepsEverything) {
  const auto res = schumacher_mass({0.7, 0.2, 0.1}, 6, std::log2(3.0));
  EXPECT_NEAR(res.eta, 1.0, 1e-12);
  EXPECT_NEAR(res.fidelity_lower, 1.0, 1e-12);
}

TEST(SchumacherMass, RateOutsideRangeRejected) {
  try {
    schumacher_mass({0.9, 0.1}, 10, 1.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RateOutOfRange);
  }
}

TEST(SchumacherExact, FullRateIsPerfect) {
  const auto res = schumacher_exact_small(diagonal_state({0.9, 0.1}), 1, 1.0);
  ASSERT_TRUE(res.fidelity_exact.has_value());
  EXPECT_NEAR(*res.fidelity_exact, 1.0, 1e-12);
}

TEST(SchumacherExact, SingleCopyZeroRate) {
  const auto res = schumacher_exact_small(diagonal_state({0.9, 0.1}), 1, 0.0);
  EXPECT_NEAR(*res.fidelity_exact, 0.9, 1e-12);
  EXPECT_GE(*res.fidelity_exact, res.fidelity_lower - 1e-9);
}

TEST(SchumacherExact, AgreesWithKeptMass) {
  for (int n = 1; n <= 6; ++n) {
    for (double rate : {0.0, 0.25, 0.5, 0.75}) {
      const auto res = schumacher_exact_small(diagonal_state({0.9, 0.1}), n, rate);
      EXPECT_GE(*res.fidelity_exact, res.fidelity_lower - 1e-9) << "n " << n << " rate " << rate;
      EXPECT_LE(*res.fidelity_exact, *res.postselected_fidelity + 1e-9);
    }
  }
  const auto four = schumacher_exact_small(diagonal_state({0.9, 0.1}), 4, 0.5);
  EXPECT_NEAR(four.eta, 0.8748, 1e-12);
  EXPECT_NEAR(*four.fidelity_exact, 0.8748, 1e-9);
}

TEST(SchumacherExact, RotatedEigenbasisGivesSameValue) {
  const auto rho = random_density(SubsystemDims::single(2), 5);
  const RealVector ev = rho.spectrum();
  const auto rotated = schumacher_exact_small(rho, 3, 0.4);
  const auto diag = schumacher_exact_small(diagonal_state({ev(0), ev(1)}), 3, 0.4);
  EXPECT_NEAR(*rotated.fidelity_exact, *diag.fidelity_exact, 1e-10);
}

TEST(SchumacherExact, TooLargeRejected) {
  EXPECT_THROW(schumacher_exact_small(diagonal_state({0.9, 0.1}), 7, 0.5), Error);
}

TEST(Concentrate, BellPairSingleCopy) {
  const auto res = concentrate_simulate({0.5, 0.5}, 1, 1.0);
  EXPECT_NEAR(res.fidelity_lower, 1.0, 1e-12);
  EXPECT_NEAR(*res.success_prob, 1.0, 1e-12);
}

TEST(Concentrate, FlatSpectrumSuccessIsBinomialTail) {
  for (int n : {10, 16, 20}) {
    const double logL = std::floor(0.9 * n);
    const auto res = concentrate_simulate({0.5, 0.5}, n, logL, ConcentrationClasses::Type);
    double want = 0.0;
    for (int k = 0; k <= n; ++k) {
      if (binomial(n, k) >= std::exp2(logL)) want += binomial(n, k) * std::exp2(-n);
    }
    EXPECT_NEAR(*res.success_prob, want, 1e-12) << "n " << n;
    // Without resolving types the flat state is already maximally entangled.
    EXPECT_NEAR(*concentrate_simulate({0.5, 0.5}, n, logL).success_prob, 1.0, 1e-12);
  }
}

TEST(Concentrate, GroupingIrrelevantForDistinctEigenvalues) {
  const auto a = concentrate_simulate({0.8, 0.2}, 120, 80.0);
  const auto b = concentrate_simulate({0.8, 0.2}, 120, 80.0, ConcentrationClasses::Type);
  EXPECT_EQ(a.fidelity_lower, b.fidelity_lower);
  EXPECT_EQ(*a.success_prob, *b.success_prob);
}

TEST(Concentrate, FrozenValues) {
  const auto bad = concentrate_simulate({0.8, 0.2}, 200, 180.0);
  EXPECT_NEAR(bad.fidelity_lower, 2.376148223095356e-4, 1e-15);
  EXPECT_NEAR(*bad.fidelity_exact, 4.547529681524059e-3, 1e-14);
  EXPECT_NEAR(*bad.success_prob, 2.553628252572808e-6, 1e-17);
  EXPECT_LE(bad.fidelity_lower, 0.01);
  const auto good = concentrate_simulate({0.8, 0.2}, 500, 300.0);
  EXPECT_NEAR(good.fidelity_lower, 0.9987578099685169, 1e-12);
  EXPECT_NEAR(*good.success_prob, 0.9983730397577515, 1e-12);
  const auto flat = concentrate_simulate({0.5, 0.5}, 10, 9.0, ConcentrationClasses::Type);
  EXPECT_NEAR(flat.fidelity_lower, 0.5776664654247309, 1e-12);
}

TEST(Concentrate, YieldDistributionIsNormalized) {
  const auto res = concentrate_simulate({0.6, 0.3, 0.1}, 30, 20.0);
  double mass = 0.0;
  for (const auto& [ly, p] : res.yield_distribution) mass += p;
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_GT(*res.expected_yield, 0.0);
}

TEST(Confront, SchumacherSeriesHasNoViolations) {
  std::vector<long> ns;
  for (long n = 10; n <= 200; n += 10) ns.push_back(n);
  const auto rep = confront_series(TheoremId::Schumacher, {0.9, 0.1}, ns, 0.3);
  EXPECT_EQ(rep.violations, 0);
  EXPECT_NO_THROW(require_no_violations(rep));
  for (const auto& row : rep.rows) EXPECT_LE(*row.achieved, row.bound_fidelity + kConfrontTol);
}

TEST(Confront, FlatConcentrationAtFullRate) {
  const auto rep = confront_series(TheoremId::Concentrate, {0.5, 0.5}, {1, 5, 20}, 1.0);
  EXPECT_EQ(rep.violations, 0);
  for (const auto& row : rep.rows) {
    EXPECT_NEAR(*row.achieved, 1.0, 1e-12);
    EXPECT_NEAR(row.bound_fidelity, 1.0, 1e-12);
  }
}

TEST(Confront, InflatedResultIsFlagged) {
  const auto in = ConverseInput::from_spectra({{"A", (RealVector(2) << 0.9, 0.1).finished()}});
  ProtocolRunResult fake = schumacher_mass({0.9, 0.1}, 200, 0.3);
  fake.fidelity_lower = 0.9;
  const auto bound = optimize_alpha(TheoremId::Schumacher, in, 200, rates_for(TheoremId::Schumacher, 0.3, 200));
  const auto rep = confront_bounds(TheoremId::Schumacher, {fake}, {bound});
  EXPECT_EQ(rep.violations, 1);
  try {
    require_no_violations(rep);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BoundViolation);
    EXPECT_NE(std::string(e.what()).find("S_beta(A)"), std::string::npos);
  }
}

TEST(Confront, MergeTheoremsAreBoundOnly) {
  const auto rep = confront_bounds(TheoremId::MergeEnt, {}, {});
  EXPECT_TRUE(rep.bound_only);
}
