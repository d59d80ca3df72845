#include <gtest/gtest.h>

#include <cmath>

#include "renyi/converse.hpp"

using namespace renyi;

namespace {

// Phi_2 on (A, R) with |0> on B, registers ordered A, B, R.
PureState phi2_ar_zero_b() {
  const SubsystemDims dims({{"A", 2}, {"B", 2}, {"R", 2}});
  Vector v = Vector::Zero(8);
  v(0) = v(5) = 1.0 / std::sqrt(2.0);
  return PureState::normalized(v, dims);
}

PureState random_tripartite(std::uint64_t seed) {
  return random_pure(SubsystemDims({{"A", 2}, {"B", 2}, {"R", 2}}), seed);
}

ConverseInput input_for(TheoremId id, std::uint64_t seed) {
  switch (id) {
    case TheoremId::MergeEnt:
    case TheoremId::MergeCc: return ConverseInput::tripartite(random_tripartite(seed));
    case TheoremId::Concentrate: return ConverseInput::bipartite(random_pure(SubsystemDims({{"A", 3}, {"B", 3}}), seed));
    case TheoremId::Schumacher: return ConverseInput::source(random_density(SubsystemDims::single(3), seed));
  }
  return ConverseInput{};
}

}  // namespace

TEST(MergeEnt, WorkedCaseIsMinusOneEighth) {
  const auto r = merge_ent_bound(phi2_ar_zero_b(), 2.0, 10, 5.0, 0.0);
  EXPECT_NEAR(r.term_breakdown.at("S_{2-alpha}(B)"), 0.0, 1e-12);
  EXPECT_NEAR(r.term_breakdown.at("S_{1/(2-alpha)}(AB)"), 1.0, 1e-12);
  EXPECT_NEAR(r.exponent_per_copy, -0.125, 1e-12);
  EXPECT_NEAR(r.log_fidelity_bound, -1.25, 1e-12);
  EXPECT_FALSE(r.vacuous);
}

TEST(MergeEnt, VanishesAsOrderApproachesOne) {
  const auto r = merge_ent_bound(phi2_ar_zero_b(), 1.0 + 1e-9, 1, 0.5, 0.0);
  EXPECT_LE(std::abs(r.log_fidelity_bound), 1e-8);
}

TEST(MergeCc, WorkedCaseIsMinusOneTwelfth) {
  const auto r = merge_cc_bound(phi2_ar_zero_b(), 0.75, 12, 12.0);
  EXPECT_NEAR(r.term_breakdown.at("bracket"), -1.0, 1e-12);
  EXPECT_NEAR(r.exponent_per_copy, -1.0 / 12.0, 1e-12);
  EXPECT_NEAR(r.log_fidelity_bound, -1.0, 1e-12);
}

TEST(MergeCc, ProductStateNeedsNoCommunication) {
  const auto psi = basis_state(SubsystemDims({{"A", 2}, {"B", 2}, {"R", 2}}), 0);
  const auto zero = merge_cc_bound(psi, 0.75, 5, 0.0);
  EXPECT_NEAR(zero.term_breakdown.at("bracket"), 0.0, 1e-12);
  const auto some = merge_cc_bound(psi, 0.75, 5, 2.0);
  EXPECT_GT(some.exponent_per_copy, 0.0);
  EXPECT_TRUE(some.vacuous);
}

TEST(Concentrate, MaximallyEntangledAtFullRateIsZero) {
  for (double a : {1.1, 1.5, 2.0}) {
    const auto r = concentrate_bound(maximally_entangled(2), a, 7, 7.0);
    EXPECT_NEAR(r.exponent_per_copy, 0.0, 1e-12);
  }
}

TEST(Concentrate, SchmidtEightTwoAtRateNineTenths) {
  const auto psi = schmidt_state({0.8, 0.2});
  const auto at2 = concentrate_bound(psi, 2.0, 100, 90.0);
  EXPECT_NEAR(at2.exponent_per_copy, 0.025, 1e-12);
  EXPECT_TRUE(at2.vacuous);
  const auto at11 = concentrate_bound(psi, 1.1, 100, 90.0);
  EXPECT_NEAR(at11.term_breakdown.at("S_{2-alpha}(A)"), 0.7447246453912140, 1e-12);
  EXPECT_NEAR(at11.exponent_per_copy, -0.0070579706640357, 1e-12);
}

TEST(Concentrate, ZeroTargetIsVacuous) {
  const auto r = concentrate_bound(schmidt_state({0.8, 0.2}), 1.5, 10, 0.0);
  EXPECT_GE(r.exponent_per_copy, 0.0);
  EXPECT_TRUE(r.vacuous);
}

TEST(Schumacher, FlatSpectrum) {
  const auto r = schumacher_bound(DensityMatrix::maximally_mixed(SubsystemDims::single(2)), 0.75, 10, 5.0);
  EXPECT_NEAR(r.exponent_per_copy, -1.0 / 12.0, 1e-12);
}

TEST(Schumacher, SkewedQubit) {
  const auto r = schumacher_bound(diagonal_state({0.9, 0.1}), 0.75, 10, 3.0);
  EXPECT_NEAR(r.term_breakdown.at("beta"), 1.5, 1e-15);
  EXPECT_NEAR(r.term_breakdown.at("S_beta(A)"), 0.3510744405468787, 1e-12);
  EXPECT_NEAR(r.exponent_per_copy, -0.0085124067578131, 1e-12);
}

TEST(Schumacher, RateAtLogDIsVacuous) {
  for (double a : {0.55, 0.75, 0.95}) EXPECT_TRUE(schumacher_bound(diagonal_state({0.9, 0.1}), a, 4, 4.0).vacuous);
}

TEST(ConverseBound, OrderOutsideIntervalRejected) {
  const auto in = ConverseInput::source(diagonal_state({0.9, 0.1}));
  EXPECT_THROW(converse_bound(TheoremId::Schumacher, in, 1.0, 1, rates_for(TheoremId::Schumacher, 0.3, 1)), Error);
  EXPECT_THROW(converse_bound(TheoremId::Schumacher, in, 0.5, 1, rates_for(TheoremId::Schumacher, 0.3, 1)), Error);
  EXPECT_THROW(converse_bound(TheoremId::Concentrate, in, 1.0, 1, rates_for(TheoremId::Concentrate, 0.3, 1)), Error);
  EXPECT_NO_THROW(converse_bound(TheoremId::Concentrate, in, 2.0, 1, rates_for(TheoremId::Concentrate, 0.3, 1)));
}

TEST(ConverseBound, MissingRegisterReported) {
  try {
    ConverseInput::tripartite(maximally_entangled(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingRegister);
  }
}

TEST(ConverseBound, LinearInCopies) {
  const auto in = ConverseInput::source(diagonal_state({0.9, 0.1}));
  const auto one = converse_bound(TheoremId::Schumacher, in, 0.7, 1, rates_for(TheoremId::Schumacher, 0.3, 1));
  const auto many = converse_bound(TheoremId::Schumacher, in, 0.7, 37, rates_for(TheoremId::Schumacher, 0.3, 37));
  EXPECT_NEAR(many.log_fidelity_bound, 37.0 * one.log_fidelity_bound, 1e-12);
}

TEST(OptimizeAlpha, AtLeastAsGoodAsFixedOrder) {
  const auto in = ConverseInput::source(diagonal_state({0.9, 0.1}));
  const auto best = optimize_alpha(TheoremId::Schumacher, in, 1, rates_for(TheoremId::Schumacher, 0.3, 1));
  EXPECT_LE(best.exponent_per_copy, -0.0085124067578131);
  EXPECT_NEAR(best.exponent_per_copy, -0.0103834299281125, 1e-9);
  EXPECT_TRUE(alpha_interval(TheoremId::Schumacher).contains(best.alpha));
}

TEST(OptimizeAlpha, RateAtOptimalValueGivesZero) {
  const auto in = ConverseInput::source(diagonal_state({0.9, 0.1}));
  const double h = in.entropy("A", 1.0);
  const auto best = optimize_alpha(TheoremId::Schumacher, in, 1, rates_for(TheoremId::Schumacher, h, 1));
  EXPECT_NEAR(best.exponent_per_copy, 0.0, 1e-6);
}

TEST(OptimizeAlpha, SignStructure) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    for (TheoremId id : kAllTheorems) {
      const auto in = input_for(id, 50 + s);
      const double limit_rate = -von_neumann_bracket(id, in, 0.0);
      // Bad side: rates that beat the optimal rate must decay.
      const double sign = (id == TheoremId::Concentrate) ? 1.0 : -1.0;
      const double bad = limit_rate + sign * 0.05;
      if (bad >= 0.0) {
        const auto r = optimize_alpha(id, in, 1, rates_for(id, bad, 1));
        EXPECT_LT(r.exponent_per_copy, -1e-9) << to_string(id) << " seed " << s;
      }
      const double good = limit_rate - sign * 0.05;
      if (good < 0.0) continue;
      const auto [lo, hi] = search_interval(id);
      for (int i = 0; i < 50; ++i) {
        const double a = lo + (hi - lo) * i / 49.0;
        const auto r = converse_bound(id, in, a, 1, rates_for(id, good, 1));
        EXPECT_GE(r.exponent_per_copy, -1e-9) << to_string(id) << " alpha " << a;
      }
    }
  }
}

TEST(Bracket, ContinuousAtOrderOne) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    for (TheoremId id : kAllTheorems) {
      const auto in = input_for(id, 200 + s);
      const double rate = 0.4;
      const double vn = von_neumann_bracket(id, in, rate);
      const auto iv = alpha_interval(id);
      const double a = iv.hi == 1.0 ? 1.0 - 1e-5 : 1.0 + 1e-5;
      const auto r = converse_bound(id, in, a, 1, rates_for(id, rate, 1));
      EXPECT_NEAR(r.term_breakdown.at("bracket"), vn, 1e-4) << to_string(id) << " seed " << s;
    }
  }
}

TEST(TheoremNames, RoundTrip) {
  for (TheoremId id : kAllTheorems) EXPECT_EQ(parse_theorem(to_string(id)), id);
  EXPECT_THROW(parse_theorem("teleport"), Error);
}
