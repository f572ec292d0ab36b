#include <cmath>

#include "test_util.hpp"

namespace {

using namespace compagency;

TEST(FactorPairwiseDistinct, TwoChildrenPoolBack) {
  const Dist p = make_dist({0.1, 0.2, 0.3, 0.4});
  const Factorization fz = factor_pairwise_distinct(p, Weights::uniform(2), 1);
  EXPECT_LE(tv(log_pool(fz.decomposition.children(), fz.decomposition.weights()), p), 1e-12);
}

TEST(FactorPairwiseDistinct, FourDistinctChildrenOnFiveOutcomes) {
  const Dist p = make_dist({0.3, 0.1, 0.25, 0.15, 0.2});
  const Factorization fz = factor_pairwise_distinct(p, Weights({0.4, 0.3, 0.2, 0.1}), 5);
  const auto kids = fz.decomposition.children();
  ASSERT_EQ(kids.size(), 4u);
  for (std::size_t i = 0; i < kids.size(); ++i) {
    EXPECT_GT(tv(kids[i], p), tol::kDistinctTv);
    for (std::size_t j = i + 1; j < kids.size(); ++j) EXPECT_GT(tv(kids[i], kids[j]), tol::kDistinctTv);
  }
  EXPECT_EQ(fz.provenance.absorbing_index, 0u);
  EXPECT_GT(fz.provenance.min_pairwise_tv, tol::kDistinctTv);
}

TEST(FactorPairwiseDistinct, ZeroWeightChildrenAreIrrelevant) {
  const Dist p = make_dist({0.3, 0.3, 0.4});
  const Weights w({0.7, 0.3, 0.0, 0.0});
  const Factorization fz = factor_pairwise_distinct(p, w, 3);
  std::vector<Dist> swapped(fz.decomposition.children().begin(), fz.decomposition.children().end());
  swapped[2] = make_dist({0.9, 0.05, 0.05});
  swapped[3] = make_dist({0.05, 0.05, 0.9});
  EXPECT_LE(tv(log_pool(swapped, w), p), 1e-12);
  EXPECT_GT(tv(fz.decomposition.child(2), fz.decomposition.child(3)), tol::kDistinctTv);
}

TEST(FactorPairwiseDistinct, DeterministicPerSeed) {
  const Dist p = make_dist({0.1, 0.2, 0.7});
  const auto a = factor_pairwise_distinct(p, Weights::uniform(3), 9);
  const auto b = factor_pairwise_distinct(p, Weights::uniform(3), 9);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(tv(a.decomposition.child(i), b.decomposition.child(i)), 0.0);
}

TEST(FactorPairwiseDistinct, ConcentratedWeightsRejected) {
  EXPECT_ERROR_KIND(factor_pairwise_distinct(make_dist({0.5, 0.5}), Weights({1.0, 0.0}), 1),
                    ErrorKind::WeightTooConcentrated);
}

TEST(FactorWithFixed, KeepsParentAsFixedChild) {
  const Dist p = make_dist({0.2, 0.5, 0.3});
  const std::vector<Dist> fixed{p};
  const Factorization fz = factor_with_fixed(p, fixed, Weights::uniform(3), 4);
  EXPECT_EQ(tv(fz.decomposition.child(0), p), 0.0);
  EXPECT_LE(fz.decomposition.witness_tv(), 1e-12);
}

TEST(FactorWithFixed, ExtremeFixedChildrenAreCompensated) {
  const Dist p = make_dist({0.25, 0.25, 0.25, 0.25});
  const std::vector<Dist> fixed{make_dist({0.97, 0.01, 0.01, 0.01}), make_dist({0.01, 0.01, 0.01, 0.97})};
  const Factorization fz = factor_with_fixed(p, fixed, Weights({0.3, 0.3, 0.2, 0.2}), 8);
  EXPECT_LE(tv(log_pool(fz.decomposition.children(), fz.decomposition.weights()), p), 1e-12);
}

TEST(FactorWithFixed, NeedsTwoMoreComponents) {
  const Dist p = make_dist({0.2, 0.5, 0.3});
  const std::vector<Dist> fixed{p, p};
  EXPECT_ERROR_KIND(factor_with_fixed(p, fixed, Weights::uniform(3), 1), ErrorKind::PreconditionViolation);
}

TEST(CompatibleSplit, ZeroDirectionClones) {
  const Dist c = make_dist({0.2, 0.5, 0.3});
  auto [a, b] = compatible_split(c, 0.4, ScoreFn::zero(c.space()));
  EXPECT_LE(tv(a, c), 1e-15);
  EXPECT_LE(tv(b, c), 1e-15);
}

TEST(CompatibleSplit, DepressingDirectionEmptiesTarget) {
  const Dist c = make_dist({0.2, 0.5, 0.3});
  auto [a, b] = compatible_split(c, 0.5, ScoreFn(c.space(), std::vector<double>{0.0, -200.0, 0.0}));
  EXPECT_LT(a[1], 1e-40);
}

TEST(CompatibleSplit, RoundTripAndErrors) {
  Rng rng(41);
  for (int k = 0; k < 200; ++k) {
    const OutcomeSpace s(rng.index(2, 8));
    const Dist c = random_dist(rng, s);
    const ScoreFn g(s, normal_vector(rng, s.size(), 2.0));
    const double alpha = rng.uniform(0.05, 0.95);
    auto [a, b] = compatible_split(c, alpha, g);
    const std::vector<Dist> pair{a, b};
    EXPECT_LE(tv(log_pool(pair, Weights({alpha, 1 - alpha})), c), 1e-12);
  }
  const Dist c = make_dist({0.5, 0.5});
  EXPECT_ERROR_KIND(compatible_split(c, 1.0, ScoreFn::zero(c.space())), ErrorKind::ParamOutOfRange);
}

TEST(SplitInvariance, CloneDepressingAndRandom) {
  const std::vector<Dist> kids{make_dist({0.2, 0.5, 0.3}), make_dist({0.4, 0.4, 0.2}), make_dist({0.1, 0.1, 0.8})};
  const Decomposition dec = Decomposition::from_children(kids, Weights({0.5, 0.3, 0.2}));
  EXPECT_LE(split_invariance_check(dec, 1, 0.5, ScoreFn::zero(dec.space())).tv_delta, 1e-12);
  const SplitCheck deep = split_invariance_check(dec, 0, 0.5, ScoreFn(dec.space(), std::vector<double>{-20.0, 0, 0}));
  EXPECT_LE(deep.tv_delta, 1e-10);
  EXPECT_EQ(deep.split.size(), 4u);
  Rng rng(43);
  const SplitCheck r = split_invariance_check(dec, 2, 0.37, ScoreFn(dec.space(), normal_vector(rng, 3)));
  EXPECT_LE(r.tv_delta, 1e-10);
  EXPECT_ERROR_KIND(split_invariance_check(dec, 3, 0.5, ScoreFn::zero(dec.space())), ErrorKind::IndexOutOfRange);
}

TEST(SplitInvariance, ClonesKeepEveryGap) {
  const std::vector<Dist> kids{make_dist({0.2, 0.5, 0.3}), make_dist({0.4, 0.4, 0.2})};
  const Decomposition dec = Decomposition::from_children(kids, Weights({0.6, 0.4}));
  const SplitCheck c = split_invariance_check(dec, 0, 0.3, ScoreFn::zero(dec.space()));
  const WelfareReport before = unanimity_report(dec), after = unanimity_report(c.split);
  EXPECT_NEAR(after.gaps[0], before.gaps[0], 1e-12);
  EXPECT_NEAR(after.gaps[1], before.gaps[0], 1e-12);
  EXPECT_NEAR(after.gaps[2], before.gaps[1], 1e-12);
}

TEST(ParentBenefit, UniformParentRejected) {
  EXPECT_ERROR_KIND(parent_benefit_counterexample(make_dist({1, 1, 1}), 2.0, 0.5, 2, 1.0), ErrorKind::UniformParent);
}

TEST(ParentBenefit, ParentGainsFromSharpening) {
  const Dist p1 = make_dist({0.5, 0.3, 0.2});
  const ParentBenefitReport r = parent_benefit_counterexample(p1, 2.0, 0.5, 2, 1.0);
  EXPECT_GT(r.parent_gap, 0.0);
  EXPECT_NEAR(r.parent_gap, tilt_mean_log(p1, 2.0) - expectation(p1, log_of(p1)), 1e-14);
  EXPECT_LE(r.pool_tv, 1e-12);
  EXPECT_LE(r.binary_bound, r.kl_value + 1e-12);
}

TEST(ParentBenefit, SweepFindsNegativeSubagentGap) {
  const Dist p1 = make_dist({0.5, 0.3, 0.2});
  const auto lambdas = default_lambda_schedule();
  const ParentBenefitSweep sweep = parent_benefit_sweep(p1, 2.0, 0.5, 2, lambdas);
  ASSERT_TRUE(sweep.first_negative.has_value());
  const ParentBenefitReport& r = sweep.steps[*sweep.first_negative];
  EXPECT_GT(r.parent_gap, 0.0);
  EXPECT_LT(r.sub_gap, 0.0);
  for (std::size_t i = 0; i < *sweep.first_negative; ++i) EXPECT_GE(sweep.steps[i].sub_gap, 0.0);
}

}  // namespace
