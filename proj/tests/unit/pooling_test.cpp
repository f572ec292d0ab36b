#include <cmath>

#include "test_util.hpp"

namespace {

using namespace compagency;
using compagency::testing::d;
namespace ref = compagency::reference;

TEST(LogPool, IdenticalAgentsReturnThatAgent) {
  const Dist p = make_dist({0.1, 0.6, 0.3});
  const std::vector<Dist> agents{p, p, p};
  EXPECT_LE(tv(log_pool(agents, Weights({0.2, 0.5, 0.3})), p), 1e-15);
}

TEST(LogPool, SymmetricBinaryGivesHalf) {
  const std::vector<Dist> agents{make_dist({0.2, 0.8}), make_dist({0.8, 0.2})};
  const Dist pool = log_pool(agents, Weights::uniform(2));
  EXPECT_NEAR(pool[0], 0.5, 1e-15);
}

TEST(LogPool, MatchesLinearSpaceOracle) {
  const std::vector<Dist> agents{make_dist({0.2, 0.3, 0.5}), make_dist({0.6, 0.1, 0.3})};
  const Weights w({0.35, 0.65});
  const Dist pool = log_pool(agents, w);
  EXPECT_LE(static_cast<double>(ref::tv(pool.p(), ref::log_pool(agents, w.beta()))), 1e-15);
}

TEST(LogPool, NormalizerIsLogSumOfProducts) {
  const std::vector<Dist> agents{make_dist({0.2, 0.8}), make_dist({0.5, 0.5})};
  const auto diag = log_pool_with_normalizer(agents, Weights::uniform(2));
  const double z = std::sqrt(0.2 * 0.5) + std::sqrt(0.8 * 0.5);
  EXPECT_NEAR(diag.log_normalizer, std::log(z), 1e-15);
}

TEST(LogPool, SurvivesTinyMasses) {
  const std::vector<Dist> agents{make_dist({1e-300, 1.0}), make_dist({1.0, 1e-300})};
  const Dist pool = log_pool(agents, Weights::uniform(2));
  EXPECT_NEAR(pool[0], 0.5, 1e-15);
}

TEST(LinearPool, IdenticalDegenerateAndOracle) {
  const Dist p = make_dist({0.1, 0.6, 0.3}), q = make_dist({0.5, 0.25, 0.25});
  const std::vector<Dist> same{p, p};
  EXPECT_LE(tv(linear_pool(same, Weights::uniform(2)), p), 1e-16);
  const std::vector<Dist> two{p, q};
  EXPECT_EQ(tv(linear_pool(two, Weights({1.0, 0.0})), p), 0.0);
  const Weights w({0.3, 0.7});
  EXPECT_LE(static_cast<double>(ref::tv(linear_pool(two, w).p(), ref::linear_pool(two, w.beta()))), 1e-16);
}

TEST(Pool, InputErrors) {
  const std::vector<Dist> agents{make_dist({0.5, 0.5}), make_dist({1, 1, 1})};
  EXPECT_ERROR_KIND(log_pool(agents, Weights::uniform(2)), ErrorKind::SpaceMismatch);
  const std::vector<Dist> ok{make_dist({0.5, 0.5}), make_dist({0.2, 0.8})};
  EXPECT_ERROR_KIND(linear_pool(ok, Weights::uniform(3)), ErrorKind::LengthMismatch);
}

TEST(Decomposition, RevalidatesWitness) {
  const std::vector<Dist> agents{make_dist({0.2, 0.8}), make_dist({0.6, 0.4})};
  const Decomposition ok = Decomposition::from_children(agents, Weights::uniform(2));
  EXPECT_LE(ok.witness_tv(), 1e-12);
  EXPECT_ERROR_KIND(Decomposition(make_dist({0.5, 0.5}), agents, Weights::uniform(2)), ErrorKind::NotAPoolWitness);
}

TEST(Decomposition, NeedsTwoChildren) {
  const Dist p = make_dist({0.2, 0.8});
  EXPECT_ERROR_KIND(Decomposition::from_children({p}, Weights({1.0})), ErrorKind::PreconditionViolation);
}

TEST(TiltRepresentation, ChildrenEqualParentGiveZeroTilts) {
  const Dist p = make_dist({0.2, 0.3, 0.5});
  const Decomposition dec = Decomposition::from_children({p, p, p}, Weights({0.2, 0.3, 0.5}));
  for (const ScoreFn& h : tilt_representation(dec))
    for (double v : h.values()) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(TiltRepresentation, RoundTripAndWeightedSumVanish) {
  Rng rng(21);
  for (int k = 0; k < 200; ++k) {
    const std::size_t m = rng.index(2, 9), n = rng.index(2, 5);
    std::vector<Dist> kids;
    for (std::size_t i = 0; i < n; ++i) kids.push_back(random_dist(rng, OutcomeSpace(m)));
    const Decomposition dec = Decomposition::from_children(kids, floored_weights(rng, n, 0.02));
    const auto h = tilt_representation(dec);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LE(tv(exponential_tilt(dec.parent(), h[i]), dec.child(i)), 1e-10);
    for (std::size_t o = 0; o < m; ++o) {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) s += dec.weights()[i] * h[i][o];
      EXPECT_LE(std::abs(s), 1e-9);
    }
  }
}

TEST(TiltRepresentation, RejectsNonWitness) {
  const Dist p = make_dist({0.5, 0.5});
  const std::vector<Dist> kids{make_dist({0.2, 0.8}), make_dist({0.3, 0.7})};
  EXPECT_ERROR_KIND(tilt_representation(p, kids, Weights::uniform(2)), ErrorKind::NotAPoolWitness);
}

}  // namespace
