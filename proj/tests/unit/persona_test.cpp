#include <cmath>

#include "test_util.hpp"

namespace {

using namespace compagency;

Decomposition sample_decomposition(Rng& rng, std::size_t m, std::size_t n, double floor = 0.1) {
  std::vector<Dist> kids;
  for (std::size_t i = 0; i < n; ++i) kids.push_back(random_dist(rng, OutcomeSpace(m)));
  return Decomposition::from_children(kids, floored_weights(rng, n, floor));
}

// Uniform parent over four outcomes with children e^{h}, e^{-h} and uniform,
// so the first two profiles are exact negatives and the third is zero.
Decomposition mirrored(const std::vector<double>& h) {
  const OutcomeSpace s(h.size());
  std::vector<double> neg(h.size());
  for (std::size_t o = 0; o < h.size(); ++o) neg[o] = -h[o];
  const std::vector<Dist> kids{Dist::from_logits(s, h), Dist::from_logits(s, neg), Dist::uniform(s)};
  return Decomposition::from_children(kids, Weights::uniform(3));
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

TEST(LogProfile, RequiresCentering) {
  const Dist p = make_dist({0.2, 0.8});
  EXPECT_ERROR_KIND(LogProfile(p, ScoreFn::constant(p.space(), 1.0)), ErrorKind::PreconditionViolation);
}

TEST(CenteredProfiles, ParentChildUniformAndRandom) {
  const Dist p = make_dist({0.2, 0.3, 0.5});
  const Decomposition same = Decomposition::from_children({p, p}, Weights::uniform(2));
  const auto v = centered_profiles(same);
  const ScoreFn want = centered(p, log_of(p));
  for (std::size_t o = 0; o < 3; ++o) EXPECT_NEAR(v[0].v()[o], want[o], 1e-15);

  const Dist u = Dist::uniform(OutcomeSpace(3));
  for (const LogProfile& x : centered_profiles(Decomposition::from_children({u, u}, Weights::uniform(2))))
    for (double val : x.v().values()) EXPECT_NEAR(val, 0.0, 1e-15);

  Rng rng(71);
  for (int k = 0; k < 100; ++k) {
    const Decomposition dec = sample_decomposition(rng, rng.index(2, 9), rng.index(2, 5));
    for (const LogProfile& x : centered_profiles(dec)) EXPECT_LE(std::abs(expectation(dec.parent(), x.v())), 1e-10);
  }
}

TEST(FirstOrder, ZeroShiftPredictsNothing) {
  Rng rng(73);
  const Decomposition dec = sample_decomposition(rng, 5, 3);
  const std::vector<double> zero(3, 0.0);
  const FirstOrderDeltaL lin = first_order_delta_l(dec, zero);
  for (double v : lin.predicted().values()) EXPECT_EQ(v, 0.0);
  const std::vector<double> bad{0.1, 0.0, 0.0};
  EXPECT_ERROR_KIND(first_order_delta_l(dec, bad), ErrorKind::DbetaNotZeroSum);
}

TEST(FirstOrder, ResidualIsQuadraticAndPredictionIsBounded) {
  Rng rng(79);
  for (int k = 0; k < 30; ++k) {
    const std::size_t n = rng.index(2, 5);
    const Decomposition dec = sample_decomposition(rng, rng.index(3, 9), n);
    std::vector<double> db = normal_vector(rng, n, 0.02);
    double mean = 0;
    for (double x : db) mean += x / static_cast<double>(n);
    for (double& x : db) x -= mean;
    const FirstOrderDeltaL lin = first_order_delta_l(dec, db);
    std::vector<double> ts{1e-1, 1e-2, 1e-3, 1e-4}, rs;
    for (double t : ts) rs.push_back(lin.residual_norm(t));
    EXPECT_GE(slope(ts, rs), 1.9);

    double bound = 0;
    const auto v = lin.profiles();
    for (std::size_t i = 0; i < n; ++i) bound += std::abs(db[i]) * norm_p(dec.parent(), v[i].v());
    EXPECT_LE(norm_p(dec.parent(), lin.predicted()), bound * (1 + 1e-12));
  }
}

TEST(Compensation, NoChangeGivesZeroSides) {
  Rng rng(83);
  const Decomposition dec = sample_decomposition(rng, 4, 3);
  const std::vector<double> zero(3, 0.0);
  const CompensationReport r = compensation_bound(dec, 0, 0.0, 0.0, zero);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_NEAR(r.rhs, 0.0, 1e-15);
}

TEST(Compensation, Errors) {
  Rng rng(89);
  const Decomposition dec = sample_decomposition(rng, 4, 3);
  const std::vector<double> db{0.02, -0.01, -0.01};
  EXPECT_ERROR_KIND(compensation_bound(dec, 0, 0.03, 1.0, db), ErrorKind::DbetaInconsistent);
  EXPECT_ERROR_KIND(compensation_bound(dec, 0, 0.02, 1e-9, db), ErrorKind::BudgetViolated);
  EXPECT_ERROR_KIND(compensation_bound(dec, 5, 0.02, 1.0, db), ErrorKind::IndexOutOfRange);
}

TEST(Compensation, MirroredInstanceForcesWaluigiUp) {
  const Decomposition dec = mirrored({1.0, 0.2, -0.4, -0.8});
  const double delta = 0.05;
  const std::vector<double> db{delta, delta, -2 * delta};
  const double eps = 1e-12;
  const CompensationReport r = compensation_bound(dec, 0, delta, eps, db);
  ASSERT_TRUE(r.waluigi.has_value());
  EXPECT_EQ(*r.waluigi, 1u);
  EXPECT_TRUE(r.bound_applicable);
  EXPECT_LT(eps + r.residual_norm, delta * r.norm_h);
  EXPECT_GT(r.explicit_bound, 0.0);
  EXPECT_GE(r.waluigi_increase, r.explicit_bound - 1e-9);
  EXPECT_GE(r.slack, -1e-9);
}

TEST(Compensation, RandomBudgetRespectingInstancesHold) {
  Rng rng(97);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = rng.index(3, 5);
    const Decomposition dec = sample_decomposition(rng, rng.index(3, 8), n);
    std::vector<double> db = normal_vector(rng, n, 0.01);
    db[0] = std::abs(db[0]);
    double rest = 0;
    for (std::size_t i = 1; i < n; ++i) rest += db[i];
    const double shift = (db[0] + rest) / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i) db[i] -= shift;
    double total = 0;
    for (std::size_t i = 1; i < n; ++i) total += db[i];
    db[0] = -total;
    if (db[0] < 0) continue;
    const double eps = norm_p(dec.parent(), actual_delta_l(dec, db)) * rng.uniform(1.0, 2.0);
    const CompensationReport r = compensation_bound(dec, 0, db[0], eps, db);
    EXPECT_GE(r.slack, -1e-9);
  }
}

TEST(EventFirstOrder, ConstantShiftChangesNothing) {
  const Dist p = make_dist({0.2, 0.3, 0.5});
  const EventChange c = event_first_order(p, Event(3, {1}), ScoreFn::constant(p.space(), 0.7));
  EXPECT_NEAR(c.exact, 0.0, 1e-15);
  EXPECT_NEAR(c.linear, 0.0, 1e-15);
  EXPECT_ERROR_KIND(event_first_order(p, Event(3, {}), ScoreFn::zero(p.space())), ErrorKind::EmptyOrFullEvent);
}

TEST(EventFirstOrder, IndicatorDirectionAndSecondOrderError) {
  const Dist p = make_dist({0.2, 0.3, 0.1, 0.4});
  const Event a(4, {0, 2});
  const ScoreFn g = centered_indicator(p, a);
  const double pa = 0.3;
  EXPECT_NEAR(event_first_order(p, a, 1e-3 * g).linear, 1e-3 * pa * (1 - pa), 1e-16);

  Rng rng(101);
  const ScoreFn dl(p.space(), normal_vector(rng, 4));
  std::vector<double> ts, errs;
  for (int k = 6; k <= 12; ++k) {
    const double t = std::ldexp(1.0, -k);
    const EventChange c = event_first_order(p, a, t * dl);
    ts.push_back(t);
    errs.push_back(std::abs(c.exact - c.linear));
  }
  EXPECT_NEAR(slope(ts, errs), 2.0, 0.15);
}

TEST(Suppression, FullSpanAchievesIndicatorNorm) {
  Rng rng(103);
  const Decomposition dec = sample_decomposition(rng, 3, 3);
  const Event a(3, {1});
  const double pa = dec.parent()[1];
  const SuppressionPlan plan = optimal_suppression(centered_profiles(dec), a, 0.01);
  EXPECT_EQ(plan.span_dim, 2u);
  EXPECT_NEAR(plan.achieved, 0.01 * std::sqrt(pa * (1 - pa)), 1e-14);
  EXPECT_LE(norm_p(dec.parent(), plan.delta_l), 0.01 * (1 + 1e-9));
  EXPECT_NEAR(plan.achieved, plan.budget * plan.projection_norm, 1e-15);
}

TEST(Suppression, OrthogonalSpanAchievesNothing) {
  const Decomposition dec = mirrored({1.0, -1.0, 0.0, 0.0});
  const SuppressionPlan plan = optimal_suppression(centered_profiles(dec), Event(4, {0, 1}), 0.1);
  EXPECT_TRUE(plan.zero_projection);
  EXPECT_EQ(plan.achieved, 0.0);
}

TEST(Suppression, DegenerateSpanAndBadBudget) {
  const Dist u = Dist::uniform(OutcomeSpace(3));
  const auto flat = centered_profiles(Decomposition::from_children({u, u}, Weights::uniform(2)));
  EXPECT_ERROR_KIND(optimal_suppression(flat, Event(3, {0}), 0.1), ErrorKind::DegenerateSpan);
  Rng rng(107);
  const auto v = centered_profiles(sample_decomposition(rng, 4, 2));
  EXPECT_ERROR_KIND(optimal_suppression(v, Event(4, {0}), 0.0), ErrorKind::ParamOutOfRange);
}

TEST(Suppression, RandomDirectionsNeverBeatThePlan) {
  Rng rng(109);
  for (int k = 0; k < 10; ++k) {
    const std::size_t m = rng.index(4, 9), n = rng.index(2, 4);
    const Decomposition dec = sample_decomposition(rng, m, n);
    const Event a(m, {0, 2});
    const auto v = centered_profiles(dec);
    const SuppressionPlan plan = optimal_suppression(v, a, 0.05);
    const ScoreFn g = centered_indicator(dec.parent(), a);
    for (int s = 0; s < 1000; ++s) {
      ScoreFn dl = ScoreFn::zero(dec.space());
      for (std::size_t i = 0; i < n; ++i) dl = dl + rng.normal() * v[i].v();
      const double nrm = norm_p(dec.parent(), dl);
      EXPECT_LE(-inner_p(dec.parent(), dl, g) * 0.05 / nrm, plan.achieved + 1e-9);
    }
  }
}

TEST(ProjectionGain, DirectionInsideSpanGainsNothing) {
  Rng rng(113);
  const Decomposition dec = sample_decomposition(rng, 6, 3);
  const auto v = centered_profiles(dec);
  const LogProfile inside(dec.parent(), 0.3 * v[0].v() + (-1.2) * v[2].v());
  const ProjectionGain g = projection_gain(v, inside, Event(6, {1, 4}), 0.1);
  EXPECT_TRUE(g.w_in_span);
  EXPECT_EQ(g.gain, 0.0);
}

TEST(ProjectionGain, IndicatorDirectionTransfersEverything) {
  const Decomposition dec = mirrored({1.0, -1.0, 0.0, 0.0});
  const Event a(4, {0, 1});
  const auto v = centered_profiles(dec);
  const LogProfile w(dec.parent(), centered_indicator(dec.parent(), a));
  const ProjectionGain g = projection_gain(v, w, a, 0.1);
  EXPECT_NEAR(g.m0, 0.0, 1e-15);
  EXPECT_NEAR(g.m1, 0.1 * 0.5, 1e-15);
  EXPECT_NEAR(g.gain, g.closed_form, 1e-15);
}

TEST(ProjectionGain, PythagorasOnRandomInstances) {
  Rng rng(127);
  for (int k = 0; k < 100; ++k) {
    const std::size_t m = rng.index(4, 9), n = rng.index(2, m - 2);
    const Decomposition dec = sample_decomposition(rng, m, n, 0.02);
    const LogProfile w = LogProfile::centered(dec.parent(), ScoreFn(dec.space(), normal_vector(rng, m)));
    const ProjectionGain g = projection_gain(centered_profiles(dec), w, Event(m, {0}), 0.1);
    EXPECT_LE(std::abs(g.pythagoras_residual), 1e-10);
    EXPECT_GE(g.gain, -1e-15);
  }
}

TEST(KlBudget, ZeroAndConstant) {
  const Dist p = make_dist({0.2, 0.3, 0.5});
  const KlBudget z = kl_budget(p, ScoreFn::zero(p.space()));
  EXPECT_EQ(z.kl_value, 0.0);
  EXPECT_EQ(z.half_var, 0.0);
  const KlBudget c = kl_budget(p, ScoreFn::constant(p.space(), 2.5));
  EXPECT_NEAR(c.kl_value, 0.0, 1e-16);
  EXPECT_NEAR(c.half_var, 0.0, 1e-16);
}

TEST(KlBudget, MatchesDirectKlAndConvergesLinearly) {
  Rng rng(131);
  for (int k = 0; k < 50; ++k) {
    const OutcomeSpace s(rng.index(2, 9));
    const Dist p = random_dist(rng, s);
    const ScoreFn raw(s, normal_vector(rng, s.size()));
    const KlBudget big = kl_budget(p, raw);
    EXPECT_NEAR(big.kl_value, kl(exponential_tilt(p, raw), p), 1e-12);
    // Scaled so ||dL||_P = 0.01 at t = 1.
    const ScoreFn dl = (0.01 / norm_p(p, raw)) * raw;
    std::vector<double> ts, devs;
    for (double t : {1.0, 1e-1, 1e-2}) {
      const KlBudget b = kl_budget(p, t * dl);
      const double dev = std::abs(b.kl_value / b.half_var - 1.0);
      const double c = *std::max_element(dl.values().begin(), dl.values().end()) -
                       *std::min_element(dl.values().begin(), dl.values().end());
      EXPECT_LE(dev, 10.0 * t * c);
      ts.push_back(t);
      devs.push_back(std::max(dev, 1e-300));
    }
    if (devs[2] > 1e-10) {
      EXPECT_GE(slope(ts, devs), 0.9);
    }
  }
}

}  // namespace
