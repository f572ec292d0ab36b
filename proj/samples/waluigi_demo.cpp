// Walks through one small persona example: a Luigi child, its anti-aligned
// Waluigi, and a neutral child. Amplifying Luigi under a tight change budget
// forces Waluigi's weight up; adding Waluigi's profile to the control span
// then buys extra first-order suppression of the "bad" outcome.

#include <cstdio>
#include <vector>

#include "compagency/compagency.hpp"

using namespace compagency;

int main() {
  const OutcomeSpace space({"helpful", "neutral", "evasive", "harmful"});
  const Dist luigi = Dist::from_masses(space, std::vector<double>{0.55, 0.25, 0.12, 0.08});
  const Dist waluigi = Dist::from_masses(space, std::vector<double>{0.10, 0.20, 0.30, 0.40});
  const Dist other = Dist::from_masses(space, std::vector<double>{0.30, 0.40, 0.10, 0.20});
  const Decomposition d = Decomposition::from_children({luigi, waluigi, other}, Weights({0.4, 0.3, 0.3}));

  std::printf("pool:");
  for (double v : d.parent().p()) std::printf(" %.4f", v);
  std::printf("\n");

  const WelfareReport rep = unanimity_report(d);
  for (std::size_t i = 0; i < rep.gaps.size(); ++i) std::printf("gap[%zu] = %+.6f\n", i, rep.gaps[i]);

  // Raise Luigi by delta and lower Waluigi by the same amount.
  const double delta = 0.05;
  const std::vector<double> dbeta{delta, -delta, 0.0};
  std::printf("||dL||_P for (+delta, -delta, 0) = %.6f\n", norm_p(d.parent(), actual_delta_l(d, dbeta)));

  // A shift that keeps the realized deviation small has to raise Waluigi.
  const std::vector<double> balanced{delta, 0.5 * delta, -1.5 * delta};
  const CompensationReport c = compensation_bound(d, 0, delta, norm_p(d.parent(), actual_delta_l(d, balanced)), balanced);
  std::printf("anti-aligned with Luigi:");
  for (std::size_t i = 0; i < c.anti_aligned.size(); ++i)
    if (c.anti_aligned[i]) std::printf(" %zu", i);
  std::printf("\nlhs = %.6f, rhs = %.6f, slack = %.6f, forced increase = %.6f\n", c.lhs, c.rhs, c.slack,
              c.waluigi_increase);

  // Suppress "harmful" with and without Waluigi in the control span.
  const Event harmful(space.size(), {3});
  const auto profiles = centered_profiles(d);
  const std::vector<LogProfile> base_span{profiles[0], profiles[2]};
  const ProjectionGain g = projection_gain(base_span, profiles[1], harmful, 0.01);
  std::printf("suppression at eps=0.01: without Waluigi %.6g, with %.6g, gain %.6g\n", g.m0, g.m1, g.gain);
  return 0;
}
