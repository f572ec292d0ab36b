#ifndef COMPAGENCY_WELFARE_HPP_
#define COMPAGENCY_WELFARE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "compagency/core.hpp"
#include "compagency/pooling.hpp"

namespace compagency {

/// Welfare gap of an agent with belief R against pool P, with the
/// entropy/KL breakdown used to cross-check it.
struct GapTerms {
  double gap;            // E_P[log R] - E_R[log R]
  double entropy_agent;  // H(R)
  double entropy_pool;   // H(P)
  double kl_pool_agent;  // KL(P || R)
};

/// Computes the gap directly and through H(R) - H(P) - KL(P||R); throws
/// IdentityMismatch if the two disagree beyond 1e-9 (scaled by the size of
/// the terms, which can be large for peaked beliefs).
inline GapTerms welfare_gap_terms(const Dist& agent, const Dist& pool) {
  require_same_space(agent.space(), pool.space());
  const auto la = agent.log_p();
  double under_pool = 0.0, under_self = 0.0;
  for (std::size_t o = 0; o < agent.size(); ++o) {
    under_pool += pool[o] * la[o];
    under_self += agent[o] * la[o];
  }
  GapTerms t{under_pool - under_self, entropy(agent), entropy(pool), kl(pool, agent)};
  const double via_identity = t.entropy_agent - t.entropy_pool - t.kl_pool_agent;
  const double scale = std::max({1.0, t.entropy_agent, t.entropy_pool, t.kl_pool_agent});
  require(std::abs(via_identity - t.gap) <= tol::kValue * scale, ErrorKind::IdentityMismatch,
          "direct gap " + std::to_string(t.gap) + " vs entropy identity " + std::to_string(via_identity));
  return t;
}

inline double welfare_gap(const Dist& agent, const Dist& pool) { return welfare_gap_terms(agent, pool).gap; }

struct CovarianceCondition {
  double covariance;          // Cov_{P_i}(W_i, P/P_i)
  double welfare_difference;  // E_P[W_i] - E_{P_i}[W_i]
  bool compositional;         // covariance >= -tolerance
  bool direct_compositional;  // welfare_difference >= -tolerance
};

/// Tests whether an agent with general welfare function W benefits from the
/// pool, via the covariance of W with the reweighting ratio Q = P/P_i.
inline CovarianceCondition covariance_condition(const Dist& agent, const ScoreFn& welfare, const Dist& pool,
                                                double tolerance = tol::kValue) {
  require_same_space(agent.space(), pool.space());
  require_same_space(agent.space(), welfare.space());
  const std::size_t m = agent.size();
  std::vector<double> ratio(m);
  for (std::size_t o = 0; o < m; ++o) ratio[o] = std::exp(pool.log_p()[o] - agent.log_p()[o]);

  const double mean_w = detail::weighted_mean(agent.p(), welfare.values());
  const double mean_q = detail::weighted_mean(agent.p(), ratio);
  double cov = 0.0;
  for (std::size_t o = 0; o < m; ++o) cov += agent[o] * (welfare[o] - mean_w) * (ratio[o] - mean_q);

  const double diff = detail::weighted_mean(pool.p(), welfare.values()) - mean_w;
  return {cov, diff, cov >= -tolerance, diff >= -tolerance};
}

struct WelfareReport {
  std::vector<double> gaps;
  std::vector<GapTerms> terms;
  bool unanimous = false;
  bool strictly_unanimous = false;
  double tolerance = tol::kValue;

  double min_gap() const { return *std::min_element(gaps.begin(), gaps.end()); }
};

/// Gaps of every child against the parent under epistemic welfare
/// W_i = log P_i. Unanimous: every gap >= -tolerance. Strict: every gap >
/// +tolerance.
inline WelfareReport unanimity_report(const Decomposition& d, double tolerance = tol::kValue) {
  WelfareReport r;
  r.tolerance = tolerance;
  r.gaps.reserve(d.size());
  r.terms.reserve(d.size());
  for (const Dist& child : d.children()) {
    r.terms.push_back(welfare_gap_terms(child, d.parent()));
    r.gaps.push_back(r.terms.back().gap);
  }
  r.unanimous = std::all_of(r.gaps.begin(), r.gaps.end(), [&](double g) { return g >= -tolerance; });
  r.strictly_unanimous = std::all_of(r.gaps.begin(), r.gaps.end(), [&](double g) { return g > tolerance; });
  return r;
}

inline double weighted_gap_sum(const Decomposition& d) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) acc += d.weights()[i] * welfare_gap(d.child(i), d.parent());
  return acc;
}

}  // namespace compagency

#endif  // COMPAGENCY_WELFARE_HPP_
