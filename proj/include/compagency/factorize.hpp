#ifndef COMPAGENCY_FACTORIZE_HPP_
#define COMPAGENCY_FACTORIZE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "compagency/core.hpp"
#include "compagency/pooling.hpp"
#include "compagency/random.hpp"
#include "compagency/welfare.hpp"

namespace compagency {

namespace tol {
/// Minimum tv separation demanded of free factorization children.
inline constexpr double kDistinctTv = 1e-6;
}  // namespace tol

inline constexpr int kFactorSeedBudget = 16;

struct FactorProvenance {
  std::uint64_t seed;  // seed that produced the accepted children
  int attempts;
  std::string kind;
  double distinct_threshold;
  double min_pairwise_tv;
  double min_parent_tv;
  std::size_t absorbing_index;
};

struct Factorization {
  Decomposition decomposition;
  FactorProvenance provenance;
};

namespace detail {

/// Reference child j: uniform tilted along a seeded centered direction with
/// unit max-abs, magnitude 0.05 (1 + j/n).
inline Dist reference_tilt(const OutcomeSpace& space, std::uint64_t seed, std::size_t j, std::size_t n) {
  Rng rng = Rng::derive(seed, {0x46ACULL, j});
  std::vector<double> h = normal_vector(rng, space.size());
  double mean = 0.0;
  for (double v : h) mean += v;
  mean /= static_cast<double>(h.size());
  double top = 0.0;
  for (double& v : h) {
    v -= mean;
    top = std::max(top, std::abs(v));
  }
  const double magnitude = 0.05 * (1.0 + static_cast<double>(j) / static_cast<double>(n));
  if (top > 0.0)
    for (double& v : h) v *= magnitude / top;
  return Dist::from_logits(space, h);
}

/// Child at index a chosen so the log pool of all children is exactly P:
/// log P_a = (log P - sum_{j != a} beta_j log P_j) / beta_a.
inline Dist absorbing_child(const Dist& parent, std::span<const Dist> others, const Weights& weights, std::size_t a) {
  std::vector<double> logits(parent.log_p().begin(), parent.log_p().end());
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (j == a || weights[j] == 0.0) continue;
    const auto lq = others[j].log_p();
    for (std::size_t o = 0; o < logits.size(); ++o) logits[o] -= weights[j] * lq[o];
  }
  for (double& v : logits) v /= weights[a];
  return Dist::from_logits(parent.space(), logits);
}

struct Separation {
  double pairwise = std::numeric_limits<double>::infinity();
  double to_parent = std::numeric_limits<double>::infinity();
};

inline Separation separation(const Dist& parent, std::span<const Dist> children) {
  Separation s;
  for (std::size_t i = 0; i < children.size(); ++i) {
    s.to_parent = std::min(s.to_parent, tv(children[i], parent));
    for (std::size_t j = i + 1; j < children.size(); ++j) s.pairwise = std::min(s.pairwise, tv(children[i], children[j]));
  }
  return s;
}

}  // namespace detail

/// Pairwise-distinct children that log-pool to P. Every child except the
/// highest-weight one is a small seeded tilt of uniform; that one absorbs the
/// residual. Retries with seed+1, seed+2, ... if distinctness fails.
inline Factorization factor_pairwise_distinct(const Dist& parent, const Weights& weights, std::uint64_t seed) {
  const std::size_t n = weights.size();
  require(n >= 2 && weights.positive_count() >= 2, ErrorKind::WeightTooConcentrated,
          "need at least two positive weights to factor");
  const std::size_t a = tilt_anchor_index(weights);

  for (int attempt = 0; attempt < kFactorSeedBudget; ++attempt) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
    std::vector<Dist> children;
    children.reserve(n);
    for (std::size_t j = 0; j < n; ++j) children.push_back(j == a ? parent : detail::reference_tilt(parent.space(), s, j, n));
    children[a] = detail::absorbing_child(parent, children, weights, a);

    const detail::Separation sep = detail::separation(parent, children);
    if (sep.pairwise <= tol::kDistinctTv || sep.to_parent <= tol::kDistinctTv) continue;
    Decomposition d(parent, std::move(children), weights);
    return {std::move(d), {s, attempt + 1, "pairwise_distinct", tol::kDistinctTv, sep.pairwise, sep.to_parent, a}};
  }
  fail(ErrorKind::DistinctnessFailure,
       "no pairwise-distinct factorization within " + std::to_string(kFactorSeedBudget) + " seeds");
}

/// Keeps `fixed` as children 0..m-1, makes children m+1..n-1 seeded tilts of
/// uniform and solves for child m so the pool is exactly P.
inline Factorization factor_with_fixed(const Dist& parent, std::span<const Dist> fixed, const Weights& weights,
                                       std::uint64_t seed) {
  const std::size_t m = fixed.size();
  const std::size_t n = weights.size();
  require(m >= 1, ErrorKind::PreconditionViolation, "no fixed components given");
  require(n >= m + 2, ErrorKind::PreconditionViolation,
          "need n >= m + 2 (got n = " + std::to_string(n) + ", m = " + std::to_string(m) + ")");
  require(weights[m] > 0.0, ErrorKind::PreconditionViolation, "the solved component needs positive weight");
  require(std::any_of(weights.beta().begin(), weights.beta().begin() + static_cast<std::ptrdiff_t>(m),
                      [](double b) { return b > 0.0; }),
          ErrorKind::PreconditionViolation, "some fixed component needs positive weight");
  for (const Dist& f : fixed) require_same_space(parent.space(), f.space());

  std::vector<Dist> children(fixed.begin(), fixed.end());
  children.push_back(parent);
  for (std::size_t j = m + 1; j < n; ++j) children.push_back(detail::reference_tilt(parent.space(), seed, j, n));
  children[m] = detail::absorbing_child(parent, children, weights, m);

  const detail::Separation sep = detail::separation(parent, children);
  Decomposition d(parent, std::move(children), weights);
  return {std::move(d), {seed, 1, "with_fixed", tol::kDistinctTv, sep.pairwise, sep.to_parent, m}};
}

/// Splits a child into two subagents whose (alpha, 1 - alpha) log pool is
/// the child: log P11 = log P1 + (1 - alpha) g - c1, log P12 = log P1 - alpha g - c2.
inline std::pair<Dist, Dist> compatible_split(const Dist& child, double alpha, const ScoreFn& g) {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::ParamOutOfRange, "split fraction must lie in (0, 1)");
  require_same_space(child.space(), g.space());
  return {exponential_tilt(child, g, 1.0 - alpha), exponential_tilt(child, g, -alpha)};
}

struct SplitCheck {
  Dist sub1;
  Dist sub2;
  double tv_delta;
  /// Original decomposition with child i replaced by sub1 (weight alpha*beta_i)
  /// followed by sub2 (weight (1-alpha)*beta_i).
  Decomposition split;
};

inline SplitCheck split_invariance_check(const Decomposition& d, std::size_t child_index, double alpha,
                                         const ScoreFn& g) {
  require(child_index < d.size(), ErrorKind::IndexOutOfRange,
          "child index " + std::to_string(child_index) + " out of range");
  auto [sub1, sub2] = compatible_split(d.child(child_index), alpha, g);

  std::vector<Dist> children;
  std::vector<double> beta;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i == child_index) {
      children.push_back(sub1);
      children.push_back(sub2);
      beta.push_back(alpha * d.weights()[i]);
      beta.push_back((1.0 - alpha) * d.weights()[i]);
    } else {
      children.push_back(d.child(i));
      beta.push_back(d.weights()[i]);
    }
  }
  Weights w(std::move(beta));
  const double delta = tv(log_pool(children, w), d.parent());
  Decomposition split(d.parent(), std::move(children), std::move(w), PoolKind::log, tol::kRewitnessTv);
  return {std::move(sub1), std::move(sub2), delta, std::move(split)};
}

/// E_{P_t}[log P1] for the t-tilt P_t proportional to P1^t.
inline double tilt_mean_log(const Dist& p1, double t) {
  return expectation(exponential_tilt(p1, log_of(p1), t - 1.0), log_of(p1));
}

struct ParentBenefitReport {
  Dist p_t;       // P1^t, normalized
  Dist p2;        // P1^(2t-1), normalized; (P1, P2) at (1/2, 1/2) pool to P_t
  Dist sub1;      // depressed subagent, mass at o_star pushed down
  Dist sub2;
  double lambda;
  double parent_gap;  // Delta_{P1}(P_t)
  double sub_gap;     // Delta_{P11}(P_t)
  double kl_value;    // KL(P_t || P11)
  double binary_bound;
  double pool_tv;  // tv between the pool of (P11, P12, P2) and P_t
};

inline ParentBenefitReport parent_benefit_counterexample(const Dist& p1, double t, double alpha, std::size_t o_star,
                                                         double lambda) {
  require(!is_uniform(p1), ErrorKind::UniformParent, "a uniform parent gains nothing from tilting");
  require(t > 1.0 && std::isfinite(t), ErrorKind::ParamOutOfRange, "tilt exponent must exceed 1");
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::ParamOutOfRange, "split fraction must lie in (0, 1)");
  require(lambda > 0.0 && std::isfinite(lambda), ErrorKind::ParamOutOfRange, "lambda must be positive");
  require(o_star < p1.size(), ErrorKind::IndexOutOfRange, "o_star out of range");

  const ScoreFn lp = log_of(p1);
  Dist p_t = exponential_tilt(p1, lp, t - 1.0);
  Dist p2 = exponential_tilt(p1, lp, 2.0 * t - 2.0);
  const Decomposition parent(p_t, {p1, p2}, Weights({0.5, 0.5}));

  std::vector<double> g(p1.size(), 0.0);
  g[o_star] = -lambda;
  auto [sub1, sub2] = compatible_split(p1, alpha, ScoreFn(p1.space(), std::move(g)));

  const std::vector<Dist> grand{sub1, sub2, p2};
  const double pool_tv = tv(log_pool(grand, Weights({0.5 * alpha, 0.5 * (1.0 - alpha), 0.5})), p_t);
  const CoarseGrainBound cg = coarse_grain_bound(p_t, sub1, Event(p1.size(), {o_star}));
  const double parent_gap = welfare_gap(p1, p_t);
  const double sub_gap = welfare_gap(sub1, p_t);
  return {std::move(p_t), std::move(p2), std::move(sub1), std::move(sub2), lambda,
          parent_gap,     sub_gap,       cg.kl_value,     cg.binary_bound, pool_tv};
}

/// lambda in {1, 2, 4, ..., 2^12}.
inline std::vector<double> default_lambda_schedule() {
  std::vector<double> out;
  for (int e = 0; e <= 12; ++e) out.push_back(std::ldexp(1.0, e));
  return out;
}

struct ParentBenefitSweep {
  std::vector<ParentBenefitReport> steps;
  /// Index into steps of the first lambda with a negative subagent gap.
  std::optional<std::size_t> first_negative;
};

/// Stops at the first negative subagent gap, before extreme lambdas push the
/// subagent's mass at o_star below double range.
inline ParentBenefitSweep parent_benefit_sweep(const Dist& p1, double t, double alpha, std::size_t o_star,
                                               std::span<const double> lambdas) {
  ParentBenefitSweep sweep;
  for (double lambda : lambdas) {
    sweep.steps.push_back(parent_benefit_counterexample(p1, t, alpha, o_star, lambda));
    if (sweep.steps.back().sub_gap < 0.0) {
      sweep.first_negative = sweep.steps.size() - 1;
      break;
    }
  }
  return sweep;
}

}  // namespace compagency

#endif  // COMPAGENCY_FACTORIZE_HPP_
