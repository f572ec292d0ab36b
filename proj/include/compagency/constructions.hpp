#ifndef COMPAGENCY_CONSTRUCTIONS_HPP_
#define COMPAGENCY_CONSTRUCTIONS_HPP_

// Explicit instance families used by the existence and impossibility
// results. Any epsilon threshold found here by grid search is an empirical
// constant for that instance. It is not a universal bound.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "compagency/core.hpp"
#include "compagency/pooling.hpp"
#include "compagency/random.hpp"
#include "compagency/welfare.hpp"

namespace compagency {

enum class FamilyKind { cyclic_welfare, analytic_unanimity, peaked_incompatible };

constexpr std::string_view to_string(FamilyKind k) noexcept {
  switch (k) {
    case FamilyKind::cyclic_welfare: return "cyclic_welfare";
    case FamilyKind::analytic_unanimity: return "analytic_unanimity";
    case FamilyKind::peaked_incompatible: return "peaked_incompatible";
  }
  return "unknown";
}

/// Exclusive upper bound on epsilon for each family.
inline double epsilon_upper_bound(FamilyKind kind, std::size_t n) {
  switch (kind) {
    case FamilyKind::cyclic_welfare: return 1.0 / static_cast<double>(n);
    case FamilyKind::analytic_unanimity: return 0.25;
    case FamilyKind::peaked_incompatible: return 0.5;
  }
  return 0.0;
}

inline void check_family_params(FamilyKind kind, std::size_t n, double epsilon) {
  require(n >= 2, ErrorKind::ParamOutOfRange, std::string(to_string(kind)) + " needs n >= 2");
  const double hi = epsilon_upper_bound(kind, n);
  require(epsilon > 0.0 && epsilon < hi, ErrorKind::ParamOutOfRange,
          std::string(to_string(kind)) + " needs 0 < epsilon < " + std::to_string(hi));
}

// ---------------------------------------------------------------------------
// Cyclic welfare

struct CyclicWelfareInstance {
  std::vector<Dist> agents;
  Weights weights;
  /// W_i is 0 on the outcome after i (cyclically) and -C elsewhere.
  std::vector<ScoreFn> welfare;
  double C;

  Dist pool() const { return log_pool(agents, weights); }
};

inline CyclicWelfareInstance cyclic_welfare_instance(std::size_t n, double epsilon, double C) {
  check_family_params(FamilyKind::cyclic_welfare, n, epsilon);
  require(C > 0.0 && std::isfinite(C), ErrorKind::ParamOutOfRange, "cyclic welfare needs C > 0");
  const OutcomeSpace space(n);
  const double peak = 1.0 - static_cast<double>(n - 1) * epsilon;
  std::vector<Dist> agents;
  std::vector<ScoreFn> welfare;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> p(n, epsilon), w(n, -C);
    p[i] = peak;
    w[(i + 1) % n] = 0.0;
    agents.push_back(Dist::from_masses(space, p));
    welfare.emplace_back(space, std::move(w));
  }
  return {std::move(agents), Weights::uniform(n), std::move(welfare), C};
}

// ---------------------------------------------------------------------------
// Analytic unanimity construction on n+1 outcomes

/// Outcome 0 is shared; outcome i (1..n) is agent i's private outcome.
/// Agent i puts alpha = eps on its private outcome, delta = eps^(n+1) on the
/// others and the rest on the shared outcome.
inline Decomposition analytic_unanimity_instance(std::size_t n, double epsilon,
                                                 const std::optional<Weights>& weights = std::nullopt) {
  check_family_params(FamilyKind::analytic_unanimity, n, epsilon);
  const Weights beta = weights.value_or(Weights::uniform(n));
  require(beta.size() == n, ErrorKind::LengthMismatch, "weights must have one entry per agent");
  require(*std::max_element(beta.beta().begin(), beta.beta().end()) < 1.0, ErrorKind::DegenerateWeights,
          "a weight equal to one makes the pool a single agent");

  const OutcomeSpace space(n + 1);
  const double log_eps = std::log(epsilon);
  const double log_alpha = log_eps;
  const double log_delta = static_cast<double>(n + 1) * log_eps;
  const double shared = 1.0 - epsilon - static_cast<double>(n - 1) * std::exp(log_delta);

  std::vector<Dist> children;
  children.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> logits(n + 1, log_delta);
    logits[0] = std::log(shared);
    logits[i + 1] = log_alpha;
    children.push_back(Dist::from_logits(space, logits));
  }
  return Decomposition::from_children(std::move(children), beta);
}

/// Exponent c_i = (n+1) - n*beta_i of the unnormalized pooled mass eps^{c_i}
/// at agent i's private outcome.
inline std::vector<double> analytic_private_exponents(const Weights& beta) {
  const double n = static_cast<double>(beta.size());
  std::vector<double> c(beta.size());
  for (std::size_t i = 0; i < beta.size(); ++i) c[i] = (n + 1.0) - n * beta[i];
  return c;
}

inline constexpr int kEpsilonGridMaxK = 40;

/// Grid point 10^{-k/4}.
inline double epsilon_grid_point(int k) { return std::pow(10.0, -static_cast<double>(k) / 4.0); }

struct EpsilonSearch {
  double epsilon;
  int k;
  double min_gap;
};

/// Largest epsilon on {10^{-k/4}: k = 1..40} (restricted to eps < 1/4) at
/// which the analytic instance is strictly unanimous.
inline EpsilonSearch search_epsilon_for_unanimity(std::size_t n, const std::optional<Weights>& weights = std::nullopt,
                                                  double tolerance = tol::kValue) {
  for (int k = 1; k <= kEpsilonGridMaxK; ++k) {
    const double eps = epsilon_grid_point(k);
    if (eps >= epsilon_upper_bound(FamilyKind::analytic_unanimity, n)) continue;
    std::optional<Decomposition> d;
    try {
      d.emplace(analytic_unanimity_instance(n, eps, weights));
    } catch (const Error& e) {
      // eps^(n+1) underflows for large n at the bottom of the grid.
      if (e.kind() != ErrorKind::NonPositiveEntry) throw;
      break;
    }
    const WelfareReport r = unanimity_report(*d, tolerance);
    if (r.strictly_unanimous) return {eps, k, r.min_gap()};
  }
  fail(ErrorKind::NotFound, "no grid epsilon gives a strictly unanimous analytic instance for n = " + std::to_string(n));
}

inline double find_epsilon_for_unanimity(std::size_t n, const std::optional<Weights>& weights = std::nullopt) {
  return search_epsilon_for_unanimity(n, weights).epsilon;
}

// ---------------------------------------------------------------------------
// Peaked incompatible family

/// Agent i puts 1 - eps on outcome i and eps/(n-1) on each other outcome.
inline std::vector<Dist> peaked_incompatible_family(std::size_t n, double epsilon) {
  check_family_params(FamilyKind::peaked_incompatible, n, epsilon);
  const OutcomeSpace space(n);
  const double spread = epsilon / static_cast<double>(n - 1);
  std::vector<Dist> agents;
  agents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> p(n, spread);
    p[i] = 1.0 - epsilon;
    agents.push_back(Dist::from_masses(space, p));
  }
  return agents;
}

struct PeakedThreshold {
  /// Largest grid epsilon below 1/2 such that S(beta) < 0 for every sampled
  /// beta at that epsilon and at every smaller grid epsilon.
  double epsilon;
  int k;
  /// Largest S(beta) observed over all samples at or below the threshold.
  double worst_sum;
  std::size_t samples;
};

/// Scans the whole grid once and returns the clean tail. Throws NotFound if
/// even the smallest grid epsilon has a sampled beta with S >= 0.
inline PeakedThreshold discover_peaked_threshold(std::size_t n, std::span<const Weights> betas) {
  require(!betas.empty(), ErrorKind::PreconditionViolation, "need at least one weight sample");
  int threshold_k = -1;
  double worst_tail = -std::numeric_limits<double>::infinity();
  // Walk from the smallest epsilon upward; stop at the first dirty grid point.
  for (int k = kEpsilonGridMaxK; k >= 1; --k) {
    const double eps = epsilon_grid_point(k);
    if (eps >= epsilon_upper_bound(FamilyKind::peaked_incompatible, n)) break;
    const std::vector<Dist> agents = peaked_incompatible_family(n, eps);
    double worst = -std::numeric_limits<double>::infinity();
    for (const Weights& b : betas) {
      worst = std::max(worst, weighted_gap_sum(Decomposition::from_children(agents, b)));
    }
    if (!(worst < 0.0)) break;
    threshold_k = k;
    worst_tail = std::max(worst_tail, worst);
  }
  require(threshold_k > 0, ErrorKind::NotFound, "weighted gap sum is not negative even at the smallest grid epsilon");
  return {epsilon_grid_point(threshold_k), threshold_k, worst_tail, betas.size()};
}

/// log Z of the log pool of the peaked family. Tends to
/// (1 - max beta) log eps + const as eps -> 0.
inline double peaked_log_normalizer(std::size_t n, double epsilon, const Weights& beta) {
  return log_pool_with_normalizer(peaked_incompatible_family(n, epsilon), beta).log_normalizer;
}

// ---------------------------------------------------------------------------
// Binary closed form

/// Welfare gap of a binary agent with mass x_i on the first outcome against
/// a pool with mass x there.
inline double binary_gap_closed_form(double x_i, double x) {
  require(x_i > 0.0 && x_i < 1.0 && x > 0.0 && x < 1.0, ErrorKind::ParamOutOfRange,
          "binary masses must lie in (0, 1)");
  return (x - x_i) * std::log(x_i / (1.0 - x_i));
}

}  // namespace compagency

#endif  // COMPAGENCY_CONSTRUCTIONS_HPP_
