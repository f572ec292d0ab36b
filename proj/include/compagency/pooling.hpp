#ifndef COMPAGENCY_POOLING_HPP_
#define COMPAGENCY_POOLING_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "compagency/core.hpp"

namespace compagency {

enum class PoolKind { log, linear };

constexpr std::string_view to_string(PoolKind kind) noexcept { return kind == PoolKind::log ? "log" : "linear"; }

namespace tol {
/// A decomposition must reproduce its parent this closely when built.
inline constexpr double kWitnessTv = 1e-12;
/// Looser bound for decompositions produced by transports and splits.
inline constexpr double kRewitnessTv = 1e-9;
}  // namespace tol

namespace detail {

inline void check_pool_inputs(std::span<const Dist> agents, const Weights& weights) {
  require(!agents.empty(), ErrorKind::LengthMismatch, "no agents to pool");
  require(agents.size() == weights.size(), ErrorKind::LengthMismatch,
          std::to_string(agents.size()) + " agents but " + std::to_string(weights.size()) + " weights");
  for (const Dist& a : agents) require_same_space(agents.front().space(), a.space());
}

/// sum_j beta_j log P_j(o); zero-weight agents are skipped.
inline std::vector<double> pooled_logits(std::span<const Dist> agents, const Weights& weights) {
  std::vector<double> logits(agents.front().size(), 0.0);
  for (std::size_t j = 0; j < agents.size(); ++j) {
    if (weights[j] == 0.0) continue;
    const auto lp = agents[j].log_p();
    for (std::size_t o = 0; o < logits.size(); ++o) logits[o] += weights[j] * lp[o];
  }
  return logits;
}

}  // namespace detail

struct LogPoolDiagnostics {
  Dist pool;
  /// log Z with Z = sum_o prod_j P_j(o)^{beta_j}.
  double log_normalizer;
};

inline LogPoolDiagnostics log_pool_with_normalizer(std::span<const Dist> agents, const Weights& weights) {
  detail::check_pool_inputs(agents, weights);
  const std::vector<double> logits = detail::pooled_logits(agents, weights);
  return {Dist::from_logits(agents.front().space(), logits), detail::log_sum_exp(logits)};
}

/// Normalized weighted geometric mean, computed as a softmax of the
/// weighted log-probabilities.
inline Dist log_pool(std::span<const Dist> agents, const Weights& weights) {
  detail::check_pool_inputs(agents, weights);
  return Dist::from_logits(agents.front().space(), detail::pooled_logits(agents, weights));
}

/// Mixture sum_j beta_j P_j.
inline Dist linear_pool(std::span<const Dist> agents, const Weights& weights) {
  detail::check_pool_inputs(agents, weights);
  std::vector<double> mix(agents.front().size(), 0.0);
  for (std::size_t j = 0; j < agents.size(); ++j)
    for (std::size_t o = 0; o < mix.size(); ++o) mix[o] += weights[j] * agents[j][o];
  return Dist::from_masses(agents.front().space(), mix);
}

inline Dist pool(PoolKind kind, std::span<const Dist> agents, const Weights& weights) {
  return kind == PoolKind::log ? log_pool(agents, weights) : linear_pool(agents, weights);
}

/// A parent belief together with child beliefs and weights certified to
/// pool back to it.
class Decomposition {
 public:
  Decomposition(Dist parent, std::vector<Dist> children, Weights weights, PoolKind kind = PoolKind::log,
                double tolerance = tol::kWitnessTv)
      : parent_(std::move(parent)), children_(std::move(children)), weights_(std::move(weights)), kind_(kind) {
    require(children_.size() >= 2, ErrorKind::PreconditionViolation, "a decomposition needs at least two children");
    for (const Dist& c : children_) require_same_space(parent_.space(), c.space());
    const Dist pooled = pool(kind_, children_, weights_);
    witness_tv_ = tv(pooled, parent_);
    require(witness_tv_ <= tolerance, ErrorKind::NotAPoolWitness,
            "children pool to a distribution at tv " + std::to_string(witness_tv_) + " from the parent");
  }

  /// Builds the decomposition whose parent is the pool of the children.
  static Decomposition from_children(std::vector<Dist> children, Weights weights, PoolKind kind = PoolKind::log) {
    require(!children.empty(), ErrorKind::PreconditionViolation, "no children");
    Dist parent = pool(kind, children, weights);
    return Decomposition(std::move(parent), std::move(children), std::move(weights), kind);
  }

  const Dist& parent() const noexcept { return parent_; }
  std::span<const Dist> children() const noexcept { return children_; }
  const Dist& child(std::size_t i) const { return children_.at(i); }
  const Weights& weights() const noexcept { return weights_; }
  PoolKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return children_.size(); }
  const OutcomeSpace& space() const noexcept { return parent_.space(); }
  double witness_tv() const noexcept { return witness_tv_; }

 private:
  Dist parent_;
  std::vector<Dist> children_;
  Weights weights_;
  PoolKind kind_;
  double witness_tv_ = 0.0;
};

/// Index whose tilt absorbs the normalization shift: argmax beta, lowest
/// index on ties.
inline std::size_t tilt_anchor_index(const Weights& weights) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < weights.size(); ++i)
    if (weights[i] > weights[k]) k = i;
  return k;
}

/// Writes each child as P_i = P e^{h_i} / Z_i with sum_i beta_i h_i == 0.
///
/// Starts from h_i = log P_i - log P, whose beta-average is the constant
/// log Z, then removes that constant from the single anchor tilt.
inline std::vector<ScoreFn> tilt_representation(const Dist& parent, std::span<const Dist> children,
                                                const Weights& weights) {
  detail::check_pool_inputs(children, weights);
  require_same_space(parent.space(), children.front().space());
  const double witness = tv(log_pool(children, weights), parent);
  require(witness <= tol::kRewitnessTv, ErrorKind::NotAPoolWitness,
          "children pool to a distribution at tv " + std::to_string(witness) + " from the parent");

  const std::size_t m = parent.size();
  std::vector<std::vector<double>> h(children.size(), std::vector<double>(m));
  std::vector<double> mix(m, 0.0);
  for (std::size_t i = 0; i < children.size(); ++i) {
    for (std::size_t o = 0; o < m; ++o) {
      h[i][o] = children[i].log_p()[o] - parent.log_p()[o];
      mix[o] += weights[i] * h[i][o];
    }
  }
  // The beta-average is constant in o up to rounding; its P-mean is the
  // most stable estimate of log Z.
  const double log_z = detail::weighted_mean(parent.p(), mix);
  const std::size_t k = tilt_anchor_index(weights);
  for (double& v : h[k]) v -= log_z / weights[k];

  std::vector<ScoreFn> out;
  out.reserve(h.size());
  for (auto& hi : h) out.emplace_back(parent.space(), std::move(hi));
  return out;
}

inline std::vector<ScoreFn> tilt_representation(const Decomposition& d) {
  return tilt_representation(d.parent(), d.children(), d.weights());
}

}  // namespace compagency

#endif  // COMPAGENCY_POOLING_HPP_
