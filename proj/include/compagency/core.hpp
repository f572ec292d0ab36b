#ifndef COMPAGENCY_CORE_HPP_
#define COMPAGENCY_CORE_HPP_

// Outcome spaces, validated beliefs and the information-geometric
// primitives (entropy, KL, TV, the P-weighted inner product) that every
// other header builds on. All types are immutable after construction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "compagency/error.hpp"

namespace compagency {

namespace tol {
/// Default absolute tolerance for comparing computed values.
inline constexpr double kValue = 1e-9;
/// Tolerance on probability and weight sums.
inline constexpr double kNormalization = 1e-12;
}  // namespace tol

class OutcomeSpace {
 public:
  explicit OutcomeSpace(std::size_t size) : size_(size) {
    require(size >= 2, ErrorKind::DimensionMismatch, "outcome space needs at least 2 outcomes");
  }

  explicit OutcomeSpace(std::vector<std::string> labels) : size_(labels.size()) {
    require(size_ >= 2, ErrorKind::DimensionMismatch, "outcome space needs at least 2 outcomes");
    std::unordered_set<std::string> seen(labels.begin(), labels.end());
    require(seen.size() == labels.size(), ErrorKind::InvalidLabels, "duplicate outcome labels");
    labels_ = std::make_shared<const std::vector<std::string>>(std::move(labels));
  }

  std::size_t size() const noexcept { return size_; }
  bool has_labels() const noexcept { return labels_ != nullptr; }
  std::span<const std::string> labels() const noexcept {
    if (!labels_) return {};
    return *labels_;
  }

  friend bool operator==(const OutcomeSpace& a, const OutcomeSpace& b) {
    if (a.size_ != b.size_) return false;
    if (a.labels_ == b.labels_) return true;
    // Labels are cosmetic: an unlabeled space is compatible with a labeled one.
    if (!a.labels_ || !b.labels_) return true;
    return *a.labels_ == *b.labels_;
  }

 private:
  std::size_t size_;
  std::shared_ptr<const std::vector<std::string>> labels_;
};

inline void require_same_space(const OutcomeSpace& a, const OutcomeSpace& b) {
  require(a == b, ErrorKind::SpaceMismatch,
          "outcome spaces differ (" + std::to_string(a.size()) + " vs " +
              std::to_string(b.size()) + ")");
}

namespace detail {

inline double log_sum_exp(std::span<const double> x) {
  const double top = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - top);
  return top + std::log(acc);
}

inline void require_finite(std::span<const double> x, const char* what) {
  for (double v : x)
    require(std::isfinite(v), ErrorKind::NonFinite, std::string(what) + " has a non-finite entry");
}

}  // namespace detail

/// A strictly positive probability vector. The log-probabilities are kept
/// alongside so peaked beliefs never lose precision through exp/log round
/// trips.
class Dist {
 public:
  /// Normalizes strictly positive raw masses.
  static Dist from_masses(OutcomeSpace space, std::span<const double> raw) {
    require(raw.size() == space.size(), ErrorKind::DimensionMismatch,
            "expected " + std::to_string(space.size()) + " masses, got " + std::to_string(raw.size()));
    detail::require_finite(raw, "masses");
    double total = 0.0;
    for (std::size_t o = 0; o < raw.size(); ++o) {
      require(raw[o] > 0.0, ErrorKind::NonPositiveEntry,
              "mass at outcome " + std::to_string(o) + " is not strictly positive");
      total += raw[o];
    }
    require(std::isfinite(total), ErrorKind::NonFinite, "masses overflow");
    std::vector<double> p(raw.size()), logp(raw.size());
    const double log_total = std::log(total);
    for (std::size_t o = 0; o < raw.size(); ++o) {
      p[o] = raw[o] / total;
      logp[o] = std::log(raw[o]) - log_total;
    }
    return Dist(std::move(space), std::move(p), std::move(logp));
  }

  /// Softmax of unnormalized log-masses, max-shifted.
  static Dist from_logits(OutcomeSpace space, std::span<const double> logits) {
    require(logits.size() == space.size(), ErrorKind::DimensionMismatch,
            "expected " + std::to_string(space.size()) + " logits, got " + std::to_string(logits.size()));
    detail::require_finite(logits, "logits");
    const double lse = detail::log_sum_exp(logits);
    std::vector<double> p(logits.size()), logp(logits.size());
    for (std::size_t o = 0; o < logits.size(); ++o) {
      logp[o] = logits[o] - lse;
      p[o] = std::exp(logp[o]);
      require(p[o] > 0.0, ErrorKind::NonPositiveEntry,
              "probability at outcome " + std::to_string(o) + " underflows to zero");
    }
    return Dist(std::move(space), std::move(p), std::move(logp));
  }

  static Dist uniform(OutcomeSpace space) {
    const std::size_t m = space.size();
    return Dist(std::move(space), std::vector<double>(m, 1.0 / static_cast<double>(m)),
                std::vector<double>(m, -std::log(static_cast<double>(m))));
  }

  const OutcomeSpace& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return p_.size(); }
  std::span<const double> p() const noexcept { return p_; }
  std::span<const double> log_p() const noexcept { return logp_; }
  double operator[](std::size_t o) const { return p_[o]; }

 private:
  Dist(OutcomeSpace space, std::vector<double> p, std::vector<double> logp)
      : space_(std::move(space)), p_(std::move(p)), logp_(std::move(logp)) {}

  OutcomeSpace space_;
  std::vector<double> p_;
  std::vector<double> logp_;
};

inline Dist make_dist(const OutcomeSpace& space, std::span<const double> raw) {
  return Dist::from_masses(space, raw);
}

inline Dist make_dist(std::span<const double> raw) {
  return Dist::from_masses(OutcomeSpace(raw.size()), raw);
}

inline Dist make_dist(std::initializer_list<double> raw) {
  return make_dist(std::span<const double>(raw.begin(), raw.size()));
}

/// Nonnegative pooling weights summing to one.
class Weights {
 public:
  explicit Weights(std::vector<double> beta) : beta_(std::move(beta)) {
    require(!beta_.empty(), ErrorKind::InvalidWeights, "weights are empty");
    detail::require_finite(beta_, "weights");
    double total = 0.0;
    for (double b : beta_) {
      require(b >= 0.0, ErrorKind::InvalidWeights, "negative weight");
      total += b;
    }
    require(std::abs(total - 1.0) <= tol::kNormalization, ErrorKind::InvalidWeights,
            "weights do not sum to one");
  }

  static Weights normalized(std::span<const double> raw) {
    double total = 0.0;
    for (double b : raw) {
      require(std::isfinite(b) && b >= 0.0, ErrorKind::InvalidWeights, "raw weight is negative or non-finite");
      total += b;
    }
    require(total > 0.0, ErrorKind::InvalidWeights, "raw weights sum to zero");
    std::vector<double> beta(raw.begin(), raw.end());
    for (double& b : beta) b /= total;
    return Weights(std::move(beta));
  }

  static Weights uniform(std::size_t n) {
    require(n >= 1, ErrorKind::InvalidWeights, "need at least one weight");
    return Weights(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  std::size_t size() const noexcept { return beta_.size(); }
  std::span<const double> beta() const noexcept { return beta_; }
  double operator[](std::size_t i) const { return beta_[i]; }
  bool strict() const noexcept {
    return std::all_of(beta_.begin(), beta_.end(), [](double b) { return b > 0.0; });
  }
  std::size_t positive_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(beta_.begin(), beta_.end(), [](double b) { return b > 0.0; }));
  }

 private:
  std::vector<double> beta_;
};

/// A real function on the outcome space: welfare functions, tilts, log
/// profiles before centering, indicators.
class ScoreFn {
 public:
  ScoreFn(OutcomeSpace space, std::vector<double> f) : space_(std::move(space)), f_(std::move(f)) {
    require(f_.size() == space_.size(), ErrorKind::DimensionMismatch,
            "score function length " + std::to_string(f_.size()) + " does not match space size " +
                std::to_string(space_.size()));
    detail::require_finite(f_, "score function");
  }

  static ScoreFn constant(const OutcomeSpace& space, double c) {
    return ScoreFn(space, std::vector<double>(space.size(), c));
  }
  static ScoreFn zero(const OutcomeSpace& space) { return constant(space, 0.0); }

  const OutcomeSpace& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return f_.size(); }
  std::span<const double> values() const noexcept { return f_; }
  double operator[](std::size_t o) const { return f_[o]; }

 private:
  OutcomeSpace space_;
  std::vector<double> f_;
};

inline ScoreFn operator+(const ScoreFn& a, const ScoreFn& b) {
  require_same_space(a.space(), b.space());
  std::vector<double> out(a.size());
  for (std::size_t o = 0; o < out.size(); ++o) out[o] = a[o] + b[o];
  return ScoreFn(a.space(), std::move(out));
}

inline ScoreFn operator-(const ScoreFn& a, const ScoreFn& b) {
  require_same_space(a.space(), b.space());
  std::vector<double> out(a.size());
  for (std::size_t o = 0; o < out.size(); ++o) out[o] = a[o] - b[o];
  return ScoreFn(a.space(), std::move(out));
}

inline ScoreFn operator*(double s, const ScoreFn& a) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& v : out) v *= s;
  return ScoreFn(a.space(), std::move(out));
}

/// Log-probabilities of a belief as a score function.
inline ScoreFn log_of(const Dist& d) {
  return ScoreFn(d.space(), std::vector<double>(d.log_p().begin(), d.log_p().end()));
}

/// An outcome subset, stored as sorted distinct indices.
class Event {
 public:
  Event(std::size_t space_size, std::vector<std::size_t> indices)
      : space_size_(space_size), idx_(std::move(indices)) {
    std::sort(idx_.begin(), idx_.end());
    idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
    for (std::size_t o : idx_)
      require(o < space_size_, ErrorKind::IndexOutOfRange, "event index " + std::to_string(o) + " out of range");
  }

  std::size_t space_size() const noexcept { return space_size_; }
  std::span<const std::size_t> indices() const noexcept { return idx_; }
  bool empty() const noexcept { return idx_.empty(); }
  bool proper() const noexcept { return !idx_.empty() && idx_.size() < space_size_; }
  bool contains(std::size_t o) const { return std::binary_search(idx_.begin(), idx_.end(), o); }

  std::vector<double> indicator() const {
    std::vector<double> out(space_size_, 0.0);
    for (std::size_t o : idx_) out[o] = 1.0;
    return out;
  }

 private:
  std::size_t space_size_;
  std::vector<std::size_t> idx_;
};

inline void require_proper_event(const Event& a, std::size_t space_size) {
  require(a.space_size() == space_size, ErrorKind::SpaceMismatch, "event defined on a different space");
  require(a.proper(), ErrorKind::EmptyOrFullEvent, "event must be a nonempty proper subset");
}

inline double mass(const Dist& p, const Event& a) {
  require(a.space_size() == p.size(), ErrorKind::SpaceMismatch, "event defined on a different space");
  double acc = 0.0;
  for (std::size_t o : a.indices()) acc += p[o];
  return acc;
}

inline double entropy(const Dist& p) {
  double h = 0.0;
  for (std::size_t o = 0; o < p.size(); ++o) h -= p[o] * p.log_p()[o];
  return h;
}

/// KL(P || Q) in nats.
inline double kl(const Dist& p, const Dist& q) {
  require_same_space(p.space(), q.space());
  double acc = 0.0;
  for (std::size_t o = 0; o < p.size(); ++o) acc += p[o] * (p.log_p()[o] - q.log_p()[o]);
  return std::max(acc, 0.0);
}

inline double tv(const Dist& p, const Dist& q) {
  require_same_space(p.space(), q.space());
  double acc = 0.0;
  for (std::size_t o = 0; o < p.size(); ++o) acc += std::abs(p[o] - q[o]);
  return 0.5 * acc;
}

namespace detail {

inline double weighted_dot(std::span<const double> w, std::span<const double> f, std::span<const double> g) {
  double acc = 0.0;
  for (std::size_t o = 0; o < w.size(); ++o) acc += w[o] * f[o] * g[o];
  return acc;
}

inline double weighted_mean(std::span<const double> w, std::span<const double> f) {
  double acc = 0.0;
  for (std::size_t o = 0; o < w.size(); ++o) acc += w[o] * f[o];
  return acc;
}

}  // namespace detail

inline double expectation(const Dist& p, const ScoreFn& f) {
  require_same_space(p.space(), f.space());
  return detail::weighted_mean(p.p(), f.values());
}

/// <f, g>_P = sum_o P(o) f(o) g(o).
inline double inner_p(const Dist& p, const ScoreFn& f, const ScoreFn& g) {
  require_same_space(p.space(), f.space());
  require_same_space(p.space(), g.space());
  return detail::weighted_dot(p.p(), f.values(), g.values());
}

inline double norm_p(const Dist& p, const ScoreFn& f) { return std::sqrt(std::max(inner_p(p, f, f), 0.0)); }

inline double covariance(const Dist& p, const ScoreFn& f, const ScoreFn& g) {
  require_same_space(p.space(), f.space());
  require_same_space(p.space(), g.space());
  const double mf = detail::weighted_mean(p.p(), f.values());
  const double mg = detail::weighted_mean(p.p(), g.values());
  double acc = 0.0;
  for (std::size_t o = 0; o < p.size(); ++o) acc += p[o] * (f[o] - mf) * (g[o] - mg);
  return acc;
}

inline double variance(const Dist& p, const ScoreFn& f) { return std::max(covariance(p, f, f), 0.0); }

/// f - E_P[f].
inline ScoreFn centered(const Dist& p, const ScoreFn& f) {
  const double mean = expectation(p, f);
  std::vector<double> out(f.values().begin(), f.values().end());
  for (double& v : out) v -= mean;
  return ScoreFn(f.space(), std::move(out));
}

/// P e^{scale*h} / Z.
inline Dist exponential_tilt(const Dist& p, const ScoreFn& h, double scale = 1.0) {
  require_same_space(p.space(), h.space());
  std::vector<double> logits(p.size());
  for (std::size_t o = 0; o < p.size(); ++o) logits[o] = p.log_p()[o] + scale * h[o];
  return Dist::from_logits(p.space(), logits);
}

struct CoarseGrainBound {
  double kl_value;
  double binary_bound;
};

/// KL(P||Q) together with the KL between the two-cell coarse-grainings
/// {A, A^c}, which never exceeds it.
inline CoarseGrainBound coarse_grain_bound(const Dist& p, const Dist& q, const Event& a) {
  require_same_space(p.space(), q.space());
  require_proper_event(a, p.size());
  double pa = 0.0, qa = 0.0, pc = 0.0, qc = 0.0;
  for (std::size_t o = 0; o < p.size(); ++o) {
    if (a.contains(o)) {
      pa += p[o];
      qa += q[o];
    } else {
      pc += p[o];
      qc += q[o];
    }
  }
  return {kl(p, q), pa * std::log(pa / qa) + pc * std::log(pc / qc)};
}

inline bool is_uniform(const Dist& p, double tolerance = 1e-12) {
  const auto lp = p.log_p();
  const auto [lo, hi] = std::minmax_element(lp.begin(), lp.end());
  return *hi - *lo <= tolerance;
}

}  // namespace compagency

#endif  // COMPAGENCY_CORE_HPP_
