#ifndef COMPAGENCY_PERSONA_HPP_
#define COMPAGENCY_PERSONA_HPP_

// Persona geometry: centered log profiles of the children, first-order
// response of the pooled log-probabilities to weight changes, the
// compensation inequality for an amplified profile H, and first-order
// suppression of an event under a P-norm budget.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "compagency/core.hpp"
#include "compagency/pooling.hpp"

namespace compagency {

namespace tol {
/// |E_base[v]| bound for a LogProfile.
inline constexpr double kProfileCentering = 1e-10;
/// Relative residual below which a vector is treated as in the span.
inline constexpr double kSpanPivot = 1e-10;
/// Inner products within this distance of zero count as aligned.
inline constexpr double kAlignmentDeadZone = 1e-12;
}  // namespace tol

/// A log-probability profile centered under a base belief.
class LogProfile {
 public:
  LogProfile(Dist base, ScoreFn v) : base_(std::move(base)), v_(std::move(v)) {
    require_same_space(base_.space(), v_.space());
    const double mean = expectation(base_, v_);
    require(std::abs(mean) <= tol::kProfileCentering, ErrorKind::PreconditionViolation,
            "profile has mean " + std::to_string(mean) + " under its base");
  }

  /// l - E_base[l].
  static LogProfile centered(const Dist& base, const ScoreFn& l) { return LogProfile(base, compagency::centered(base, l)); }

  const Dist& base() const noexcept { return base_; }
  const ScoreFn& v() const noexcept { return v_; }
  const OutcomeSpace& space() const noexcept { return v_.space(); }

 private:
  Dist base_;
  ScoreFn v_;
};

/// v_i = log P_i - E_P[log P_i] under the parent P.
inline std::vector<LogProfile> centered_profiles(const Decomposition& d) {
  std::vector<LogProfile> out;
  out.reserve(d.size());
  for (const Dist& c : d.children()) out.push_back(LogProfile::centered(d.parent(), log_of(c)));
  return out;
}

namespace detail {

inline void require_zero_sum(std::span<const double> dbeta, std::size_t n) {
  require(dbeta.size() == n, ErrorKind::LengthMismatch, "weight change needs one entry per child");
  detail::require_finite(dbeta, "weight change");
  double s = 0.0;
  for (double x : dbeta) s += x;
  require(std::abs(s) <= tol::kNormalization, ErrorKind::DbetaNotZeroSum,
          "weight change sums to " + std::to_string(s));
}

inline Weights shifted_weights(const Weights& w, std::span<const double> dbeta, double t) {
  std::vector<double> b(w.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] = w[i] + t * dbeta[i];
    require(b[i] >= 0.0, ErrorKind::DbetaInconsistent, "weight change drives weight " + std::to_string(i) + " negative");
  }
  return Weights(std::move(b));
}

inline ScoreFn combine(std::span<const LogProfile> profiles, std::span<const double> coeffs) {
  std::vector<double> out(profiles.front().space().size(), 0.0);
  for (std::size_t i = 0; i < profiles.size(); ++i)
    for (std::size_t o = 0; o < out.size(); ++o) out[o] += coeffs[i] * profiles[i].v()[o];
  return ScoreFn(profiles.front().space(), std::move(out));
}

inline void require_shared_base(std::span<const LogProfile> profiles) {
  require(!profiles.empty(), ErrorKind::DegenerateSpan, "no profiles given");
  const auto b0 = profiles.front().base().log_p();
  for (const LogProfile& pr : profiles) {
    require_same_space(profiles.front().space(), pr.space());
    const auto b = pr.base().log_p();
    require(std::equal(b0.begin(), b0.end(), b.begin()), ErrorKind::PreconditionViolation,
            "profiles are centered under different bases");
  }
}

}  // namespace detail

/// log P' - log P where P' is the pool at weights beta + t * dbeta.
inline ScoreFn actual_delta_l(const Decomposition& d, std::span<const double> dbeta, double t = 1.0) {
  const Dist moved = log_pool(d.children(), detail::shifted_weights(d.weights(), dbeta, t));
  return log_of(moved) - log_of(d.parent());
}

/// First-order prediction sum_i dbeta_i v_i together with the exact
/// residual at any scale t.
class FirstOrderDeltaL {
 public:
  FirstOrderDeltaL(const Decomposition& d, std::span<const double> dbeta)
      : decomp_(d), dbeta_(dbeta.begin(), dbeta.end()), profiles_(centered_profiles(d)),
        predicted_(detail::combine(profiles_, dbeta_)) {}

  const ScoreFn& predicted() const noexcept { return predicted_; }
  std::span<const LogProfile> profiles() const noexcept { return profiles_; }

  /// r(t) = actual ΔL at t*dbeta minus t * predicted.
  ScoreFn residual(double t) const { return actual_delta_l(decomp_, dbeta_, t) - t * predicted_; }

  double residual_norm(double t) const { return norm_p(decomp_.parent(), residual(t)); }

 private:
  Decomposition decomp_;
  std::vector<double> dbeta_;
  std::vector<LogProfile> profiles_;
  ScoreFn predicted_;
};

inline FirstOrderDeltaL first_order_delta_l(const Decomposition& d, std::span<const double> dbeta) {
  detail::require_zero_sum(dbeta, d.size());
  return FirstOrderDeltaL(d, dbeta);
}

struct CompensationReport {
  std::vector<double> inner_with_h;  // <v_i, v_H>_P
  std::vector<bool> anti_aligned;
  double norm_h;         // ||v_H||_P
  double delta_l_norm;   // realized ||ΔL||_P
  double residual_norm;  // ||r||_P with r = ΔL - sum dbeta_i v_i
  double lhs;            // sum over anti-aligned of (dbeta_i)^+ |<v_i, v_H>|
  double rhs;            // delta ||v_H||^2 - (eps + ||r||) ||v_H|| - downgrade
  double downgrade;      // sum over aligned j != H of (dbeta_j)^- <v_j, v_H>
  double slack;          // lhs - rhs
  std::optional<std::size_t> waluigi;  // set when exactly one profile is anti-aligned
  /// (delta ||v_H||^2 - (eps + ||r||) ||v_H||) / |<v_W, v_H>|; only
  /// meaningful when bound_applicable.
  double explicit_bound = std::numeric_limits<double>::quiet_NaN();
  /// Single anti-aligned profile and no weight decrease on a profile with
  /// <v_j, v_H> above the dead zone.
  bool bound_applicable = false;
  double waluigi_increase = std::numeric_limits<double>::quiet_NaN();  // (dbeta_W)^+
};

/// Evaluates both sides of the compensation inequality for amplifying
/// child h_index by delta, with the residual computed exactly by re-pooling.
inline CompensationReport compensation_bound(const Decomposition& d, std::size_t h_index, double delta, double epsilon,
                                             std::span<const double> dbeta) {
  require(h_index < d.size(), ErrorKind::IndexOutOfRange, "H index out of range");
  detail::require_zero_sum(dbeta, d.size());
  require(delta >= 0.0 && std::isfinite(delta), ErrorKind::ParamOutOfRange, "delta must be nonnegative");
  require(epsilon >= 0.0 && std::isfinite(epsilon), ErrorKind::ParamOutOfRange, "epsilon must be nonnegative");
  require(std::abs(dbeta[h_index] - delta) <= tol::kNormalization, ErrorKind::DbetaInconsistent,
          "weight change on H does not equal delta");

  const Dist& p = d.parent();
  const FirstOrderDeltaL lin(d, dbeta);
  const ScoreFn dl = actual_delta_l(d, dbeta);

  CompensationReport rep;
  rep.delta_l_norm = norm_p(p, dl);
  require(rep.delta_l_norm <= epsilon * (1.0 + 1e-9) + 1e-12, ErrorKind::BudgetViolated,
          "realized deviation " + std::to_string(rep.delta_l_norm) + " exceeds budget " + std::to_string(epsilon));
  rep.residual_norm = norm_p(p, dl - lin.predicted());

  const auto profiles = lin.profiles();
  const ScoreFn& vh = profiles[h_index].v();
  rep.norm_h = norm_p(p, vh);
  rep.lhs = 0.0;
  rep.downgrade = 0.0;
  std::size_t anti_count = 0, last_anti = 0;
  bool aligned_downgraded = false;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double ip = inner_p(p, profiles[i].v(), vh);
    rep.inner_with_h.push_back(ip);
    const bool anti = i != h_index && ip < -tol::kAlignmentDeadZone;
    rep.anti_aligned.push_back(anti);
    if (anti) {
      rep.lhs += std::max(dbeta[i], 0.0) * std::abs(ip);
      ++anti_count;
      last_anti = i;
    } else if (i != h_index) {
      rep.downgrade += std::max(-dbeta[i], 0.0) * ip;
      if (dbeta[i] < 0.0 && ip > tol::kAlignmentDeadZone) aligned_downgraded = true;
    }
  }
  const double core = delta * rep.norm_h * rep.norm_h - (epsilon + rep.residual_norm) * rep.norm_h;
  rep.rhs = core - rep.downgrade;
  rep.slack = rep.lhs - rep.rhs;
  if (anti_count == 1) {
    rep.waluigi = last_anti;
    rep.explicit_bound = core / std::abs(rep.inner_with_h[last_anti]);
    rep.waluigi_increase = std::max(dbeta[last_anti], 0.0);
    rep.bound_applicable = !aligned_downgraded;
  }
  return rep;
}

struct EventChange {
  double exact;   // P'(A) - P(A), P' proportional to P e^{ΔL}
  double linear;  // <ΔL, g_A>_P
};

/// g_A = 1_A - P(A), the centered indicator.
inline ScoreFn centered_indicator(const Dist& p, const Event& a) {
  require_proper_event(a, p.size());
  return centered(p, ScoreFn(p.space(), a.indicator()));
}

inline EventChange event_first_order(const Dist& p, const Event& a, const ScoreFn& delta_l) {
  require_same_space(p.space(), delta_l.space());
  const ScoreFn g = centered_indicator(p, a);
  const auto dl = delta_l.values();
  double top = 0.0;
  for (double x : dl) top = std::max(top, std::abs(x));

  double num = 0.0, den = 0.0;
  if (top <= 50.0) {
    // E_P[g] = 0, so P'(A) - P(A) = E_P[g (e^{ΔL} - 1)] / E_P[e^{ΔL}].
    for (std::size_t o = 0; o < p.size(); ++o) {
      const double em1 = std::expm1(dl[o]);
      num += p[o] * g[o] * em1;
      den += p[o] * em1;
    }
    den += 1.0;
  } else {
    const double shift = *std::max_element(dl.begin(), dl.end());
    for (std::size_t o = 0; o < p.size(); ++o) {
      const double w = p[o] * std::exp(dl[o] - shift);
      num += w * g[o];
      den += w;
    }
  }
  return {num / den, inner_p(p, delta_l, g)};
}

/// P-orthogonal projection onto span{vectors}, by column-pivoted modified
/// Gram-Schmidt with one reorthogonalization pass.
struct SpanProjection {
  ScoreFn projection;
  std::size_t rank;
};

inline SpanProjection project_onto_span(const Dist& p, std::span<const ScoreFn> vectors, const ScoreFn& target) {
  require_same_space(p.space(), target.space());
  std::vector<std::vector<double>> work;
  double largest = 0.0;
  for (const ScoreFn& v : vectors) {
    require_same_space(p.space(), v.space());
    work.emplace_back(v.values().begin(), v.values().end());
    largest = std::max(largest, norm_p(p, v));
  }
  const auto pw = p.p();
  auto orthogonalize = [&](std::vector<double>& x, const std::vector<double>& q) {
    for (int pass = 0; pass < 2; ++pass) {
      const double c = detail::weighted_dot(pw, x, q);
      for (std::size_t o = 0; o < x.size(); ++o) x[o] -= c * q[o];
    }
  };

  std::vector<std::vector<double>> basis;
  std::vector<bool> used(work.size(), false);
  // Profiles are log-probability differences, so anything below the pivot
  // tolerance on an O(1) scale is rounding noise even if it is the largest.
  const double cutoff = tol::kSpanPivot * std::max(largest, 1.0);
  while (basis.size() < work.size() && largest > 0.0) {
    std::size_t best = work.size();
    double best_norm = -1.0;
    for (std::size_t j = 0; j < work.size(); ++j) {
      if (used[j]) continue;
      const double nj = std::sqrt(std::max(detail::weighted_dot(pw, work[j], work[j]), 0.0));
      if (nj > best_norm) {
        best_norm = nj;
        best = j;
      }
    }
    if (best_norm <= cutoff) break;
    used[best] = true;
    std::vector<double> q = work[best];
    for (double& x : q) x /= best_norm;
    for (std::size_t j = 0; j < work.size(); ++j)
      if (!used[j]) orthogonalize(work[j], q);
    basis.push_back(std::move(q));
  }

  std::vector<double> proj(p.size(), 0.0);
  std::vector<double> rest(target.values().begin(), target.values().end());
  for (const auto& q : basis) {
    const double c = detail::weighted_dot(pw, rest, q);
    for (std::size_t o = 0; o < rest.size(); ++o) {
      rest[o] -= c * q[o];
      proj[o] += c * q[o];
    }
  }
  // Second pass picks up what rounding left behind.
  for (const auto& q : basis) {
    const double c = detail::weighted_dot(pw, rest, q);
    for (std::size_t o = 0; o < rest.size(); ++o) {
      rest[o] -= c * q[o];
      proj[o] += c * q[o];
    }
  }
  return {ScoreFn(p.space(), std::move(proj)), basis.size()};
}

inline std::vector<ScoreFn> profile_vectors(std::span<const LogProfile> profiles) {
  std::vector<ScoreFn> out;
  out.reserve(profiles.size());
  for (const LogProfile& pr : profiles) out.push_back(pr.v());
  return out;
}

struct SuppressionPlan {
  ScoreFn delta_l;         // -eps * u_S
  double budget;           // eps
  double achieved;         // eps * ||Proj_S g_A||_P
  double projection_norm;  // ||Proj_S g_A||_P
  std::size_t span_dim;
  bool zero_projection;  // g_A is P-orthogonal to the span; delta_l is 0
};

/// Best first-order reduction of P(A) over ΔL in span{v_i} with
/// ||ΔL||_P <= eps.
inline SuppressionPlan optimal_suppression(std::span<const LogProfile> profiles, const Event& a, double epsilon) {
  detail::require_shared_base(profiles);
  require(epsilon > 0.0 && std::isfinite(epsilon), ErrorKind::ParamOutOfRange, "budget must be positive");
  const Dist& p = profiles.front().base();
  const ScoreFn g = centered_indicator(p, a);
  const SpanProjection sp = project_onto_span(p, profile_vectors(profiles), g);
  require(sp.rank > 0, ErrorKind::DegenerateSpan, "every profile is zero");
  const double pn = norm_p(p, sp.projection);
  if (pn <= 1e-12 * norm_p(p, g)) return {ScoreFn::zero(p.space()), epsilon, 0.0, pn, sp.rank, true};
  return {(-epsilon / pn) * sp.projection, epsilon, epsilon * pn, pn, sp.rank, false};
}

struct ProjectionGain {
  double gain;         // M(S1) - M(S0) on the value scale
  double u_norm;       // ||w - Proj_S0 w||_P
  double correlation;  // <g_A, u>_P / (||g_A||_P ||u||_P)
  double inner_gu;     // <g_A, u>_P
  double closed_form;  // eps |<g_A, u>_P| / ||u||_P
  double m0;
  double m1;
  double sq_norm_0;  // ||Proj_S0 g_A||^2
  double sq_norm_1;  // ||Proj_S1 g_A||^2
  double increment;  // <g_A, u>^2 / ||u||^2
  double pythagoras_residual;  // sq_norm_1 - sq_norm_0 - increment
  bool w_in_span;
};

/// Effect of adding the direction w to the control span S0 = span{profiles}.
inline ProjectionGain projection_gain(std::span<const LogProfile> profiles, const LogProfile& w, const Event& a,
                                      double epsilon) {
  detail::require_shared_base(profiles);
  {
    const LogProfile both[] = {profiles.front(), w};
    detail::require_shared_base(both);
  }
  require(epsilon > 0.0 && std::isfinite(epsilon), ErrorKind::ParamOutOfRange, "budget must be positive");
  const Dist& p = profiles.front().base();
  const ScoreFn g = centered_indicator(p, a);

  std::vector<ScoreFn> s0 = profile_vectors(profiles);
  const SpanProjection pg0 = project_onto_span(p, s0, g);
  const SpanProjection pw0 = project_onto_span(p, s0, w.v());
  const ScoreFn u = w.v() - pw0.projection;

  ProjectionGain out{};
  out.u_norm = norm_p(p, u);
  out.sq_norm_0 = inner_p(p, pg0.projection, pg0.projection);
  out.m0 = epsilon * std::sqrt(out.sq_norm_0);
  if (out.u_norm < tol::kSpanPivot) {
    out.w_in_span = true;
    out.m1 = out.m0;
    out.sq_norm_1 = out.sq_norm_0;
    return out;
  }
  s0.push_back(w.v());
  const SpanProjection pg1 = project_onto_span(p, s0, g);
  out.sq_norm_1 = inner_p(p, pg1.projection, pg1.projection);
  out.m1 = epsilon * std::sqrt(out.sq_norm_1);
  out.gain = out.m1 - out.m0;
  out.inner_gu = inner_p(p, g, u);
  out.increment = out.inner_gu * out.inner_gu / (out.u_norm * out.u_norm);
  out.pythagoras_residual = out.sq_norm_1 - out.sq_norm_0 - out.increment;
  out.closed_form = epsilon * std::abs(out.inner_gu) / out.u_norm;
  out.correlation = out.inner_gu / (norm_p(p, g) * out.u_norm);
  return out;
}

struct KlBudget {
  double kl_value;  // KL(P' || P)
  double half_var;  // Var_P(ΔL) / 2
};

/// KL(P'||P) for P' proportional to P e^{ΔL}, computed from the centered
/// deviation c so small perturbations keep full relative precision:
/// KL = E_P[c expm1(c)] / D - log1p(D - 1) with D = E_P[e^c].
inline KlBudget kl_budget(const Dist& p, const ScoreFn& delta_l) {
  require_same_space(p.space(), delta_l.space());
  const ScoreFn c = centered(p, delta_l);
  double top = 0.0;
  for (double x : c.values()) top = std::max(top, std::abs(x));
  const double half_var = 0.5 * variance(p, delta_l);
  if (top > 50.0) return {kl(exponential_tilt(p, c), p), half_var};
  double a = 0.0, b = 0.0;
  for (std::size_t o = 0; o < p.size(); ++o) {
    const double em1 = std::expm1(c[o]);
    a += p[o] * c[o] * em1;
    b += p[o] * em1;
  }
  return {std::max(a / (1.0 + b) - std::log1p(b), 0.0), half_var};
}

}  // namespace compagency

#endif  // COMPAGENCY_PERSONA_HPP_
