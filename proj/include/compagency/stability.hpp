#ifndef COMPAGENCY_STABILITY_HPP_
#define COMPAGENCY_STABILITY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "compagency/core.hpp"
#include "compagency/pooling.hpp"
#include "compagency/random.hpp"
#include "compagency/welfare.hpp"

namespace compagency {

/// Reweights a child by target/base. Children of a decomposition of `base`
/// transported this way pool exactly to `target` with unchanged weights.
inline Dist transport(const Dist& child, const Dist& base, const Dist& target) {
  require_same_space(child.space(), base.space());
  require_same_space(child.space(), target.space());
  const auto lb = base.log_p();
  const auto lt = target.log_p();
  if (std::equal(lb.begin(), lb.end(), lt.begin())) return child;
  std::vector<double> logits(child.size());
  for (std::size_t o = 0; o < logits.size(); ++o) logits[o] = child.log_p()[o] + (lt[o] - lb[o]);
  return Dist::from_logits(child.space(), logits);
}

inline Decomposition transport_decomposition(const Decomposition& d, const Dist& target) {
  require(d.kind() == PoolKind::log, ErrorKind::PreconditionViolation, "transport needs a log-pool decomposition");
  require_same_space(d.space(), target.space());
  std::vector<Dist> moved;
  moved.reserve(d.size());
  for (const Dist& c : d.children()) moved.push_back(transport(c, d.parent(), target));
  return Decomposition(target, std::move(moved), d.weights(), PoolKind::log, tol::kRewitnessTv);
}

struct OpennessCertificate {
  double radius;  // tv units
  std::size_t samples;
  double min_gap_at_boundary;
  std::uint64_t seed;
  std::size_t radii_tested;
};

namespace detail {

/// Radius grid 0.5 * 2^{-k/4}, k = 0..160, scanned from the smallest up.
inline constexpr int kOpennessGridMaxK = 160;
inline constexpr int kOpennessRedraws = 8;

inline double openness_radius(int k) { return 0.5 * std::exp2(-static_cast<double>(k) / 4.0); }

/// Centered relative direction c = z - E_P z with tv(P, P(1 + c)) = 1.
inline std::vector<double> tv_unit_direction(const Dist& p, Rng& rng) {
  std::vector<double> c = normal_vector(rng, p.size());
  const double mean = weighted_mean(p.p(), c);
  double l1 = 0.0;
  for (std::size_t o = 0; o < c.size(); ++o) {
    c[o] -= mean;
    l1 += p[o] * std::abs(c[o]);
  }
  for (double& v : c) v /= 0.5 * l1;
  return c;
}

/// Target P(1 + r c) if every coordinate stays inside (min(1e-9, P/2), 1).
inline std::optional<Dist> tv_sphere_point(const Dist& p, std::span<const double> c, double r) {
  std::vector<double> q(p.size());
  for (std::size_t o = 0; o < q.size(); ++o) {
    q[o] = p[o] * (1.0 + r * c[o]);
    if (!(q[o] > std::min(1e-9, 0.5 * p[o]) && q[o] < 1.0)) return std::nullopt;
  }
  return Dist::from_masses(p.space(), q);
}

}  // namespace detail

/// Empirical radius of a tv ball around the parent in which transported
/// decompositions stay strictly unanimous.
///
/// Sample i uses directions drawn only from (seed, i), so the same seed with
/// more samples tests a superset of targets and can only shrink the radius.
/// The certified radius is the largest grid radius such that it and every
/// smaller grid radius are clean.
inline OpennessCertificate certify_openness(const Decomposition& d, std::size_t samples, std::uint64_t seed,
                                            double tolerance = tol::kValue) {
  require(unanimity_report(d, tolerance).strictly_unanimous, ErrorKind::NotStrictlyUnanimous,
          "openness needs a strictly unanimous decomposition");
  require(samples >= 1, ErrorKind::ParamOutOfRange, "need at least one sample");
  const Dist& p = d.parent();

  std::vector<std::vector<std::vector<double>>> directions(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    Rng rng = Rng::derive(seed, {0x09E4ULL, i});
    for (int a = 0; a < detail::kOpennessRedraws; ++a) directions[i].push_back(detail::tv_unit_direction(p, rng));
  }

  OpennessCertificate cert{0.0, samples, std::numeric_limits<double>::quiet_NaN(), seed, 0};
  for (int k = detail::kOpennessGridMaxK; k >= 0; --k) {
    const double r = detail::openness_radius(k);
    double worst = std::numeric_limits<double>::infinity();
    bool clean = true;
    for (std::size_t i = 0; i < samples && clean; ++i) {
      std::optional<Dist> target;
      for (const auto& c : directions[i]) {
        target = detail::tv_sphere_point(p, c, r);
        if (target) break;
      }
      if (!target) {
        clean = false;
        break;
      }
      const WelfareReport rep = unanimity_report(transport_decomposition(d, *target), tolerance);
      clean = rep.strictly_unanimous;
      worst = std::min(worst, rep.min_gap());
    }
    ++cert.radii_tested;
    if (!clean) break;
    cert.radius = r;
    cert.min_gap_at_boundary = worst;
  }
  require(cert.radius > 0.0, ErrorKind::NotFound, "no clean radius on the grid");
  return cert;
}

/// Derivative at s = 0 of s -> Delta_{P^(s)}(P), where P^(s) is P tilted by s*h.
inline double tilt_gap_derivative(const Dist& p, const ScoreFn& h) { return -covariance(p, h, log_of(p)); }

/// Central finite difference of the same map.
inline double tilt_gap_finite_difference(const Dist& p, const ScoreFn& h, double step = 1e-5) {
  const double up = welfare_gap(exponential_tilt(p, h, step), p);
  const double down = welfare_gap(exponential_tilt(p, h, -step), p);
  return (up - down) / (2.0 * step);
}

struct LocalAudit {
  std::vector<double> derivatives;
  double weighted_sum;
};

/// Tilts must satisfy sum_i beta_i h_i == 0 pointwise within 1e-9.
inline LocalAudit local_unanimity_audit(const Dist& p, std::span<const ScoreFn> tilts, const Weights& weights) {
  require(tilts.size() == weights.size(), ErrorKind::LengthMismatch, "one tilt per weight required");
  for (const ScoreFn& h : tilts) require_same_space(p.space(), h.space());
  for (std::size_t o = 0; o < p.size(); ++o) {
    double s = 0.0;
    for (std::size_t i = 0; i < tilts.size(); ++i) s += weights[i] * tilts[i][o];
    require(std::abs(s) <= tol::kValue, ErrorKind::TiltsNotCentered,
            "weighted tilt sum is " + std::to_string(s) + " at outcome " + std::to_string(o));
  }
  LocalAudit out{{}, 0.0};
  for (std::size_t i = 0; i < tilts.size(); ++i) {
    out.derivatives.push_back(tilt_gap_derivative(p, tilts[i]));
    out.weighted_sum += weights[i] * out.derivatives.back();
  }
  return out;
}

/// Delta_R(U): what agent R gains when outcomes follow the uniform.
inline double uniform_no_gain(const Dist& r) { return welfare_gap(r, Dist::uniform(r.space())); }

}  // namespace compagency

#endif  // COMPAGENCY_STABILITY_HPP_
