#ifndef COMPAGENCY_VERIFY_HPP_
#define COMPAGENCY_VERIFY_HPP_

// Seeded property checks grouped into suites. Every check draws from its
// own stream derived from (seed, check name), so results do not depend on
// which other checks run. Reports contain no timings unless asked for, which
// keeps repeated runs byte-identical.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "compagency/constructions.hpp"
#include "compagency/core.hpp"
#include "compagency/factorize.hpp"
#include "compagency/json_io.hpp"
#include "compagency/persona.hpp"
#include "compagency/pooling.hpp"
#include "compagency/random.hpp"
#include "compagency/reference.hpp"
#include "compagency/stability.hpp"
#include "compagency/welfare.hpp"

namespace compagency::verify {

struct Options {
  std::uint64_t seed = 42;
  /// Random targets per radius in openness certification.
  std::size_t samples = 64;
  /// Value tolerance for strict-unanimity verdicts and inequality slack.
  double tolerance = tol::kValue;
  bool timings = false;
};

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = true;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double tolerance = 0.0;
  std::vector<std::pair<std::string, double>> metrics;
  std::string first_error;
  double seconds = 0.0;
};

/// Accumulates instance outcomes and named metrics for one check.
class Recorder {
 public:
  Recorder(std::string suite, std::string name, double tolerance) {
    r_.suite = std::move(suite);
    r_.name = std::move(name);
    r_.tolerance = tolerance;
  }

  void instance(bool ok, const std::string& why = {}) {
    ++r_.instances;
    if (ok) return;
    ++r_.failures;
    if (r_.first_error.empty()) r_.first_error = why.empty() ? "instance " + std::to_string(r_.instances - 1) : why;
  }

  /// Runs one instance; an exception counts as a failure.
  void run(const std::function<bool()>& body) {
    try {
      instance(body());
    } catch (const std::exception& e) {
      instance(false, e.what());
    }
  }

  void set(const std::string& key, double v) {
    for (auto& [k, x] : r_.metrics)
      if (k == key) {
        x = v;
        return;
      }
    r_.metrics.emplace_back(key, v);
  }

  void max(const std::string& key, double v) { update(key, v, [](double a, double b) { return std::max(a, b); }); }
  void min(const std::string& key, double v) { update(key, v, [](double a, double b) { return std::min(a, b); }); }

  CheckResult finish() {
    r_.passed = r_.failures == 0 && r_.instances > 0;
    return std::move(r_);
  }

 private:
  template <typename F>
  void update(const std::string& key, double v, F f) {
    for (auto& [k, x] : r_.metrics)
      if (k == key) {
        x = f(x, v);
        return;
      }
    r_.metrics.emplace_back(key, v);
  }

  CheckResult r_;
};

// ---------------------------------------------------------------------------
// Instance helpers

inline Rng check_rng(const Options& o, std::string_view name) { return Rng::derive(o.seed, {fnv1a64(name)}); }

inline Decomposition random_decomposition(Rng& rng, std::size_t m, std::size_t n, double floor, double spread = 1.0,
                                          PoolKind kind = PoolKind::log) {
  const OutcomeSpace space(m);
  std::vector<Dist> children;
  for (std::size_t i = 0; i < n; ++i) children.push_back(random_dist(rng, space, spread));
  return Decomposition::from_children(std::move(children), floored_weights(rng, n, floor), kind);
}

inline Event random_proper_event(Rng& rng, std::size_t m) {
  std::vector<std::size_t> idx;
  for (std::size_t o = 0; o < m; ++o)
    if (rng.uniform() < 0.5) idx.push_back(o);
  if (idx.empty()) idx.push_back(rng.index(0, m - 1));
  if (idx.size() == m) idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(rng.index(0, m - 1)));
  return Event(m, std::move(idx));
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct ExistenceCase {
  std::size_t n;
  Weights weights;
  std::string label;
};

/// Uniform plus two skewed weight vectors for n in {2, 3, 5}.
inline std::vector<ExistenceCase> existence_cases() {
  const std::vector<std::pair<std::size_t, std::vector<std::vector<double>>>> table{
      {2, {{0.5, 0.5}, {0.7, 0.3}, {0.9, 0.1}}},
      {3, {{1.0, 1.0, 1.0}, {0.5, 0.3, 0.2}, {0.8, 0.1, 0.1}}},
      {5, {{1, 1, 1, 1, 1}, {0.4, 0.25, 0.15, 0.12, 0.08}, {0.6, 0.1, 0.1, 0.1, 0.1}}},
  };
  const char* names[] = {"uniform", "skew_a", "skew_b"};
  std::vector<ExistenceCase> out;
  for (const auto& [n, ws] : table)
    for (std::size_t k = 0; k < ws.size(); ++k)
      out.push_back({n, Weights::normalized(ws[k]), "n" + std::to_string(n) + "_" + names[k]});
  return out;
}

// ---------------------------------------------------------------------------
// pools

inline CheckResult check_pool_oracle(const Options& o, std::size_t count = 1000) {
  Recorder rec("pools", "pool_oracle", 1e-12);
  Rng rng = check_rng(o, "pool_oracle");
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t m = rng.index(2, 10), n = rng.index(2, 5);
    const OutcomeSpace space(m);
    std::vector<Dist> agents;
    for (std::size_t i = 0; i < n; ++i) agents.push_back(random_dist(rng, space, 1.5));
    std::vector<double> raw(n);
    for (double& b : raw) b = rng.uniform(0.01, 1.0);
    if (rng.uniform() < 0.2) raw[rng.index(0, n - 1)] = 0.0;
    const Weights w = Weights::normalized(raw);
    rec.run([&] {
      const double tl = static_cast<double>(reference::tv(log_pool(agents, w).p(), reference::log_pool(agents, w.beta())));
      const double tm =
          static_cast<double>(reference::tv(linear_pool(agents, w).p(), reference::linear_pool(agents, w.beta())));
      rec.max("max_tv_log", tl);
      rec.max("max_tv_linear", tm);
      return tl <= 1e-12 && tm <= 1e-12;
    });
  }
  return rec.finish();
}

inline CheckResult check_tilt_roundtrip(const Options& o, std::size_t count = 300) {
  Recorder rec("pools", "tilt_roundtrip", 1e-10);
  Rng rng = check_rng(o, "tilt_roundtrip");
  for (std::size_t k = 0; k < count; ++k) {
    const Decomposition d = random_decomposition(rng, rng.index(2, 10), rng.index(2, 6), 0.02);
    rec.run([&] {
      const auto h = tilt_representation(d);
      double worst_sum = 0.0, worst_tv = 0.0;
      for (std::size_t x = 0; x < d.parent().size(); ++x) {
        double s = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) s += d.weights()[i] * h[i][x];
        worst_sum = std::max(worst_sum, std::abs(s));
      }
      for (std::size_t i = 0; i < d.size(); ++i) worst_tv = std::max(worst_tv, tv(exponential_tilt(d.parent(), h[i]), d.child(i)));
      rec.max("max_weighted_tilt_sum", worst_sum);
      rec.max("max_reconstruction_tv", worst_tv);
      return worst_sum <= 1e-9 && worst_tv <= 1e-10;
    });
  }
  return rec.finish();
}

inline CheckResult check_duplicate_invariance(const Options& o, std::size_t count = 300) {
  Recorder rec("pools", "duplicate_invariance", 1e-12);
  Rng rng = check_rng(o, "duplicate_invariance");
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t m = rng.index(2, 10), n = rng.index(2, 5);
    const OutcomeSpace space(m);
    std::vector<Dist> agents;
    for (std::size_t i = 0; i < n; ++i) agents.push_back(random_dist(rng, space));
    const Weights w = floored_weights(rng, n, 0.05);
    const std::size_t dup = rng.index(0, n - 1);
    std::vector<Dist> more = agents;
    more.push_back(agents[dup]);
    std::vector<double> b(w.beta().begin(), w.beta().end());
    b[dup] *= 0.5;
    b.push_back(b[dup]);
    const Weights w2(b);
    rec.run([&] {
      const double tl = tv(log_pool(agents, w), log_pool(more, w2));
      const double tm = tv(linear_pool(agents, w), linear_pool(more, w2));
      rec.max("max_tv", std::max(tl, tm));
      return tl <= 1e-12 && tm <= 1e-12;
    });
  }
  return rec.finish();
}

// ---------------------------------------------------------------------------
// welfare

inline CheckResult check_gap_identity(const Options& o, std::size_t count = 1000) {
  Recorder rec("welfare", "gap_identity", o.tolerance);
  Rng rng = check_rng(o, "gap_identity");
  for (std::size_t k = 0; k < count; ++k) {
    const OutcomeSpace space(rng.index(2, 10));
    const Dist r = random_dist(rng, space, rng.uniform(0.1, 3.0));
    const Dist p = random_dist(rng, space, rng.uniform(0.1, 3.0));
    rec.run([&] {
      const double direct = welfare_gap(r, p);
      const auto identity = reference::entropy(r.p()) - reference::entropy(p.p()) - reference::kl(p.p(), r.p());
      const double err = std::abs(direct - static_cast<double>(identity));
      rec.max("max_abs_diff", err);
      return err <= o.tolerance;
    });
  }
  return rec.finish();
}

inline CheckResult check_binary_census(const Options& o) {
  Recorder rec("welfare", "binary_census", o.tolerance);
  std::size_t both_positive = 0;
  double worst_closed = 0.0, best_min_gap = -std::numeric_limits<double>::infinity();
  const OutcomeSpace space(2);
  for (int a = 0; a < 50; ++a) {
    for (int b = 0; b < 50; ++b) {
      if (a == b) continue;
      const double x1 = 0.01 + a * 0.98 / 49.0, x2 = 0.01 + b * 0.98 / 49.0;
      for (int k = 1; k <= 9; ++k) {
        const double b1 = 0.1 * k;
        rec.run([&] {
          const std::vector<Dist> agents{make_dist(space, std::vector<double>{x1, 1 - x1}),
                                         make_dist(space, std::vector<double>{x2, 1 - x2})};
          const Dist pool = log_pool(agents, Weights({b1, 1 - b1}));
          const double g1 = welfare_gap(agents[0], pool), g2 = welfare_gap(agents[1], pool);
          const double c1 = binary_gap_closed_form(agents[0][0], pool[0]);
          const double c2 = binary_gap_closed_form(agents[1][0], pool[0]);
          const double err = std::max(std::abs(g1 - c1), std::abs(g2 - c2));
          worst_closed = std::max(worst_closed, err);
          best_min_gap = std::max(best_min_gap, std::min(g1, g2));
          const bool both = g1 > o.tolerance && g2 > o.tolerance;
          if (both) ++both_positive;
          return !both && err <= 1e-10;
        });
      }
    }
  }
  rec.set("both_positive", static_cast<double>(both_positive));
  rec.set("max_closed_form_err", worst_closed);
  rec.set("max_min_gap", best_min_gap);
  return rec.finish();
}

inline CheckResult check_linear_impossibility(const Options& o, std::size_t count = 500) {
  Recorder rec("welfare", "linear_impossibility", 1e-12);
  Rng rng = check_rng(o, "linear_impossibility");
  for (std::size_t k = 0; k < count; ++k) {
    const Decomposition d = random_decomposition(rng, rng.index(2, 10), rng.index(2, 5), 0.05, 1.0, PoolKind::linear);
    rec.run([&] {
      const double s = weighted_gap_sum(d);
      rec.max("max_weighted_gap_sum", s);
      return s < -1e-12;
    });
  }
  return rec.finish();
}

inline CheckResult check_covariance_condition(const Options& o, std::size_t count = 500) {
  Recorder rec("welfare", "covariance_condition", o.tolerance);
  Rng rng = check_rng(o, "covariance_condition");
  for (std::size_t k = 0; k < count; ++k) {
    const OutcomeSpace space(rng.index(2, 10));
    const Dist pi = random_dist(rng, space), p = random_dist(rng, space);
    const ScoreFn w(space, normal_vector(rng, space.size(), 3.0));
    rec.run([&] {
      const CovarianceCondition c = covariance_condition(pi, w, p, o.tolerance);
      // Cov_{P_i}(W, P/P_i) equals E_P[W] - E_{P_i}[W] exactly.
      const double err = std::abs(c.covariance - c.welfare_difference);
      rec.max("max_identity_err", err);
      return c.compositional == c.direct_compositional && err <= 1e-9;
    });
  }
  return rec.finish();
}

inline CheckResult check_cyclic_welfare(const Options& o) {
  Recorder rec("welfare", "cyclic_welfare", o.tolerance);
  for (std::size_t n = 2; n <= 8; ++n) {
    for (double frac : {0.1, 0.5, 0.9}) {
      const double eps = frac / static_cast<double>(n), C = 10.0;
      rec.run([&] {
        const CyclicWelfareInstance inst = cyclic_welfare_instance(n, eps, C);
        const Dist pool = inst.pool();
        bool ok = is_uniform(pool, 1e-12);
        for (std::size_t i = 0; i < n; ++i) {
          const CovarianceCondition c = covariance_condition(inst.agents[i], inst.welfare[i], pool, o.tolerance);
          const double margin = C * (1.0 / static_cast<double>(n) - eps);
          rec.max("max_margin_err", std::abs(c.welfare_difference - margin));
          ok = ok && c.compositional && std::abs(c.welfare_difference - margin) <= 1e-9;
        }
        return ok;
      });
    }
  }
  return rec.finish();
}

// ---------------------------------------------------------------------------
// constructions

inline CheckResult check_analytic_existence(const Options& o) {
  Recorder rec("constructions", "analytic_existence", o.tolerance);
  for (const ExistenceCase& c : existence_cases()) {
    rec.run([&] {
      const EpsilonSearch s = search_epsilon_for_unanimity(c.n, c.weights, o.tolerance);
      const WelfareReport r = unanimity_report(analytic_unanimity_instance(c.n, s.epsilon, c.weights), o.tolerance);
      rec.set("eps_" + c.label, s.epsilon);
      rec.set("min_gap_" + c.label, r.min_gap());
      return r.strictly_unanimous && r.min_gap() > o.tolerance;
    });
  }
  return rec.finish();
}

inline CheckResult check_peaked_threshold(const Options& o, std::size_t betas = 200) {
  Recorder rec("constructions", "peaked_threshold", 0.0);
  Rng rng = check_rng(o, "peaked_threshold");
  for (std::size_t n : {std::size_t{2}, std::size_t{4}}) {
    std::vector<Weights> ws;
    for (std::size_t k = 0; k < betas; ++k) ws.push_back(floored_weights(rng, n, 0.05));
    rec.run([&] {
      const PeakedThreshold t = discover_peaked_threshold(n, ws);
      rec.set("threshold_eps_n" + std::to_string(n), t.epsilon);
      rec.set("worst_sum_n" + std::to_string(n), t.worst_sum);
      return t.worst_sum < 0.0;
    });
  }
  return rec.finish();
}

inline CheckResult check_peaked_log_normalizer(const Options&) {
  Recorder rec("constructions", "peaked_log_normalizer_slope", 0.05);
  const std::vector<std::vector<double>> betas{{0.5, 0.3, 0.2}, {0.25, 0.25, 0.25, 0.25}, {0.7, 0.3}};
  for (const auto& b : betas) {
    rec.run([&] {
      const Weights w(b);
      std::vector<double> xs, ys;
      for (int k = 6; k <= 12; ++k) {
        const double eps = std::pow(10.0, -k);
        xs.push_back(std::log(eps));
        ys.push_back(peaked_log_normalizer(b.size(), eps, w));
      }
      // Plain linear regression of log Z on log eps.
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      const double n = static_cast<double>(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
      }
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      const double expected = 1.0 - *std::max_element(b.begin(), b.end());
      const double rel = std::abs(slope - expected) / expected;
      rec.max("max_rel_slope_err", rel);
      return rel <= 0.05;
    });
  }
  return rec.finish();
}

// ---------------------------------------------------------------------------
// factorize

inline CheckResult check_split_invariance(const Options& o, std::size_t count = 500) {
  Recorder rec("factorize", "split_invariance", 1e-10);
  Rng rng = check_rng(o, "split_invariance");
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t m = rng.index(2, 10);
    const Decomposition d = random_decomposition(rng, m, rng.index(2, 5), 0.05);
    const std::size_t i = rng.index(0, d.size() - 1);
    const double alpha = rng.uniform(0.05, 0.95);
    std::vector<double> gv = normal_vector(rng, m, rng.uniform(0.0, 4.0));
    if (k % 10 == 0) {
      std::fill(gv.begin(), gv.end(), 0.0);
      gv[rng.index(0, m - 1)] = -20.0;
    }
    const ScoreFn g(d.space(), gv);
    rec.run([&] {
      const SplitCheck s = split_invariance_check(d, i, alpha, g);
      const SplitCheck clone = split_invariance_check(d, i, alpha, ScoreFn::zero(d.space()));
      double gap_diff = 0.0;
      for (std::size_t j = 0, src = 0; j < clone.split.size(); ++j) {
        gap_diff = std::max(gap_diff, std::abs(welfare_gap(clone.split.child(j), d.parent()) -
                                               welfare_gap(d.child(src), d.parent())));
        if (!(j == i)) ++src;
      }
      rec.max("max_tv_delta", s.tv_delta);
      rec.max("max_clone_tv_delta", clone.tv_delta);
      rec.max("max_clone_gap_diff", gap_diff);
      return s.tv_delta <= 1e-10 && clone.tv_delta <= 1e-10 && gap_diff <= 1e-10;
    });
  }
  return rec.finish();
}

inline CheckResult check_parent_benefit(const Options&) {
  Recorder rec("factorize", "parent_benefit", 0.0);
  rec.run([&] {
    const Dist p1 = make_dist({0.5, 0.3, 0.2});
    const auto lambdas = default_lambda_schedule();
    const ParentBenefitSweep sw = parent_benefit_sweep(p1, 2.0, 0.5, 2, lambdas);
    if (!sw.first_negative) return false;
    const ParentBenefitReport& r = sw.steps[*sw.first_negative];
    rec.set("lambda", r.lambda);
    rec.set("parent_gap", r.parent_gap);
    rec.set("sub_gap", r.sub_gap);
    rec.set("kl_pt_sub", r.kl_value);
    rec.set("binary_bound", r.binary_bound);
    rec.set("pool_tv", r.pool_tv);
    return r.parent_gap > 0.0 && r.sub_gap < 0.0 && r.pool_tv <= 1e-12 && r.kl_value >= r.binary_bound - 1e-12;
  });
  return rec.finish();
}

inline CheckResult check_factor_pairwise_distinct(const Options& o, std::size_t count = 200) {
  Recorder rec("factorize", "factor_pairwise_distinct", tol::kWitnessTv);
  Rng rng = check_rng(o, "factor_pairwise_distinct");
  for (std::size_t k = 0; k < count; ++k) {
    const OutcomeSpace space(rng.index(2, 10));
    const Dist p = random_dist(rng, space);
    const std::size_t n = rng.index(2, 6);
    const Weights w = floored_weights(rng, n, 0.05);
    rec.run([&] {
      const Factorization f = factor_pairwise_distinct(p, w, o.seed + k);
      rec.max("max_witness_tv", f.decomposition.witness_tv());
      rec.min("min_pairwise_tv", f.provenance.min_pairwise_tv);
      rec.min("min_parent_tv", f.provenance.min_parent_tv);
      return f.decomposition.witness_tv() <= tol::kWitnessTv && f.provenance.min_pairwise_tv > tol::kDistinctTv &&
             f.provenance.min_parent_tv > tol::kDistinctTv;
    });
  }
  return rec.finish();
}

inline CheckResult check_factor_with_fixed(const Options& o, std::size_t count = 200) {
  Recorder rec("factorize", "factor_with_fixed", tol::kWitnessTv);
  Rng rng = check_rng(o, "factor_with_fixed");
  for (std::size_t k = 0; k < count; ++k) {
    const OutcomeSpace space(rng.index(2, 10));
    const Dist p = random_dist(rng, space);
    const std::size_t m = rng.index(1, 3), n = m + rng.index(2, 3);
    std::vector<Dist> fixed;
    for (std::size_t i = 0; i < m; ++i) fixed.push_back(random_dist(rng, space, 3.0));
    const Weights w = floored_weights(rng, n, 0.05);
    rec.run([&] {
      const Factorization f = factor_with_fixed(p, fixed, w, o.seed + k);
      bool verbatim = true;
      for (std::size_t i = 0; i < m; ++i)
        verbatim = verbatim && std::equal(fixed[i].p().begin(), fixed[i].p().end(), f.decomposition.child(i).p().begin());
      rec.max("max_witness_tv", f.decomposition.witness_tv());
      return verbatim && f.decomposition.witness_tv() <= tol::kWitnessTv;
    });
  }
  return rec.finish();
}

// ---------------------------------------------------------------------------
// stability

inline CheckResult check_transport_exactness(const Options& o, std::size_t count = 500) {
  Recorder rec("stability", "transport_exactness", 1e-10);
  Rng rng = check_rng(o, "transport_exactness");
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t m = rng.index(2, 10);
    const Decomposition d = random_decomposition(rng, m, rng.index(2, 6), 0.05);
    const Dist target = random_dist(rng, d.space(), rng.uniform(0.1, 3.0));
    rec.run([&] {
      const Decomposition t = transport_decomposition(d, target);
      const double pooled_tv = tv(log_pool(t.children(), t.weights()), target);
      bool identity = true;
      for (const Dist& c : d.children()) {
        const Dist same = transport(c, d.parent(), d.parent());
        identity = identity && std::equal(c.p().begin(), c.p().end(), same.p().begin());
      }
      rec.max("max_pool_tv", pooled_tv);
      return pooled_tv <= 1e-10 && identity;
    });
  }
  return rec.finish();
}

inline CheckResult check_openness(const Options& o) {
  Recorder rec("stability", "openness", o.tolerance);
  std::uint64_t i = 0;
  for (const ExistenceCase& c : existence_cases()) {
    rec.run([&] {
      const EpsilonSearch s = search_epsilon_for_unanimity(c.n, c.weights, o.tolerance);
      const Decomposition d = analytic_unanimity_instance(c.n, s.epsilon, c.weights);
      const OpennessCertificate cert = certify_openness(d, o.samples, o.seed + i, o.tolerance);
      rec.set("radius_" + c.label, cert.radius);
      return cert.radius > 0.0 && cert.min_gap_at_boundary > o.tolerance;
    });
    ++i;
  }
  return rec.finish();
}

inline CheckResult check_local_impossibility(const Options& o, std::size_t count = 500) {
  Recorder rec("stability", "local_impossibility", 1e-8);
  Rng rng = check_rng(o, "local_impossibility");
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t m = rng.index(2, 10), n = rng.index(2, 5);
    const OutcomeSpace space(m);
    const Dist p = random_dist(rng, space);
    const Weights w = floored_weights(rng, n, 0.05);
    std::vector<std::vector<double>> hv;
    std::vector<double> last(m, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      hv.push_back(normal_vector(rng, m));
      for (std::size_t x = 0; x < m; ++x) last[x] -= w[i] * hv.back()[x];
    }
    for (double& v : last) v /= w[n - 1];
    hv.push_back(last);
    std::vector<ScoreFn> tilts;
    for (auto& h : hv) tilts.emplace_back(space, h);
    rec.run([&] {
      const LocalAudit a = local_unanimity_audit(p, tilts, w);
      double worst_rel = 0.0;
      const double lp_norm = norm_p(p, centered(p, log_of(p)));
      for (std::size_t i = 0; i < n; ++i) {
        const double fd = tilt_gap_finite_difference(p, tilts[i]);
        const double scale = std::max(std::abs(a.derivatives[i]), norm_p(p, centered(p, tilts[i])) * lp_norm);
        if (scale > 0.0) worst_rel = std::max(worst_rel, std::abs(fd - a.derivatives[i]) / scale);
      }
      const bool some_nonpositive =
          std::any_of(a.derivatives.begin(), a.derivatives.end(), [](double v) { return v <= 1e-8; });
      rec.max("max_abs_weighted_sum", std::abs(a.weighted_sum));
      rec.max("max_fd_rel_err", worst_rel);
      return std::abs(a.weighted_sum) <= 1e-8 && worst_rel <= 1e-6 && some_nonpositive;
    });
  }
  return rec.finish();
}

inline CheckResult check_uniform_no_gain(const Options& o, std::size_t count = 500) {
  Recorder rec("stability", "uniform_no_gain", 1e-10);
  Rng rng = check_rng(o, "uniform_no_gain");
  for (std::size_t k = 0; k < count; ++k) {
    const OutcomeSpace space(rng.index(2, 10));
    const Dist r = random_dist(rng, space, rng.uniform(0.1, 3.0));
    rec.run([&] {
      const double g = uniform_no_gain(r);
      const std::vector<double> u(space.size(), 1.0 / static_cast<double>(space.size()));
      const auto sym = reference::kl(r.p(), u) + reference::kl(u, r.p());
      const double err = std::abs(g + static_cast<double>(sym));
      rec.max("max_identity_err", err);
      rec.max("max_gap", g);
      return g <= 0.0 && err <= 1e-10;
    });
  }
  return rec.finish();
}

// ---------------------------------------------------------------------------
// persona

inline CheckResult check_linearization_order(const Options& o, std::size_t count = 100) {
  Recorder rec("persona", "linearization_order", 1.9);
  Rng rng = check_rng(o, "linearization_order");
  const std::vector<double> ts{1e-1, 1e-2, 1e-3, 1e-4};
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t n = rng.index(2, 5);
    const Decomposition d = random_decomposition(rng, rng.index(3, 10), n, 0.1);
    std::vector<double> db = normal_vector(rng, n);
    double mean = 0.0;
    for (double v : db) mean += v / static_cast<double>(n);
    double top = 0.0;
    for (double& v : db) {
      v -= mean;
      top = std::max(top, std::abs(v));
    }
    const double min_beta = *std::min_element(d.weights().beta().begin(), d.weights().beta().end());
    for (double& v : db) v *= 0.5 * min_beta / top;
    rec.run([&] {
      const FirstOrderDeltaL lin = first_order_delta_l(d, db);
      std::vector<double> rs;
      for (double t : ts) rs.push_back(lin.residual_norm(t));
      const double slope = loglog_slope(ts, rs);
      rec.min("min_slope", slope);
      return slope >= 1.9;
    });
  }
  return rec.finish();
}

namespace gen {

/// Zero-sum weight change with dbeta[h] = delta, all weights kept positive.
inline std::vector<double> random_dbeta(Rng& rng, const Weights& w, std::size_t h, double delta) {
  const std::size_t n = w.size();
  const double min_beta = *std::min_element(w.beta().begin(), w.beta().end());
  std::vector<double> z(n, 0.0);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == h) continue;
    z[i] = rng.uniform(-1.0, 1.0) * 0.25 * min_beta;
    mean += z[i] / static_cast<double>(n - 1);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (i != h) z[i] -= mean + delta / static_cast<double>(n - 1);
  z[h] = 0.0;
  double rest = 0.0;
  for (double v : z) rest += v;
  z[h] = -rest;  // equals delta up to rounding, and makes the sum exactly zero
  return z;
}

}  // namespace gen

inline CheckResult check_compensation(const Options& o, std::size_t count = 200, std::size_t engineered = 50) {
  Recorder rec("persona", "compensation", o.tolerance);
  Rng rng = check_rng(o, "compensation");
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t n = rng.index(3, 6);
    const Decomposition d = random_decomposition(rng, rng.index(3, 10), n, 0.1);
    const std::size_t h = rng.index(0, n - 1);
    const double min_beta = *std::min_element(d.weights().beta().begin(), d.weights().beta().end());
    const std::vector<double> db = gen::random_dbeta(rng, d.weights(), h, 0.25 * min_beta * rng.uniform(0.2, 1.0));
    const double stretch = 1.0 + rng.uniform(0.0, 0.5);
    rec.run([&] {
      const double eps = norm_p(d.parent(), actual_delta_l(d, db)) * stretch;
      const CompensationReport r = compensation_bound(d, h, db[h], eps, db);
      rec.min("min_slack", r.slack);
      return r.slack >= -o.tolerance;
    });
  }
  std::size_t in_regime = 0;
  for (std::size_t k = 0; k < engineered; ++k) {
    const std::size_t m = rng.index(4, 12), n = rng.index(3, 6);
    const OutcomeSpace space(m);
    std::vector<double> dir = normal_vector(rng, m);
    double mean = 0.0, top = 0.0;
    for (double v : dir) mean += v / static_cast<double>(m);
    for (double& v : dir) {
      v -= mean;
      top = std::max(top, std::abs(v));
    }
    const double a = rng.uniform(0.5, 1.5);
    auto tilted = [&](double sign, double noise) {
      std::vector<double> l(m);
      for (std::size_t x = 0; x < m; ++x) l[x] = sign * a * dir[x] / top + noise * a * rng.normal();
      return Dist::from_logits(space, l);
    };
    std::vector<Dist> children{tilted(1.0, 0.0), tilted(-1.0, 0.05), Dist::uniform(space)};
    while (children.size() < n) children.push_back(tilted(1.0, 0.05));
    const Decomposition d = Decomposition::from_children(std::move(children), Weights::uniform(n));
    const double delta = rng.uniform(0.2, 1.0) / (2.0 * static_cast<double>(n));
    std::vector<double> db(n, 0.0);
    db[0] = delta;
    db[1] = delta;
    db[2] = -2.0 * delta;
    rec.run([&] {
      const double eps = norm_p(d.parent(), actual_delta_l(d, db)) * 1.05;
      const CompensationReport r = compensation_bound(d, 0, delta, eps, db);
      const bool regime = eps + r.residual_norm < delta * r.norm_h;
      if (regime) ++in_regime;
      rec.min("min_slack", r.slack);
      rec.min("min_engineered_bound", r.explicit_bound);
      return regime && r.waluigi == std::optional<std::size_t>(1) && r.bound_applicable && r.explicit_bound > 0.0 &&
             r.waluigi_increase >= r.explicit_bound - o.tolerance && r.slack >= -o.tolerance;
    });
  }
  rec.set("engineered_in_regime", static_cast<double>(in_regime));
  return rec.finish();
}

inline CheckResult check_suppression_optimality(const Options& o, std::size_t count = 100, std::size_t directions = 10000) {
  Recorder rec("persona", "suppression_optimality", o.tolerance);
  Rng rng = check_rng(o, "suppression_optimality");
  const std::vector<double> budgets{1e-3, 1e-2, 1e-1, 1.0};
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t m = rng.index(4, 12), n = rng.index(2, 5);
    const Decomposition d = random_decomposition(rng, m, n, 0.05);
    const Event a = random_proper_event(rng, m);
    Rng search = Rng::derive(o.seed, {fnv1a64("suppression_search"), k});
    rec.run([&] {
      const auto profiles = centered_profiles(d);
      const Dist& p = d.parent();
      const double eps = 0.1;
      const SuppressionPlan plan = optimal_suppression(profiles, a, eps);
      const ScoreFn g = centered_indicator(p, a);
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < directions; ++s) {
        const std::vector<double> c = normal_vector(search, n);
        const ScoreFn dl = compagency::detail::combine(profiles, c);
        const double nrm = norm_p(p, dl);
        if (nrm == 0.0) continue;
        best = std::max(best, -inner_p(p, dl, g) * eps / nrm);
      }
      const double realized = -inner_p(p, plan.delta_l, g);
      double ratio_spread = 0.0;
      const double base_ratio = plan.achieved / eps;
      for (double b : budgets) {
        const double r = optimal_suppression(profiles, a, b).achieved / b;
        ratio_spread = std::max(ratio_spread, std::abs(r - base_ratio) / std::max(base_ratio, 1e-300));
      }
      rec.max("max_excess", best - plan.achieved);
      rec.max("max_realized_err", std::abs(realized - plan.achieved));
      rec.max("max_linearity_rel_err", ratio_spread);
      return best <= plan.achieved + o.tolerance && std::abs(realized - plan.achieved) <= 1e-12 &&
             norm_p(p, plan.delta_l) <= eps * (1.0 + 1e-9) && ratio_spread <= 1e-12;
    });
  }
  return rec.finish();
}

inline CheckResult check_projection_gain(const Options& o, std::size_t count = 500) {
  Recorder rec("persona", "projection_gain", 1e-10);
  Rng rng = check_rng(o, "projection_gain");
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t m = rng.index(4, 10), n = rng.index(2, m - 2);
    const Decomposition d = random_decomposition(rng, m, n, 0.02);
    const Dist q = random_dist(rng, d.space());
    const Event a = random_proper_event(rng, m);
    const std::vector<double> coeffs = normal_vector(rng, n);
    rec.run([&] {
      const auto profiles = centered_profiles(d);
      const LogProfile w = LogProfile::centered(d.parent(), log_of(q));
      const ProjectionGain g = projection_gain(profiles, w, a, 0.1);
      const LogProfile inside(d.parent(), compagency::detail::combine(profiles, coeffs));
      const ProjectionGain g0 = projection_gain(profiles, inside, a, 0.1);
      const bool should_gain = std::abs(g.inner_gu) / g.u_norm > 1e-8;
      rec.max("max_pythagoras_residual", std::abs(g.pythagoras_residual));
      rec.min("min_u_norm", g.u_norm);
      return !g.w_in_span && std::abs(g.pythagoras_residual) <= 1e-10 && (!should_gain || g.gain > 0.0) &&
             g0.w_in_span && g0.gain == 0.0;
    });
  }
  return rec.finish();
}

inline CheckResult check_kl_budget(const Options& o, std::size_t count = 500) {
  Recorder rec("persona", "kl_budget", 0.1);
  Rng rng = check_rng(o, "kl_budget");
  const double floor = 1e-10;
  for (std::size_t k = 0; k < count; ++k) {
    const OutcomeSpace space(rng.index(2, 10));
    const Dist p = random_dist(rng, space);
    const ScoreFn raw(space, normal_vector(rng, space.size()));
    const double target = 0.01 * rng.uniform(0.1, 1.0);
    rec.run([&] {
      const ScoreFn dl = (target / norm_p(p, raw)) * raw;
      double prev = std::numeric_limits<double>::infinity();
      bool ok = true;
      for (double s : {1.0, 0.1, 0.01}) {
        const KlBudget b = kl_budget(p, s * dl);
        if (b.half_var == 0.0) return false;
        const double ratio = b.kl_value / b.half_var;
        const double dev = std::abs(ratio - 1.0);
        if (s == 1.0) {
          rec.min("min_ratio", ratio);
          rec.max("max_ratio", ratio);
          ok = ok && ratio >= 0.9 && ratio <= 1.1;
        } else if (prev > floor && dev > floor) {
          const double order = std::log10(prev / dev);
          rec.min("min_fitted_order", order);
          ok = ok && order >= 0.9;
        } else {
          ok = ok && dev <= std::max(prev, floor);
        }
        prev = dev;
      }
      return ok;
    });
  }
  return rec.finish();
}

inline CheckResult check_event_first_order(const Options& o, std::size_t count = 100) {
  Recorder rec("persona", "event_first_order_order", 1.9);
  Rng rng = check_rng(o, "event_first_order");
  // Starting at 1e-1 lets the cubic term mask a small quadratic one.
  const std::vector<double> ts{1e-2, 1e-3, 1e-4};
  for (std::size_t k = 0; k < count; ++k) {
    const OutcomeSpace space(rng.index(2, 10));
    const Dist p = random_dist(rng, space);
    const Event a = random_proper_event(rng, space.size());
    const ScoreFn dl(space, normal_vector(rng, space.size()));
    rec.run([&] {
      std::vector<double> errs;
      for (double t : ts) {
        const EventChange c = event_first_order(p, a, t * dl);
        errs.push_back(std::abs(c.exact - c.linear));
      }
      if (errs.back() == 0.0) return true;
      const double slope = loglog_slope(ts, errs);
      rec.min("min_slope", slope);
      return slope >= 1.9;
    });
  }
  return rec.finish();
}

// ---------------------------------------------------------------------------
// Suites and reports

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"pools", "welfare", "constructions", "factorize", "stability", "persona", "all"};
  return names;
}

inline std::vector<CheckResult> run_suite(const std::string& suite, const Options& o) {
  using Fn = CheckResult (*)(const Options&);
  struct Entry {
    const char* suite;
    Fn fn;
  };
  static const Entry table[] = {
      {"pools", [](const Options& x) { return check_pool_oracle(x); }},
      {"pools", [](const Options& x) { return check_tilt_roundtrip(x); }},
      {"pools", [](const Options& x) { return check_duplicate_invariance(x); }},
      {"welfare", [](const Options& x) { return check_gap_identity(x); }},
      {"welfare", [](const Options& x) { return check_binary_census(x); }},
      {"welfare", [](const Options& x) { return check_linear_impossibility(x); }},
      {"welfare", [](const Options& x) { return check_covariance_condition(x); }},
      {"welfare", [](const Options& x) { return check_cyclic_welfare(x); }},
      {"constructions", [](const Options& x) { return check_analytic_existence(x); }},
      {"constructions", [](const Options& x) { return check_peaked_threshold(x); }},
      {"constructions", [](const Options& x) { return check_peaked_log_normalizer(x); }},
      {"factorize", [](const Options& x) { return check_split_invariance(x); }},
      {"factorize", [](const Options& x) { return check_parent_benefit(x); }},
      {"factorize", [](const Options& x) { return check_factor_pairwise_distinct(x); }},
      {"factorize", [](const Options& x) { return check_factor_with_fixed(x); }},
      {"stability", [](const Options& x) { return check_transport_exactness(x); }},
      {"stability", [](const Options& x) { return check_openness(x); }},
      {"stability", [](const Options& x) { return check_local_impossibility(x); }},
      {"stability", [](const Options& x) { return check_uniform_no_gain(x); }},
      {"persona", [](const Options& x) { return check_linearization_order(x); }},
      {"persona", [](const Options& x) { return check_compensation(x); }},
      {"persona", [](const Options& x) { return check_suppression_optimality(x); }},
      {"persona", [](const Options& x) { return check_projection_gain(x); }},
      {"persona", [](const Options& x) { return check_kl_budget(x); }},
      {"persona", [](const Options& x) { return check_event_first_order(x); }},
  };
  require(std::find(suite_names().begin(), suite_names().end(), suite) != suite_names().end(), ErrorKind::UnknownSuite,
          "unknown suite \"" + suite + "\"");
  std::vector<CheckResult> out;
  for (const Entry& e : table) {
    if (suite != "all" && suite != e.suite) continue;
    const auto start = std::chrono::steady_clock::now();
    CheckResult r = e.fn(o);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const CheckResult& a, const CheckResult& b) {
    return std::tie(a.suite, a.name) < std::tie(b.suite, b.name);
  });
  return out;
}

inline Json to_json(const CheckResult& r, bool timings) {
  Json j = Json::object();
  j["suite"] = r.suite;
  j["name"] = r.name;
  j["passed"] = r.passed;
  j["instances"] = r.instances;
  j["failures"] = r.failures;
  j["tolerance"] = r.tolerance;
  Json metrics = Json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = v;
  j["metrics"] = metrics;
  if (!r.first_error.empty()) j["first_error"] = r.first_error;
  if (timings) j["seconds"] = r.seconds;
  return j;
}

inline Json report_json(const std::string& suite, const Options& o, const std::vector<CheckResult>& results) {
  Json j = Json::object();
  j["artifact"] = "compagency";
  j["version"] = std::string(kVersion);
  j["command"] = "verify";
  j["suite"] = suite;
  j["seed"] = o.seed;
  j["samples"] = o.samples;
  j["tolerance"] = o.tolerance;
  Json cfg = Json::object();
  cfg["suite"] = suite;
  cfg["seed"] = o.seed;
  cfg["samples"] = o.samples;
  cfg["tolerance"] = o.tolerance;
  j["config_hash"] = hex64(fnv1a64(dump_json(cfg, -1)));
  bool all = true;
  j["checks"] = Json::array();
  for (const CheckResult& r : results) {
    all = all && r.passed;
    j["checks"].push_back(to_json(r, o.timings));
  }
  j["passed"] = all;
  return j;
}

}  // namespace compagency::verify

#endif  // COMPAGENCY_VERIFY_HPP_
