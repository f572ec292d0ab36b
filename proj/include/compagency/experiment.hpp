#ifndef COMPAGENCY_EXPERIMENT_HPP_
#define COMPAGENCY_EXPERIMENT_HPP_

// Config-driven parameter sweeps. A config names one instance family, a
// parameter grid and a list of analyses; the run produces one CSV row per
// grid point plus a manifest recording seeds and discovered thresholds.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "compagency/constructions.hpp"
#include "compagency/json_io.hpp"
#include "compagency/persona.hpp"
#include "compagency/random.hpp"
#include "compagency/stability.hpp"
#include "compagency/verify.hpp"
#include "compagency/welfare.hpp"

namespace compagency::experiment {

struct Config {
  std::uint64_t seed = 42;
  std::string family;
  std::vector<std::size_t> n;
  std::vector<std::size_t> m;  // random_decomposition only
  std::vector<double> epsilon;
  std::vector<double> budgets;
  std::vector<std::string> analyses;
  std::size_t samples = 64;
  std::size_t instances = 10;
  double C = 10.0;
  Json raw;
};

namespace detail {

template <typename T>
std::vector<T> list_or(const Json& obj, const char* key, std::vector<T> fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  try {
    if (v.is_array()) return v.get<std::vector<T>>();
    return {v.get<T>()};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ConfigParse, std::string("field \"") + key + "\": " + e.what());
  }
}

template <typename T>
T scalar_or(const Json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ConfigParse, std::string("field \"") + key + "\": " + e.what());
  }
}

}  // namespace detail

inline const std::set<std::string>& known_families() {
  static const std::set<std::string> f{"analytic_unanimity", "peaked_incompatible", "cyclic_welfare",
                                       "random_decomposition"};
  return f;
}

inline const std::set<std::string>& known_analyses() {
  static const std::set<std::string> a{"gaps", "openness", "weighted_sum", "suppression", "compensation"};
  return a;
}

inline Config parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::ConfigParse, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::ConfigParse, "config must be a JSON object");
  if (detail::scalar_or<int>(j, "schema", 0) != 1) fail(ErrorKind::ConfigParse, "config needs \"schema\": 1");
  if (!j.contains("family") || !j.at("family").is_object()) fail(ErrorKind::ConfigParse, "config needs a \"family\" object");
  const Json& fam = j.at("family");

  Config c;
  c.raw = j;
  c.seed = detail::scalar_or<std::uint64_t>(j, "seed", 42);
  c.samples = detail::scalar_or<std::size_t>(j, "samples", 64);
  c.family = detail::scalar_or<std::string>(fam, "kind", "");
  if (!known_families().contains(c.family)) fail(ErrorKind::ConfigParse, "unknown family kind \"" + c.family + "\"");
  c.n = detail::list_or<std::size_t>(fam, "n", {3});
  c.m = detail::list_or<std::size_t>(fam, "m", {6});
  c.epsilon = detail::list_or<double>(fam, "epsilon", {});
  c.budgets = detail::list_or<double>(fam, "budgets", {1e-3, 1e-2, 1e-1});
  c.instances = detail::scalar_or<std::size_t>(fam, "instances", 10);
  c.C = detail::scalar_or<double>(fam, "C", 10.0);
  c.analyses = detail::list_or<std::string>(j, "analyses", {"gaps"});
  for (const auto& a : c.analyses)
    if (!known_analyses().contains(a)) fail(ErrorKind::ConfigParse, "unknown analysis \"" + a + "\"");
  if (c.n.empty()) fail(ErrorKind::ConfigParse, "\"n\" must not be empty");
  return c;
}

/// Rows of a CSV table with a fixed header; cells are preformatted.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += '\n';
    }
    return out;
  }
};

inline std::string cell(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string cell(std::size_t v) { return std::to_string(v); }
inline std::string cell(bool v) { return v ? "true" : "false"; }

struct Result {
  Table table;
  Json manifest;
};

namespace detail {

inline bool wants(const Config& c, const char* a) {
  return std::find(c.analyses.begin(), c.analyses.end(), a) != c.analyses.end();
}

inline std::vector<double> epsilons_or_grid(const Config& c, double upper) {
  if (!c.epsilon.empty()) return c.epsilon;
  std::vector<double> out;
  for (int k = 1; k <= 20; ++k)
    if (epsilon_grid_point(k) < upper) out.push_back(epsilon_grid_point(k));
  return out;
}

inline Result run_analytic(const Config& c) {
  Result res;
  res.table.header = {"n", "epsilon", "min_gap", "strictly_unanimous", "weighted_gap_sum", "openness_radius"};
  Json thresholds = Json::object();
  for (std::size_t n : c.n) {
    thresholds["n" + std::to_string(n)] = search_epsilon_for_unanimity(n).epsilon;
    for (double eps : epsilons_or_grid(c, 0.25)) {
      const Decomposition d = analytic_unanimity_instance(n, eps);
      const WelfareReport r = unanimity_report(d);
      double radius = std::numeric_limits<double>::quiet_NaN();
      if (wants(c, "openness") && r.strictly_unanimous) {
        try {
          radius = certify_openness(d, c.samples, c.seed).radius;
        } catch (const Error& e) {
          // A gap this close to the tolerance leaves no clean grid radius.
          if (e.kind() != ErrorKind::NotFound) throw;
          radius = 0.0;
        }
      }
      res.table.rows.push_back(
          {cell(n), cell(eps), cell(r.min_gap()), cell(r.strictly_unanimous), cell(weighted_gap_sum(d)), cell(radius)});
    }
  }
  res.manifest["thresholds"] = thresholds;
  return res;
}

inline Result run_peaked(const Config& c) {
  Result res;
  res.table.header = {"n", "epsilon", "beta_samples", "max_weighted_sum", "mean_weighted_sum", "log_normalizer_uniform"};
  Json thresholds = Json::object();
  for (std::size_t n : c.n) {
    Rng rng = Rng::derive(c.seed, {fnv1a64("peaked_betas"), n});
    std::vector<Weights> ws;
    for (std::size_t k = 0; k < c.instances; ++k) ws.push_back(floored_weights(rng, n, 0.05));
    thresholds["n" + std::to_string(n)] = discover_peaked_threshold(n, ws).epsilon;
    for (double eps : epsilons_or_grid(c, 0.5)) {
      const auto agents = peaked_incompatible_family(n, eps);
      double worst = -std::numeric_limits<double>::infinity(), mean = 0.0;
      for (const Weights& w : ws) {
        const double s = weighted_gap_sum(Decomposition::from_children(agents, w));
        worst = std::max(worst, s);
        mean += s / static_cast<double>(ws.size());
      }
      res.table.rows.push_back({cell(n), cell(eps), cell(ws.size()), cell(worst), cell(mean),
                                cell(peaked_log_normalizer(n, eps, Weights::uniform(n)))});
    }
  }
  res.manifest["thresholds"] = thresholds;
  return res;
}

inline Result run_cyclic(const Config& c) {
  Result res;
  res.table.header = {"n", "epsilon", "C", "pool_is_uniform", "min_welfare_margin"};
  for (std::size_t n : c.n) {
    std::vector<double> eps = c.epsilon;
    if (eps.empty())
      for (double f : {0.1, 0.5, 0.9}) eps.push_back(f / static_cast<double>(n));
    for (double e : eps) {
      const CyclicWelfareInstance inst = cyclic_welfare_instance(n, e, c.C);
      const Dist pool = inst.pool();
      double margin = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i)
        margin = std::min(margin, covariance_condition(inst.agents[i], inst.welfare[i], pool).welfare_difference);
      res.table.rows.push_back({cell(n), cell(e), cell(c.C), cell(is_uniform(pool)), cell(margin)});
    }
  }
  return res;
}

inline Result run_random(const Config& c) {
  Result res;
  res.table.header = {"m", "n", "instance", "budget", "suppression_achieved", "projection_norm", "span_dim",
                      "compensation_slack"};
  for (std::size_t m : c.m) {
    for (std::size_t n : c.n) {
      for (std::size_t k = 0; k < c.instances; ++k) {
        Rng rng = Rng::derive(c.seed, {fnv1a64("random_decomposition"), m, n, k});
        const Decomposition d = verify::random_decomposition(rng, m, n, 0.5 / static_cast<double>(n));
        const Event a = verify::random_proper_event(rng, m);
        const auto profiles = centered_profiles(d);
        double slack = std::numeric_limits<double>::quiet_NaN();
        if (wants(c, "compensation") && n >= 2) {
          const double min_beta = *std::min_element(d.weights().beta().begin(), d.weights().beta().end());
          const auto db = verify::gen::random_dbeta(rng, d.weights(), 0, 0.25 * min_beta);
          const double eps = norm_p(d.parent(), actual_delta_l(d, db)) * 1.25;
          slack = compensation_bound(d, 0, db[0], eps, db).slack;
        }
        for (double b : c.budgets) {
          double achieved = std::numeric_limits<double>::quiet_NaN(), pn = achieved;
          std::size_t dim = 0;
          if (wants(c, "suppression")) {
            const SuppressionPlan plan = optimal_suppression(profiles, a, b);
            achieved = plan.achieved;
            pn = plan.projection_norm;
            dim = plan.span_dim;
          }
          res.table.rows.push_back({cell(m), cell(n), cell(k), cell(b), cell(achieved), cell(pn), cell(dim), cell(slack)});
        }
      }
    }
  }
  return res;
}

}  // namespace detail

inline Result run(const Config& c) {
  Result res;
  if (c.family == "analytic_unanimity")
    res = detail::run_analytic(c);
  else if (c.family == "peaked_incompatible")
    res = detail::run_peaked(c);
  else if (c.family == "cyclic_welfare")
    res = detail::run_cyclic(c);
  else
    res = detail::run_random(c);

  Json manifest = Json::object();
  manifest["artifact"] = "compagency";
  manifest["version"] = std::string(kVersion);
  manifest["command"] = "experiment";
  manifest["config_hash"] = hex64(fnv1a64(dump_json(c.raw, -1)));
  manifest["seed"] = c.seed;
  manifest["family"] = c.family;
  manifest["analyses"] = c.analyses;
  manifest["rows"] = res.table.rows.size();
  manifest["columns"] = res.table.header;
  if (res.manifest.contains("thresholds")) manifest["thresholds"] = res.manifest["thresholds"];
  manifest["config"] = c.raw;
  res.manifest = std::move(manifest);
  return res;
}

/// Writes results.csv and manifest.json into `dir`, creating it if needed.
inline void write(const Result& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
  const auto put = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    require(static_cast<bool>(f), ErrorKind::IoError, "cannot open " + p.string());
    f << text;
    require(static_cast<bool>(f), ErrorKind::IoError, "failed writing " + p.string());
  };
  put(dir / "results.csv", r.table.csv());
  put(dir / "manifest.json", dump_json(r.manifest) + "\n");
}

}  // namespace compagency::experiment

#endif  // COMPAGENCY_EXPERIMENT_HPP_
