#ifndef COMPAGENCY_JSON_IO_HPP_
#define COMPAGENCY_JSON_IO_HPP_

// JSON conversions for the library types and reports. Parsing re-validates
// every invariant through the normal constructors. Output uses ordered
// objects and prints doubles with 17 significant digits so that reports are
// byte-stable and round-trip exactly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "compagency/constructions.hpp"
#include "compagency/core.hpp"
#include "compagency/factorize.hpp"
#include "compagency/persona.hpp"
#include "compagency/pooling.hpp"
#include "compagency/stability.hpp"
#include "compagency/welfare.hpp"

namespace compagency {

inline constexpr std::string_view kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline void append_escaped(std::string& out, const std::string& s) {
  out += Json(s).dump();
}

inline void write_json(std::string& out, const Json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        append_escaped(out, it.key());
        out += indent < 0 ? ":" : ": ";
        write_json(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Scalar arrays stay on one line; arrays of objects get one element per line.
      const bool nested = std::any_of(j.begin(), j.end(), [](const Json& v) { return v.is_object(); });
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += nested || indent < 0 ? "," : ", ";
        first = false;
        if (nested) newline(depth + 1);
        write_json(out, v, indent, depth + 1);
      }
      if (nested) newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Serializes with 17 significant digits per double. Numeric arrays stay on
/// one line so vectors remain readable.
inline std::string dump_json(const Json& j, int indent = 2) {
  std::string out;
  detail::write_json(out, j, indent, 0);
  return out;
}

/// 64-bit FNV-1a, used to tag reports with the config that produced them.
inline std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// Core types

inline Json to_json(const Dist& d) {
  Json j = Json::object();
  if (d.space().has_labels()) j["labels"] = std::vector<std::string>(d.space().labels().begin(), d.space().labels().end());
  j["p"] = std::vector<double>(d.p().begin(), d.p().end());
  return j;
}

inline Json to_json(const ScoreFn& f) { return std::vector<double>(f.values().begin(), f.values().end()); }

inline Json to_json(const Weights& w) { return std::vector<double>(w.beta().begin(), w.beta().end()); }

inline Json to_json(const Decomposition& d) {
  Json j = Json::object();
  j["parent"] = to_json(d.parent());
  j["children"] = Json::array();
  for (const Dist& c : d.children()) j["children"].push_back(to_json(c));
  j["beta"] = to_json(d.weights());
  j["kind"] = std::string(to_string(d.kind()));
  return j;
}

namespace detail {

template <typename T>
T get_field(const Json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::ParseError, std::string(what) + " is missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string(what) + " field \"" + key + "\": " + e.what());
  }
}

inline std::vector<double> number_array(const Json& j, const char* what) {
  if (!j.is_array()) fail(ErrorKind::ParseError, std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) fail(ErrorKind::ParseError, std::string(what) + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace detail

inline Dist dist_from_json(const Json& j, std::optional<OutcomeSpace> space = std::nullopt) {
  if (!j.is_object() || !j.contains("p")) fail(ErrorKind::ParseError, "distribution must be an object with \"p\"");
  const std::vector<double> p = detail::number_array(j.at("p"), "\"p\"");
  if (j.contains("labels")) {
    const auto labels = detail::get_field<std::vector<std::string>>(j, "labels", "distribution");
    require(labels.size() == p.size(), ErrorKind::InvalidLabels, "labels and p differ in length");
    return Dist::from_masses(OutcomeSpace(labels), p);
  }
  if (space) return Dist::from_masses(*space, p);
  require(p.size() >= 2, ErrorKind::DimensionMismatch, "outcome space needs at least 2 outcomes");
  return Dist::from_masses(OutcomeSpace(p.size()), p);
}

inline Weights weights_from_json(const Json& j) { return Weights(detail::number_array(j, "\"beta\"")); }

inline PoolKind pool_kind_from_string(const std::string& s) {
  if (s == "log") return PoolKind::log;
  if (s == "linear") return PoolKind::linear;
  fail(ErrorKind::ParseError, "pool kind must be \"log\" or \"linear\", got \"" + s + "\"");
}

inline Decomposition decomposition_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorKind::ParseError, "decomposition must be an object");
  const Dist parent = dist_from_json(detail::get_field<Json>(j, "parent", "decomposition"));
  const Json children = detail::get_field<Json>(j, "children", "decomposition");
  if (!children.is_array()) fail(ErrorKind::ParseError, "\"children\" must be an array");
  std::vector<Dist> kids;
  for (const auto& c : children) kids.push_back(dist_from_json(c, parent.space()));
  const Weights w = weights_from_json(detail::get_field<Json>(j, "beta", "decomposition"));
  const PoolKind kind = j.contains("kind") ? pool_kind_from_string(detail::get_field<std::string>(j, "kind", "decomposition"))
                                          : PoolKind::log;
  return Decomposition(parent, std::move(kids), w, kind);
}

// ---------------------------------------------------------------------------
// Reports

inline Json to_json(const GapTerms& t) {
  Json j = Json::object();
  j["gap"] = t.gap;
  j["entropy_agent"] = t.entropy_agent;
  j["entropy_pool"] = t.entropy_pool;
  j["kl_pool_agent"] = t.kl_pool_agent;
  return j;
}

inline Json to_json(const WelfareReport& r) {
  Json j = Json::object();
  j["gaps"] = r.gaps;
  j["terms"] = Json::array();
  for (const GapTerms& t : r.terms) j["terms"].push_back(to_json(t));
  j["unanimous"] = r.unanimous;
  j["strictly_unanimous"] = r.strictly_unanimous;
  j["tolerance"] = r.tolerance;
  return j;
}

inline Json to_json(const FactorProvenance& p) {
  Json j = Json::object();
  j["seed"] = p.seed;
  j["attempts"] = p.attempts;
  j["kind"] = p.kind;
  j["distinct_threshold"] = p.distinct_threshold;
  j["min_pairwise_tv"] = p.min_pairwise_tv;
  j["min_parent_tv"] = p.min_parent_tv;
  j["absorbing_index"] = p.absorbing_index;
  return j;
}

inline Json to_json(const Factorization& f) {
  Json j = to_json(f.decomposition);
  j["provenance"] = to_json(f.provenance);
  return j;
}

inline Json to_json(const OpennessCertificate& c) {
  Json j = Json::object();
  j["radius"] = c.radius;
  j["samples"] = c.samples;
  j["min_gap_at_boundary"] = c.min_gap_at_boundary;
  j["seed"] = c.seed;
  j["radii_tested"] = c.radii_tested;
  return j;
}

inline Json to_json(const SuppressionPlan& s) {
  Json j = Json::object();
  j["delta_l"] = to_json(s.delta_l);
  j["budget"] = s.budget;
  j["achieved"] = s.achieved;
  j["projection_norm"] = s.projection_norm;
  j["span_dim"] = s.span_dim;
  j["zero_projection"] = s.zero_projection;
  return j;
}

inline Json to_json(const CompensationReport& r) {
  Json j = Json::object();
  j["inner_with_h"] = r.inner_with_h;
  j["anti_aligned"] = r.anti_aligned;
  j["norm_h"] = r.norm_h;
  j["delta_l_norm"] = r.delta_l_norm;
  j["residual_norm"] = r.residual_norm;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["downgrade"] = r.downgrade;
  j["slack"] = r.slack;
  j["waluigi"] = r.waluigi ? Json(*r.waluigi) : Json(nullptr);
  j["explicit_bound"] = r.explicit_bound;
  j["bound_applicable"] = r.bound_applicable;
  j["waluigi_increase"] = r.waluigi_increase;
  return j;
}

inline Json to_json(const ProjectionGain& g) {
  Json j = Json::object();
  j["gain"] = g.gain;
  j["u_norm"] = g.u_norm;
  j["correlation"] = g.correlation;
  j["inner_gu"] = g.inner_gu;
  j["closed_form"] = g.closed_form;
  j["m0"] = g.m0;
  j["m1"] = g.m1;
  j["sq_norm_0"] = g.sq_norm_0;
  j["sq_norm_1"] = g.sq_norm_1;
  j["increment"] = g.increment;
  j["pythagoras_residual"] = g.pythagoras_residual;
  j["w_in_span"] = g.w_in_span;
  return j;
}

}  // namespace compagency

#endif  // COMPAGENCY_JSON_IO_HPP_
