// compagency: verification suites, experiment sweeps and one-off
// computations over JSON inputs.
//
// Exit codes: 0 success, 1 failed check or domain error, 2 usage or parse error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "compagency/compagency.hpp"
#include "compagency/experiment.hpp"
#include "compagency/json_io.hpp"
#include "compagency/verify.hpp"

namespace {

using namespace compagency;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::ConfigParse:
    case ErrorKind::UnknownSuite:
      return kUsage;
    default:
      return kFailure;
  }
}

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Json parse_input(const std::string& path) {
  try {
    return Json::parse(read_input(path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::ParseError, std::string("malformed JSON: ") + e.what());
  }
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::IoError, "cannot open " + out);
  f << text;
  require(static_cast<bool>(f), ErrorKind::IoError, "failed writing " + out);
}

std::vector<Dist> agents_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::ParseError, "\"agents\" must be a non-empty array");
  std::vector<Dist> out;
  out.push_back(dist_from_json(j.front()));
  for (std::size_t i = 1; i < j.size(); ++i) out.push_back(dist_from_json(j[i], out.front().space()));
  return out;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::ParseError, std::string("input is missing \"") + key + "\"");
  return j.at(key);
}

// {"agents": [dist...], "beta": [...], "kind": "log"|"linear"}
Json cmd_pool(const Json& in) {
  const std::vector<Dist> agents = agents_from_json(field(in, "agents"));
  const Weights w = weights_from_json(field(in, "beta"));
  const PoolKind kind = in.contains("kind") ? pool_kind_from_string(in.at("kind").get<std::string>()) : PoolKind::log;
  Json j = Json::object();
  j["kind"] = std::string(to_string(kind));
  j["pool"] = to_json(pool(kind, agents, w));
  return j;
}

// {"agent": dist, "pool": dist} or a decomposition object.
Json cmd_gap(const Json& in) {
  if (in.is_object() && in.contains("children")) {
    const Decomposition d = decomposition_from_json(in);
    Json j = to_json(unanimity_report(d));
    j["weighted_gap_sum"] = weighted_gap_sum(d);
    return j;
  }
  const Dist agent = dist_from_json(field(in, "agent"));
  const Dist p = dist_from_json(field(in, "pool"), agent.space());
  return to_json(welfare_gap_terms(agent, p));
}

// {"parent": dist, "beta": [...], "fixed": [dist...]?, "seed": int?}
Json cmd_factor(const Json& in, std::uint64_t default_seed) {
  const Dist parent = dist_from_json(field(in, "parent"));
  const Weights w = weights_from_json(field(in, "beta"));
  std::uint64_t seed = default_seed;
  if (in.contains("seed")) {
    if (!in.at("seed").is_number_unsigned()) fail(ErrorKind::ParseError, "\"seed\" must be a nonnegative integer");
    seed = in.at("seed").get<std::uint64_t>();
  }
  if (in.contains("fixed")) {
    std::vector<Dist> fixed;
    for (const auto& f : in.at("fixed")) fixed.push_back(dist_from_json(f, parent.space()));
    return to_json(factor_with_fixed(parent, fixed, w, seed));
  }
  return to_json(factor_pairwise_distinct(parent, w, seed));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional agency calculus: verification suites, sweeps and single computations."};
  app.require_subcommand(1);

  verify::Options opts;
  std::string out;
  std::string in;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", opts.seed, "Root seed for all randomness")->capture_default_str();
    sub->add_option("--out", out, "Output path (stdout when omitted)");
  };

  std::string suite;
  CLI::App* v = app.add_subcommand("verify", "Run a property-check suite and write a JSON report");
  v->add_option("suite", suite, "pools | welfare | constructions | factorize | stability | persona | all")->required();
  add_common(v);
  v->add_option("--tolerance", opts.tolerance, "Absolute tolerance for identity checks")->capture_default_str();
  v->add_option("--samples", opts.samples, "Directions per instance in the openness check")->capture_default_str();
  v->add_flag("--timings", opts.timings, "Include per-check wall time (breaks byte-identity)");

  std::string config;
  CLI::App* e = app.add_subcommand("experiment", "Run a JSON-configured sweep; --out names a directory");
  e->add_option("config", config, "Config path, or - for stdin");
  e->add_option("--in", config, "Config path, or - for stdin");
  add_common(e);

  CLI::App* p = app.add_subcommand("pool", "Pool agents read as JSON");
  CLI::App* g = app.add_subcommand("gap", "Welfare gap of an agent against a pool, or a full unanimity report");
  CLI::App* f = app.add_subcommand("factor", "Factorize a parent into distinct children");
  for (CLI::App* sub : {p, g, f}) {
    sub->add_option("input", in, "Input path, or - for stdin");
    sub->add_option("--in", in, "Input path, or - for stdin");
    add_common(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (v->parsed()) {
      const auto results = verify::run_suite(suite, opts);
      emit(dump_json(verify::report_json(suite, opts, results)) + "\n", out);
      bool ok = true;
      for (const auto& r : results) {
        if (!r.passed) std::cerr << "FAIL " << r.suite << "/" << r.name << ": " << r.first_error << "\n";
        ok = ok && r.passed;
      }
      return ok ? kOk : kFailure;
    }
    if (e->parsed()) {
      experiment::Config c = experiment::parse_config(read_input(config));
      if (e->count("--seed") > 0) {
        c.seed = opts.seed;
        c.raw["seed"] = opts.seed;
      }
      const experiment::Result r = experiment::run(c);
      if (out.empty())
        std::cout << r.table.csv();
      else
        experiment::write(r, out);
      return kOk;
    }
    const Json input = parse_input(in);
    Json result;
    if (p->parsed()) result = cmd_pool(input);
    if (g->parsed()) result = cmd_gap(input);
    if (f->parsed()) result = cmd_factor(input, opts.seed);
    emit(dump_json(result) + "\n", out);
    return kOk;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return exit_code_for(err.kind());
  } catch (const nlohmann::json::exception& err) {
    std::cerr << "error: ParseError: " << err.what() << "\n";
    return kUsage;
  }
}
