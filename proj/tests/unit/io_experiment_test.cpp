#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "compagency/experiment.hpp"
#include "compagency/json_io.hpp"
#include "test_util.hpp"

namespace {

using namespace compagency;

TEST(DumpJson, SeventeenDigitsRoundTrip) {
  const double x = 0.1 + 0.2;
  const std::string s = dump_json(Json{{"x", x}}, -1);
  EXPECT_EQ(s, "{\"x\":0.30000000000000004}");
  EXPECT_EQ(Json::parse(s)["x"].get<double>(), x);
}

TEST(DumpJson, NonFiniteBecomesNullAndOrderIsKept) {
  Json j = Json::object();
  j["b"] = std::numeric_limits<double>::quiet_NaN();
  j["a"] = 1;
  EXPECT_EQ(dump_json(j, -1), "{\"b\":null,\"a\":1}");
}

TEST(DistJson, RoundTripWithLabels) {
  const Dist p = Dist::from_masses(OutcomeSpace({"x", "y", "z"}), std::vector<double>{0.2, 0.3, 0.5});
  const Dist q = dist_from_json(Json::parse(dump_json(to_json(p))));
  EXPECT_EQ(tv(p, q), 0.0);
  ASSERT_TRUE(q.space().has_labels());
  EXPECT_EQ(q.space().labels()[2], "z");
}

TEST(DecompositionJson, RoundTrip) {
  const std::vector<Dist> kids{make_dist({0.2, 0.8}), make_dist({0.6, 0.4})};
  const Decomposition dec = Decomposition::from_children(kids, Weights({0.3, 0.7}));
  const Decomposition back = decomposition_from_json(Json::parse(dump_json(to_json(dec))));
  EXPECT_EQ(tv(back.parent(), dec.parent()), 0.0);
  EXPECT_EQ(back.weights()[1], 0.7);
}

TEST(ParseErrors, MissingAndMistypedFields) {
  EXPECT_ERROR_KIND(dist_from_json(Json::parse(R"({"q": [1]})")), ErrorKind::ParseError);
  EXPECT_ERROR_KIND(dist_from_json(Json::parse(R"({"p": [1, "a"]})")), ErrorKind::ParseError);
  EXPECT_ERROR_KIND(dist_from_json(Json::parse(R"({"p": [0, 1]})")), ErrorKind::NonPositiveEntry);
  EXPECT_ERROR_KIND(pool_kind_from_string("arith"), ErrorKind::ParseError);
  EXPECT_ERROR_KIND(decomposition_from_json(Json::parse(R"({"parent": {"p": [0.5, 0.5]}})")), ErrorKind::ParseError);
}

TEST(Fnv1a, KnownVector) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
}

TEST(ExperimentConfig, Errors) {
  EXPECT_ERROR_KIND(experiment::parse_config("{"), ErrorKind::ConfigParse);
  EXPECT_ERROR_KIND(experiment::parse_config(R"({"schema": 2, "family": {"kind": "cyclic_welfare"}})"),
                    ErrorKind::ConfigParse);
  EXPECT_ERROR_KIND(experiment::parse_config(R"({"schema": 1, "family": {"kind": "nope"}})"), ErrorKind::ConfigParse);
  EXPECT_ERROR_KIND(
      experiment::parse_config(R"({"schema": 1, "family": {"kind": "cyclic_welfare"}, "analyses": ["plots"]})"),
      ErrorKind::ConfigParse);
  EXPECT_ERROR_KIND(experiment::parse_config(R"({"schema": 1, "family": {"kind": "cyclic_welfare", "n": "x"}})"),
                    ErrorKind::ConfigParse);
}

TEST(Experiment, AnalyticGridHasRowPerPointAndThresholds) {
  const auto c = experiment::parse_config(
      R"({"schema": 1, "seed": 3, "family": {"kind": "analytic_unanimity", "n": [2, 3], "epsilon": [0.1, 0.01]},
          "analyses": ["gaps", "openness"], "samples": 4})");
  const auto r = experiment::run(c);
  EXPECT_EQ(r.table.rows.size(), 4u);
  EXPECT_EQ(r.manifest["seed"].get<std::uint64_t>(), 3u);
  EXPECT_TRUE(r.manifest["thresholds"].contains("n2"));
  EXPECT_EQ(r.manifest["config_hash"].get<std::string>().size(), 16u);
}

TEST(Experiment, PeakedSweepTrendsDown) {
  const auto c = experiment::parse_config(
      R"({"schema": 1, "family": {"kind": "peaked_incompatible", "n": [3], "epsilon": [0.1, 0.01, 0.0001],
          "instances": 10}, "analyses": ["weighted_sum"]})");
  const auto r = experiment::run(c);
  ASSERT_EQ(r.table.rows.size(), 3u);
  const double a = std::stod(r.table.rows[0][4]), b = std::stod(r.table.rows[2][4]);
  EXPECT_LT(b, a);
}

TEST(Experiment, SuppressionAchievedIsLinearInBudget) {
  const auto c = experiment::parse_config(
      R"({"schema": 1, "family": {"kind": "random_decomposition", "m": [6], "n": [3], "instances": 2,
          "budgets": [0.001, 0.002, 0.004]}, "analyses": ["suppression"]})");
  const auto r = experiment::run(c);
  ASSERT_EQ(r.table.rows.size(), 6u);
  for (std::size_t i = 0; i < 6; i += 3) {
    const double base = std::stod(r.table.rows[i][4]) / 0.001;
    EXPECT_NEAR(std::stod(r.table.rows[i + 1][4]) / 0.002, base, 1e-12 * base);
    EXPECT_NEAR(std::stod(r.table.rows[i + 2][4]) / 0.004, base, 1e-12 * base);
  }
}

TEST(Experiment, DeterministicAndWritesFiles) {
  const std::string cfg =
      R"({"schema": 1, "seed": 9, "family": {"kind": "random_decomposition", "m": [5], "n": [3], "instances": 2},
          "analyses": ["suppression", "compensation"]})";
  const auto a = experiment::run(experiment::parse_config(cfg));
  const auto b = experiment::run(experiment::parse_config(cfg));
  EXPECT_EQ(a.table.csv(), b.table.csv());
  EXPECT_EQ(dump_json(a.manifest), dump_json(b.manifest));

  const auto dir = std::filesystem::temp_directory_path() / "compagency_io_experiment_test";
  std::filesystem::remove_all(dir);
  experiment::write(a, dir);
  std::ifstream csv(dir / "results.csv");
  std::stringstream ss;
  ss << csv.rdbuf();
  EXPECT_EQ(ss.str(), a.table.csv());
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest.json"));
  std::filesystem::remove_all(dir);
}

TEST(Experiment, CyclicFamily) {
  const auto r = experiment::run(experiment::parse_config(
      R"({"schema": 1, "family": {"kind": "cyclic_welfare", "n": [3], "epsilon": [0.1], "C": 10}})"));
  ASSERT_EQ(r.table.rows.size(), 1u);
  EXPECT_EQ(r.table.rows[0][3], "true");
  EXPECT_NEAR(std::stod(r.table.rows[0][4]), 10.0 * (1.0 / 3.0 - 0.1), 1e-12);
}

}  // namespace
