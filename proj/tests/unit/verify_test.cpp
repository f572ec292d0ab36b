#include "compagency/verify.hpp"
#include "test_util.hpp"

namespace {

using namespace compagency;

TEST(Verify, UnknownSuite) {
  EXPECT_ERROR_KIND(verify::run_suite("nope", verify::Options{}), ErrorKind::UnknownSuite);
}

TEST(Verify, WelfareSuiteIncludesBinaryCensus) {
  const auto results = verify::run_suite("welfare", verify::Options{});
  bool found = false;
  for (const auto& r : results) {
    EXPECT_TRUE(r.passed) << r.name << ": " << r.first_error;
    found = found || r.name == "binary_census";
  }
  EXPECT_TRUE(found);
}

TEST(Verify, ReportsAreSortedAndSeedSensitive) {
  verify::Options o;
  const auto a = verify::run_suite("pools", o);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LT(a[i - 1].name, a[i].name);
  const std::string ja = dump_json(verify::report_json("pools", o, a));
  o.seed = 43;
  const std::string jb = dump_json(verify::report_json("pools", o, verify::run_suite("pools", o)));
  EXPECT_NE(ja, jb);
}

TEST(Verify, TimingsOnlyWhenAsked) {
  verify::Options o;
  const auto r = verify::run_suite("constructions", o);
  EXPECT_EQ(dump_json(verify::report_json("constructions", o, r)).find("seconds"), std::string::npos);
  o.timings = true;
  EXPECT_NE(dump_json(verify::report_json("constructions", o, r)).find("seconds"), std::string::npos);
}

TEST(Verify, LoglogSlopeOfPowerLaw) {
  const std::vector<double> x{1, 2, 4, 8}, y{3, 12, 48, 192};
  EXPECT_NEAR(verify::loglog_slope(x, y), 2.0, 1e-12);
}

}  // namespace
