#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "omlab/error.hpp"
#include "omlab/harness.hpp"

using namespace omlab;

namespace {

nlohmann::json small_config() {
  return nlohmann::json::parse(R"j({
    "grids": [{"dim": 1, "N": 128, "L": 1, "boundary": "truncate"},
              {"dim": 1, "N": 256, "L": 1, "boundary": "truncate"}],
    "young": ["power(2)", "power(1)"],
    "growth": ["invwball", "rpow(0.5)"],
    "weights": ["one", "abspow(0.5)"],
    "functions": ["indicator(-0.25,0.25)", "randsign(0.5)"],
    "inequalities": ["modM", "czM", "normW", "normS"],
    "thresholds": {"blowup": 4, "drift": 2},
    "seed": 7
  })j");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Harness, ParseRejectsUnknownKeysAndIds) {
  auto cfg = small_config();
  cfg["colour"] = "blue";
  EXPECT_THROW(parse_suite(cfg), ParseError);
  cfg = small_config();
  cfg["inequalities"] = {"modM", "nosuch"};
  EXPECT_THROW(parse_suite(cfg), ParseError);
  cfg = small_config();
  cfg.erase("grids");
  EXPECT_THROW(parse_suite(cfg), ParseError);
  EXPECT_THROW(load_suite("/nonexistent/suite.json"), IoError);
}

TEST(Harness, ParsesSuite) {
  const auto s = parse_suite(small_config());
  ASSERT_EQ(s.grids.size(), 2u);
  EXPECT_EQ(s.grids[1].n, 256);
  EXPECT_EQ(s.seed, 7u);
  EXPECT_EQ(s.young.size(), 2u);
  EXPECT_DOUBLE_EQ(s.thresholds.blowup, 4.0);
}

TEST(Harness, ConfigHashIgnoresKeyOrder) {
  const auto a = nlohmann::json::parse(R"j({"seed": 1, "young": ["power(2)"]})j");
  const auto b = nlohmann::json::parse(R"j({"young": ["power(2)"], "seed": 1})j");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  EXPECT_NE(config_hash(a), config_hash(nlohmann::json::parse(R"j({"seed": 2, "young": ["power(2)"]})j")));
}

TEST(Harness, FunctionGrammar) {
  const Grid g(1, 64, 1.0);
  const auto ind = parse_function("indicator(-0.5,0.5)", g, 1);
  EXPECT_EQ(ind[0], 0.0);
  EXPECT_EQ(ind[32], 1.0);
  const auto cell = parse_function("cell", g, 1);
  double total = 0.0;
  for (std::size_t i = 0; i < cell.size(); ++i) total += cell[i];
  EXPECT_EQ(total, 1.0);
  const auto a = parse_function("randsign", g, 42), b = parse_function("randsign", g, 42);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_EQ(std::abs(a[i]), 1.0);
  }
  EXPECT_THROW(parse_function("gaussian(1)", g, 1), ParseError);
  EXPECT_THROW(parse_function("indicator(1)", g, 1), ParseError);
}

TEST(Harness, ClassifyTrend) {
  const Thresholds t;
  EXPECT_EQ(classify_trend({}, t), Verdict::Skipped);
  EXPECT_EQ(classify_trend({1.0, 1.5, 1.9}, t), Verdict::Stable);
  EXPECT_EQ(classify_trend({1.0, 2.0, 4.0}, t), Verdict::Blowup);
  EXPECT_EQ(classify_trend({1.0, 2.0, 3.0}, t), Verdict::Inconclusive);
  EXPECT_EQ(classify_trend({0.0, 0.0, 0.0}, t), Verdict::Stable);
  EXPECT_EQ(classify_trend({1.0, std::numeric_limits<double>::infinity()}, t), Verdict::Inconclusive);
}

TEST(Harness, VerdictNamesRoundTrip) {
  for (auto v : {Verdict::Stable, Verdict::Blowup, Verdict::Skipped, Verdict::Inconclusive})
    EXPECT_EQ(parse_verdict(to_string(v)), v);
  EXPECT_THROW(parse_verdict("maybe"), ParseError);
}

TEST(Harness, EveryCaseIsAccountedFor) {
  const auto s = parse_suite(small_config());
  const auto r = run_suite(s);
  std::map<std::string, std::size_t> count;
  for (std::size_t k = 0; k < r.cases.size(); ++k) {
    EXPECT_EQ(r.cases[k].index, k);
    EXPECT_EQ(r.cases[k].trend.size(), 2u);
    ++count[r.cases[k].inequality];
  }
  const std::size_t base = s.young.size() * s.weights.size() * s.functions.size();
  EXPECT_EQ(count["modM"], base);
  EXPECT_EQ(count["czM"], 2 * base);
  EXPECT_EQ(count["normW"], 2 * base * s.growth.size());
  EXPECT_EQ(count["normS"], 2 * base * s.growth.size());
  EXPECT_EQ(r.seed, 7u);
  EXPECT_EQ(r.config_hash, config_hash(small_config()));
}

TEST(Harness, GatesStrongPairingsWhenLowerIndexIsOne) {
  const auto r = run_suite(parse_suite(small_config()));
  for (const auto& c : r.cases) {
    if (c.young != "power(1)") continue;
    if (c.inequality == "normS") {
      EXPECT_EQ(c.verdict, Verdict::Skipped);
      EXPECT_FALSE(c.note.empty());
    }
    if (c.inequality == "normW" && c.variant == "M") EXPECT_NE(c.verdict, Verdict::Skipped);
  }
}

TEST(Harness, ZeroFunctionGivesZeroRatios) {
  auto cfg = small_config();
  cfg["young"] = {"power(2)"};
  cfg["functions"] = {"const(0)"};
  cfg["inequalities"] = {"modM", "wwmodM", "modT", "czM"};
  const auto r = run_suite(parse_suite(cfg));
  ASSERT_FALSE(r.cases.empty());
  for (const auto& c : r.cases) {
    if (c.verdict == Verdict::Skipped) continue;
    EXPECT_EQ(c.lhs, 0.0) << c.inequality;
    EXPECT_EQ(c.ratio, 0.0) << c.inequality;
    EXPECT_EQ(c.verdict, Verdict::Stable) << c.inequality;
  }
}

TEST(Harness, AnnotatesHypothesis) {
  auto cfg = small_config();
  cfg["young"] = {"power(2)"};
  cfg["grids"].push_back({{"dim", 1}, {"N", 512}, {"L", 1}, {"boundary", "truncate"}});
  cfg["weights"] = {"abspow(0.5)", "abspow(1.5)"};
  cfg["functions"] = {"indicator(-0.25,0.25)"};
  cfg["inequalities"] = {"modM"};
  const auto r = run_suite(parse_suite(cfg));
  ASSERT_EQ(r.cases.size(), 2u);
  EXPECT_TRUE(r.cases[0].hypothesis);
  EXPECT_FALSE(r.cases[1].hypothesis);
}

TEST(Harness, ReportsAreDeterministic) {
  const auto s = parse_suite(small_config());
  const auto a = to_json(run_suite(s)).dump(2);
  const auto b = to_json(run_suite(s)).dump(2);
  EXPECT_EQ(a, b);
}

TEST(Harness, JsonRoundTrip) {
  const auto r = run_suite(parse_suite(small_config()));
  const auto j = to_json(r);
  EXPECT_TRUE(j.contains("meta"));
  EXPECT_TRUE(j.contains("cases"));
  const auto back = report_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back, r);
}

TEST(Harness, EmitsFiles) {
  const auto r = run_suite(parse_suite(small_config()));
  const auto dir = std::filesystem::temp_directory_path() / "omlab_harness_test";
  std::filesystem::create_directories(dir);
  const auto csv = (dir / "report.csv").string();
  const auto json = (dir / "report.json").string();
  emit_report(r, csv, "csv");
  emit_report(r, json, "json");
  const auto text = slurp(csv);
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), r.cases.size() + 1);
  EXPECT_EQ(report_from_json(nlohmann::json::parse(slurp(json))), r);
  EXPECT_THROW(emit_report(r, (dir / "report.xml").string(), "xml"), Error);
  EXPECT_THROW(emit_report(r, "/nonexistent/dir/report.json", "json"), IoError);
}

TEST(Harness, EmptyReportIsValid) {
  Report empty;
  const auto j = to_json(empty);
  EXPECT_TRUE(j.at("cases").empty());
  EXPECT_EQ(report_from_json(nlohmann::json::parse(j.dump())), empty);
  const auto csv = to_csv(empty);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
}
