#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "stutterbias/error.hpp"
#include "stutterbias/harness/report.hpp"
#include "test_util.hpp"

using namespace stutterbias;
using namespace stutterbias::harness;
using nlohmann::json;

namespace {

ScoreRow row(const std::string& model, const std::string& id, double y, double n) {
  return {"LS", model, id, {{"wer", y}}, {{"wer", n}}};
}

ReportInputs small_inputs() {
  ReportInputs in;
  in.corpora = {"LS"};
  in.providers = {"m2", "m1"};
  in.scores = {row("m1", "a", 0.5, 0.0), row("m1", "b", 0.25, 0.25), row("m1", "c", 0.75, 0.25),
               row("m2", "a", 1.0, 0.5), row("m2", "b", 0.5, 0.0),   row("m2", "c", 0.0, 0.25)};
  return in;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& s) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    out.push_back(f);
  }
  return out;
}

}  // namespace

TEST(Report, SummaryGolden) {
  const auto b = build_report(small_inputs());
  EXPECT_EQ(b.at("summary_LS.csv"),
            "model,wer_Y,wer_N\n"
            "m2,0.500000,0.250000\n"
            "m1,0.500000,0.166667\n"
            "mu,0.500000,0.208333\n"
            "sigma,0.000000,0.041667\n");
}

TEST(Report, MuRowIsMeanOfModelRows) {
  ReportInputs in = small_inputs();
  for (int i = 0; i < 7; ++i) {
    in.scores.push_back(row("m3", "id" + std::to_string(i), 0.1 * i, 0.05 * i));
  }
  const auto t = parse_csv(build_report(in).at("summary_LS.csv"));
  ASSERT_EQ(t.size(), 6u);
  for (std::size_t col = 1; col < t[0].size(); ++col) {
    std::vector<double> v;
    for (std::size_t r = 1; r <= 3; ++r) v.push_back(std::stod(t[r][col]));
    const auto [mean, sd] = oracle::mean_sd(v);
    EXPECT_NEAR(std::stod(t[4][col]), mean, 2e-6);
    EXPECT_NEAR(std::stod(t[5][col]), sd, 2e-6);
  }
}

TEST(Report, BiasTableMatchesOracle) {
  const auto b = build_report(small_inputs());
  const auto t = parse_csv(b.at("bias_LS.csv"));
  ASSERT_EQ(t[0], (std::vector<std::string>{"model", "metric", "method", "r", "p", "n", "significant", "note"}));
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[1][0], "m2");
  EXPECT_EQ(t[2][0], "m1");
  EXPECT_EQ(t[3][0], "All");
  const std::vector<double> y{0.5, 0.25, 0.75}, n{0.0, 0.25, 0.25};
  const double r = oracle::pearson(oracle::ranks(y), oracle::ranks(n));
  EXPECT_NEAR(std::stod(t[2][3]), r, 1e-6);
  EXPECT_NEAR(std::stod(t[2][4]), oracle::exact_permutation_p(y, n, r), 1e-6);
  EXPECT_EQ(t[3][5], "6");
}

TEST(Report, StatsLongFormat) {
  ReportInputs in = small_inputs();
  in.stats.methods = {stats::CorrelationMethod::Paired, stats::CorrelationMethod::PooledIndicator};
  const auto b = build_report(in);
  const auto t = parse_csv(b.at("stats.csv"));
  EXPECT_EQ(t[0], (std::vector<std::string>{"corpus", "model", "metric", "condition", "method", "value", "r", "p", "n"}));
  // (m2, m1, All) x (Y, N, delta paired, delta pooled)
  EXPECT_EQ(t.size(), 1u + 3 * 4);
  const auto j = json::parse(b.at("stats.json"));
  EXPECT_EQ(j.at("rows").size(), 12u);
  EXPECT_EQ(j.at("p_value"), "permutation");
  bool saw_pooled = false;
  for (const auto& r : t) {
    if (r.size() > 4 && r[4] == "pooled-indicator" && r[1] == "All") {
      saw_pooled = true;
      EXPECT_EQ(r[8], "12");
    }
  }
  EXPECT_TRUE(saw_pooled);
}

TEST(Report, EventTablesWhenTypesKnown) {
  ReportInputs in = small_inputs();
  in.event_types["LS"] = {{"a", DisfluencyType::Prolongation}, {"b", DisfluencyType::Prolongation},
                          {"c", DisfluencyType::InterwordBlock}};
  const auto b = build_report(in);
  const auto ev = parse_csv(b.at("events_LS.csv"));
  ASSERT_EQ(ev[0].size(), 1u + 16);
  EXPECT_EQ(ev[0][1], "Aud-WR_Y");
  const auto bias = parse_csv(b.at("events_bias_LS.csv"));
  EXPECT_EQ(bias[0][0], "model");
  EXPECT_EQ(bias.size(), 4u);
  EXPECT_FALSE(build_report(small_inputs()).contains("events_LS.csv"));
}

TEST(Report, UndefinedCorrelationIsNoted) {
  ReportInputs in;
  in.scores = {row("echo", "a", 0, 0), row("echo", "b", 0, 0), row("echo", "c", 0, 0)};
  const auto b = build_report(in);
  const auto t = parse_csv(b.at("bias_LS.csv"));
  EXPECT_EQ(t[1][3], "");
  EXPECT_FALSE(t[1].back().empty());
  EXPECT_EQ(json::parse(b.at("stats.json")).at("notes").size(), 2u);
}

TEST(Report, FailuresAndEmptyInput) {
  ReportInputs in;
  EXPECT_THROW(build_report(in), Error);
  in.failures.push_back({"LS", "vendor", Condition::Y, "a", "k", "HTTP 503", 4, "t"});
  in.unscored.push_back({"LS", "vendor", "b", "empty reference"});
  const auto j = json::parse(build_report(in).at("failures.json"));
  EXPECT_EQ(j.at("failures")[0].at("attempts"), 4);
  EXPECT_EQ(j.at("unscored")[0].at("reason"), "empty reference");
}

TEST(Violin, Quartiles) {
  const auto one = violin_summary({0.3});
  EXPECT_EQ(one.min, 0.3);
  EXPECT_EQ(one.q1, 0.3);
  EXPECT_EQ(one.median, 0.3);
  EXPECT_EQ(one.q3, 0.3);
  EXPECT_EQ(one.max, 0.3);
  const auto two = violin_summary({1.0, 0.0});
  EXPECT_DOUBLE_EQ(two.mean, 0.5);
  EXPECT_DOUBLE_EQ(two.median, 0.5);
  EXPECT_DOUBLE_EQ(two.q1, 0.25);
  EXPECT_DOUBLE_EQ(two.q3, 0.75);
  EXPECT_EQ(two.scores, (std::vector<double>{1.0, 0.0}));
  EXPECT_THROW(violin_summary({}), Error);
}

TEST(Report, ViolinSeriesAndWrite) {
  testutil::TempDir dir;
  const auto b = build_report(small_inputs());
  const auto v = json::parse(b.at("violin.json")).at("series");
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v[0].at("ids").size(), 3u);
  write_report(b, dir.path());
  for (const auto& [name, content] : b) EXPECT_EQ(read_file(dir / name), content);
}
