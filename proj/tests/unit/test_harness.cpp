#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "cli.hpp"
#include "safex/campaign.hpp"
#include "safex/config.hpp"
#include "safex/report.hpp"

namespace safex {
namespace {

namespace fs = std::filesystem;

ExperimentConfig small_exp(std::size_t iterations = 8) {
  ExperimentConfig cfg = default_config(EnvironmentKind::exponential);
  cfg.methods = {parse_method("ise"), parse_method("stageopt:10")};
  cfg.iterations = iterations;
  cfg.coverage.grid = 200;
  cfg.regret_probe_period = 4;
  cfg.seed = 3;
  return cfg;
}

std::string csv_of(const std::vector<RunRecord>& recs) {
  std::ostringstream s;
  write_run_csv(s, recs);
  return s.str();
}

TEST(Config, ParsesMinimalDocument) {
  const auto cfg = parse_config(R"({"schema_version": 1, "environment": {"kind": "exponential"},
                                    "method": "stageopt:2", "iterations": 7})");
  EXPECT_EQ(cfg.environment.kind, EnvironmentKind::exponential);
  ASSERT_EQ(cfg.methods.size(), 1u);
  EXPECT_EQ(cfg.methods[0].kind, MethodSpec::Kind::stageopt);
  EXPECT_DOUBLE_EQ(cfg.methods[0].L, 2.0);
  EXPECT_EQ(cfg.iterations, 7u);
  EXPECT_NEAR(cfg.environment.domain.lower()[0], -5.0, 0.0);
}

TEST(Config, RejectsMalformedInput) {
  const char* bad[] = {
      "not json",
      R"({"schema_version": 1})",
      R"({"schema_version": 2, "environment": {"kind": "exponential"}})",
      R"({"schema_version": 1, "environment": {"kind": "moon"}})",
      R"({"schema_version": 1, "environment": {"kind": "exponential"}, "itertions": 3})",
      R"({"schema_version": 1, "environment": {"kind": "exponential"}, "iterations": -3})",
      R"({"schema_version": 1, "environment": {"kind": "exponential"}, "method": "ise",
          "methods": ["ise"]})",
      R"({"schema_version": 1, "environment": {"kind": "exponential"}, "method": "bogus"})",
      R"({"schema_version": 1, "environment": {"kind": "exponential", "lower": [1], "upper": [0]}})",
  };
  for (const char* text : bad) {
    EXPECT_THROW(validate(parse_config(text)), ConfigError) << text;
  }
}

TEST(Config, GridMethodsNeedSmallDimension) {
  ExperimentConfig cfg = default_config(EnvironmentKind::heteroskedastic);
  cfg.methods = {parse_method("stageopt:1")};
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.methods = {parse_method("line-stageopt:1")};
  EXPECT_NO_THROW(validate(cfg));
}

TEST(Config, MethodLabels) {
  EXPECT_EQ(parse_method("line-stageopt:1").label, default_label(parse_method("line-stageopt:1")));
  EXPECT_TRUE(parse_method("line-ise").line);
  EXPECT_THROW(parse_method("ise:3"), ConfigError);
}

TEST(Config, ShippedConfigsLoad) {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(SAFEX_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
    ++seen;
  }
  EXPECT_GE(seen, 6u);
}

TEST(Csv, RoundTripsRecords) {
  RunRecord r;
  r.run_id = "stageopt(L=1)#2";
  r.method = "stageopt(L=1)";
  r.replication = 2;
  for (std::size_t n = 1; n <= 3; ++n) {
    RunRow row;
    row.n = n;
    row.x = Eigen::Vector2d(0.1 * n, -1.0 / 3.0);
    row.y = std::sqrt(2.0) * n;
    row.f_true = -0.5 + n;
    row.violated = n == 1;
    row.score = 1e-300;
    row.coverage_pct = 12.5;
    row.true_safe_coverage_pct = 100.0 / 7.0;
    row.info_gain_sum = 3.0 * n;
    row.regret = n == 2 ? 0.25 : std::numeric_limits<double>::quiet_NaN();
    r.rows.push_back(row);
  }
  std::istringstream in(csv_of({r}));
  const auto back = read_run_csv(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].run_id, r.run_id);
  EXPECT_EQ(back[0].method, r.method);
  EXPECT_EQ(back[0].replication, 2u);
  ASSERT_EQ(back[0].rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& a = r.rows[i];
    const auto& b = back[0].rows[i];
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.y, b.y);
    EXPECT_EQ(a.f_true, b.f_true);
    EXPECT_EQ(a.violated, b.violated);
    EXPECT_EQ(a.score, b.score);
    EXPECT_EQ(a.true_safe_coverage_pct, b.true_safe_coverage_pct);
    EXPECT_EQ(std::isnan(a.regret), std::isnan(b.regret));
    if (!std::isnan(a.regret)) EXPECT_EQ(a.regret, b.regret);
  }
}

TEST(Csv, RejectsBadSchema) {
  std::istringstream wrong_header("a,b,c\n1,2,3\n");
  EXPECT_THROW(read_run_csv(wrong_header), ConfigError);
  std::string text = csv_of({});
  text += "9,ise#0,1,0,0,0,0,0,0,0,0,nan,0\n";
  std::istringstream wrong_version(text);
  EXPECT_THROW(read_run_csv(wrong_version), ConfigError);
}

RunRecord hand_run(const std::string& method, std::size_t rep, std::vector<double> cov,
                   std::vector<bool> violated) {
  RunRecord r;
  r.method = method;
  r.replication = rep;
  r.run_id = method + "#" + std::to_string(rep);
  for (std::size_t i = 0; i < cov.size(); ++i) {
    RunRow row;
    row.n = i + 1;
    row.x = Point::Zero(1);
    row.coverage_pct = cov[i];
    row.violated = violated[i];
    row.regret = i == 0 ? 1.0 + static_cast<double>(rep) : std::numeric_limits<double>::quiet_NaN();
    r.rows.push_back(row);
  }
  return r;
}

TEST(Aggregate, HandComputedStatistics) {
  const std::vector<RunRecord> recs = {hand_run("a", 0, {10, 20}, {false, true}),
                                       hand_run("a", 1, {30, 40}, {false, false}),
                                       hand_run("a", 2, {50, 90}, {true, true})};
  const auto rows = aggregate(recs);
  const SummaryRow* c2 = find_summary(rows, "a", 2, "coverage_pct");
  ASSERT_NE(c2, nullptr);
  EXPECT_EQ(c2->count, 3u);
  EXPECT_DOUBLE_EQ(c2->mean, 50.0);
  EXPECT_DOUBLE_EQ(c2->median, 40.0);
  // Sample variance ((20-50)^2 + (40-50)^2 + (90-50)^2) / 2 = 1300.
  EXPECT_NEAR(c2->stddev, std::sqrt(1300.0), 1e-12);
  EXPECT_NEAR(c2->stderr_mean, std::sqrt(1300.0 / 3.0), 1e-12);
  // Cumulative violation rates at n = 2: 50%, 0%, 100%.
  const SummaryRow* v2 = find_summary(rows, "a", 2, "violation_pct");
  ASSERT_NE(v2, nullptr);
  EXPECT_DOUBLE_EQ(v2->mean, 50.0);
  const SummaryRow* r1 = find_summary(rows, "a", 1, "regret");
  ASSERT_NE(r1, nullptr);
  EXPECT_DOUBLE_EQ(r1->mean, 2.0);
  EXPECT_EQ(find_summary(rows, "a", 2, "regret"), nullptr);
  const SummaryRow* one = find_summary(aggregate({recs[0]}), "a", 1, "coverage_pct");
  ASSERT_NE(one, nullptr);
  EXPECT_EQ(one->stddev, 0.0);
}

TEST(Campaign, ZeroIterationsGivesEmptyCompleteRun) {
  const RunRecord r = run_campaign(small_exp(0), parse_method("ise"));
  EXPECT_TRUE(r.complete);
  EXPECT_TRUE(r.rows.empty());
  EXPECT_EQ(r.violation_pct(), 0.0);
  EXPECT_TRUE(aggregate({r}).empty());
}

TEST(Campaign, RerunsAreBitIdentical) {
  const ExperimentConfig cfg = small_exp();
  for (const auto& m : cfg.methods) {
    const RunRecord a = run_campaign(cfg, m, 1);
    const RunRecord b = run_campaign(cfg, m, 1);
    EXPECT_EQ(csv_of({a}), csv_of({b})) << m.label;
    EXPECT_EQ(a.rows.size(), cfg.iterations);
  }
  const auto sweep1 = run_sweep(cfg, 1);
  const auto sweep2 = run_sweep(cfg, 2);
  EXPECT_EQ(csv_of(sweep1), csv_of(sweep2));
}

TEST(Campaign, RowsAreConsistent) {
  const ExperimentConfig cfg = small_exp(12);
  const RunRecord r = run_campaign(cfg, cfg.methods[0], 0);
  ASSERT_TRUE(r.complete);
  double prev_gain = 0.0;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    EXPECT_EQ(row.n, i + 1);
    EXPECT_EQ(row.violated, row.f_true < 0.0);
    EXPECT_GE(row.info_gain_sum, prev_gain);
    prev_gain = row.info_gain_sum;
    EXPECT_GE(row.coverage_pct, 0.0);
    EXPECT_LE(row.coverage_pct, 100.0);
    EXPECT_EQ(std::isnan(row.regret), row.n % cfg.regret_probe_period != 0);
    if (!std::isnan(row.regret)) EXPECT_GE(row.regret, -1e-9);
    EXPECT_EQ(row.wall_ms, 0.0);
  }
}

TEST(Metrics, MonteCarloCoverageAgreesWithGrid) {
  const ExperimentConfig cfg = small_exp();
  const Scenario sc = make_scenario(cfg, 0);
  GpState gp(make_kernel(cfg), sc.env->noise());
  for (double x : {0.0, 0.8, -0.6, 1.5}) gp = gp.condition(Point::Constant(1, x), std::exp(-x) + 0.05);
  const SafetyModel s(sc.env->seed(), cfg.beta);
  const Coverage grid = coverage(gp, s, 4, grid_reference(*sc.env, 4001));
  const Coverage mc = coverage(gp, s, 4, monte_carlo_reference(*sc.env, 40000, 17));
  EXPECT_GT(grid.safe_pct, 5.0);
  EXPECT_NEAR(grid.safe_pct, mc.safe_pct, 1.0);
  EXPECT_NEAR(grid.true_safe_pct, mc.true_safe_pct, 1.0);
}

TEST(Metrics, RegretIsNonNegative) {
  ExperimentConfig cfg = default_config(EnvironmentKind::bump5);
  cfg.coverage.monte_carlo = 2000;
  const Scenario sc = make_scenario(cfg, 0);
  GpState gp(make_kernel(cfg), sc.env->noise());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> step(0.0, 0.5);
  const SafetyModel s(sc.env->seed(), cfg.beta);
  for (int i = 0; i < 20; ++i) {
    Point x = sc.env->seed();
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] += step(rng);
    gp = gp.condition(x, sc.env->observe(x, rng));
    const double r = regret_probe(gp, s, gp.size(), *sc.env, sc.f_star, sc.reference, {64, 3});
    EXPECT_GE(r, -1e-9);
  }
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("safex_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    config_ = (dir_ / "cfg.json").string();
    std::ofstream(config_) << R"({"schema_version": 1, "name": "t",
      "environment": {"kind": "exponential"}, "methods": ["ise", "stageopt:10"],
      "iterations": 4, "replications": 2, "coverage": {"grid": 100}, "seed": 2})";
  }
  void TearDown() override { fs::remove_all(dir_); }

  int call(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::main(args, out_, err_);
  }

  fs::path dir_;
  std::string config_;
  std::ostringstream out_, err_;
};

TEST_F(Cli, RunWritesCsv) {
  const std::string out = (dir_ / "run").string();
  ASSERT_EQ(call({"run", "--config", config_, "--out", out, "--method", "stageopt:10"}),
            cli::kExitOk)
      << err_.str();
  const auto recs = read_run_csv((fs::path(out) / "run.csv").string());
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].rows.size(), 4u);
  EXPECT_EQ(recs[0].method, "stageopt(L=10)");
}

TEST_F(Cli, SweepThenReport) {
  const std::string out = (dir_ / "sweep").string();
  ASSERT_EQ(call({"sweep", "--config", config_, "--out", out, "--iterations", "3"}), cli::kExitOk)
      << err_.str();
  EXPECT_TRUE(fs::exists(fs::path(out) / "runs.csv"));
  EXPECT_TRUE(fs::exists(fs::path(out) / "summary.csv"));
  std::vector<std::string> inputs;
  for (const auto& e : fs::directory_iterator(out)) {
    const std::string name = e.path().filename().string();
    if (name != "runs.csv" && name != "summary.csv") inputs.push_back(e.path().string());
  }
  EXPECT_EQ(inputs.size(), 4u);
  std::vector<std::string> args = {"report", "--out", (dir_ / "agg.csv").string()};
  args.insert(args.end(), inputs.begin(), inputs.end());
  ASSERT_EQ(call(args), cli::kExitOk) << err_.str();
  std::ifstream a(fs::path(out) / "summary.csv"), b(dir_ / "agg.csv");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  // File order differs from run order, which only changes the method order.
  auto lines = [](const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    std::sort(v.begin(), v.end());
    return v;
  };
  EXPECT_EQ(lines(sa.str()), lines(sb.str()));
}

TEST_F(Cli, SeedFlagAndEnvironmentAgree) {
  const std::string a = (dir_ / "a").string(), b = (dir_ / "b").string();
  ASSERT_EQ(call({"run", "--config", config_, "--out", a, "--seed", "44"}), cli::kExitOk);
  ::setenv("SAFE_EXPLORE_SEED", "44", 1);
  const int code = call({"run", "--config", config_, "--out", b});
  ::unsetenv("SAFE_EXPLORE_SEED");
  ASSERT_EQ(code, cli::kExitOk);
  std::ifstream fa(fs::path(a) / "run.csv"), fb(fs::path(b) / "run.csv");
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

TEST_F(Cli, ConfigErrorsExitWithTwo) {
  EXPECT_EQ(call({}), cli::kExitConfig);
  EXPECT_EQ(call({"run"}), cli::kExitConfig);
  EXPECT_EQ(call({"run", "--config", (dir_ / "missing.json").string()}), cli::kExitConfig);
  EXPECT_EQ(call({"run", "--config", config_, "--method", "nonsense"}), cli::kExitConfig);
  EXPECT_EQ(call({"run", "--config", config_, "--iterations", "lots"}), cli::kExitConfig);
  std::ofstream((dir_ / "bad.json").string()) << "{";
  EXPECT_EQ(call({"sweep", "--config", (dir_ / "bad.json").string()}), cli::kExitConfig);
  ::setenv("SAFE_EXPLORE_SEED", "abc", 1);
  const int code = call({"run", "--config", config_, "--out", (dir_ / "x").string()});
  ::unsetenv("SAFE_EXPLORE_SEED");
  EXPECT_EQ(code, cli::kExitConfig);
}

}  // namespace
}  // namespace safex
