#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "vqrate/errors.hpp"
#include "vqrate/harness.hpp"

using namespace vqrate;

namespace {

ExperimentConfig small(const std::string& exp, const std::string& dist) {
  ExperimentConfig c;
  c.experiment = exp;
  c.distribution = dist;
  c.K = {2, 3};
  c.n = {16, 64};
  c.seeds = 3;
  c.base_seed = 11;
  c.reference_restarts = 3;
  c.solver.init = InitStrategy::Quantile;
  return c;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST(Config, ParsesJson) {
  const auto c = parse_config(R"({"experiment":"thm21-slack","distribution":"gauss:0,1","K":[2,3,5],
    "n":[16,64,256,1024],"seeds":5,"base_seed":7,"solver":{"method":"lloyd","restarts":2},"workers":3})");
  EXPECT_EQ(c.K, (std::vector<int>{2, 3, 5}));
  EXPECT_EQ(c.n.size(), 4u);
  EXPECT_EQ(c.seeds, 5);
  EXPECT_EQ(c.base_seed, 7u);
  EXPECT_EQ(c.restarts, 2);
  EXPECT_EQ(c.workers, 3);
  EXPECT_EQ(c.solver.init, InitStrategy::Quantile);
  const auto d = parse_config(R"({"experiment":"consistency","distribution":"gaussNd:0,0;1,0,0,1","K":3,"n":[32,64]})");
  EXPECT_EQ(d.solver.init, InitStrategy::SamplePP);
  EXPECT_EQ(d.K, (std::vector<int>{3}));
}

TEST(Config, RejectsInvalid) {
  const std::string base = R"("distribution":"uniform:0,1","K":[2],"n":[16,32])";
  EXPECT_THROW(parse_config("{"), ParseError);
  EXPECT_THROW(parse_config(R"({"experiment":"nope",)" + base + "}"), ParseError);
  EXPECT_THROW(parse_config(R"({"experiment":"consistency","distribution":"uniform:0,1","K":[],"n":[16]})"),
               ParseError);
  EXPECT_THROW(parse_config(R"({"experiment":"consistency","distribution":"uniform:0,1","K":[2],"n":[32,16]})"),
               ParseError);
  EXPECT_THROW(parse_config(R"({"experiment":"consistency","distribution":"bogus:1","K":[2],"n":[16]})"),
               ParseError);
  EXPECT_THROW(parse_config(R"({"experiment":"thm42-gaussian","distribution":"uniform:0,1","K":[2],"n":[16]})"),
               ParseError);
  EXPECT_THROW(parse_config(R"({"experiment":"uniform-closed-form","distribution":"gauss:0,1","K":[2],"n":[16]})"),
               ParseError);
  EXPECT_THROW(
      parse_config(R"({"experiment":"consistency","distribution":"gaussNd:0,0;1,0,0,1","K":[2],"n":[16,1024]})"),
      ParseError);
  EXPECT_THROW(parse_config(R"({"experiment":"consistency",)" + base + R"(,"solver":{"method":"newton"}})"),
               ParseError);
  EXPECT_THROW(parse_config(R"({"experiment":"consistency",)" + base + R"(,"seeds":0})"), ParseError);
}

TEST(Run, GridCardinality) {
  auto c = small("perf-vs-n", "uniform:0,1");
  c.K = {2, 3, 4};
  c.n = {16, 32, 64, 128};
  c.seeds = 5;
  const auto r = run_experiment(c);
  EXPECT_EQ(r.rows.size(), 60u);
  EXPECT_EQ(r.timeouts, 0);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    const auto& a = r.rows[i - 1];
    const auto& b = r.rows[i];
    EXPECT_TRUE(std::tie(a.K, a.n, a.seed) < std::tie(b.K, b.n, b.seed));
  }
  for (const auto& row : r.rows) {
    EXPECT_TRUE(std::isfinite(row.performance) && std::isfinite(row.w2) && std::isfinite(row.bound));
    EXPECT_EQ(row.status, "ok");
  }
}

TEST(Run, PerfSlackNonnegative) {
  for (const char* dist : {"uniform:0,1", "gauss:0,1", "laplace:0,1"}) {
    const auto r = run_experiment(small("thm21-slack", dist));
    for (const auto& row : r.rows) {
      EXPECT_GE(row.slack, 0.0) << dist << " K=" << row.K << " n=" << row.n;
      EXPECT_GE(row.performance, -1e-12);
    }
  }
}

TEST(Run, UniformClosedFormDistanceShrinks) {
  auto c = small("uniform-closed-form", "uniform:0,1");
  c.K = {4};
  c.n = {64, 512, 4096};
  c.seeds = 15;
  const auto r = run_experiment(c);
  std::map<std::size_t, std::vector<double>> by_n;
  for (const auto& row : r.rows) by_n[row.n].push_back(row.quantizer_distance);
  EXPECT_GT(median(by_n[64]), median(by_n[512]));
  EXPECT_GT(median(by_n[512]), median(by_n[4096]));
}

TEST(Run, DistanceAndClusteringColumns) {
  auto c = small("thm22-distance", "uniform:0,1");
  c.n = {256, 1024};
  for (const auto& row : run_experiment(c).rows) {
    EXPECT_GE(row.slack, 0.0) << "K=" << row.K << " n=" << row.n;
    EXPECT_NEAR(row.slack, row.bound - row.quantizer_distance * row.quantizer_distance, 1e-15);
  }
  auto g = small("thm42-gaussian", "gauss:0,1");
  g.scale_reps = 50;
  const auto rows = run_experiment(g).rows;
  for (const auto& row : rows) EXPECT_NEAR(row.slack, row.bound - row.performance, 1e-15);
}

TEST(Run, TwoDimensionalSurrogate) {
  auto c = small("consistency", "gaussNd:0,0;1,0,0,1");
  c.solver.init = InitStrategy::SamplePP;
  c.K = {3};
  c.n = {32, 64};
  c.seeds = 2;
  const auto r = run_experiment(c);
  ASSERT_EQ(r.rows.size(), 4u);
  for (const auto& row : r.rows) {
    EXPECT_GT(row.w2, 0.0);
    EXPECT_TRUE(std::isfinite(row.quantizer_distance));
  }
}

TEST(Run, ReproducibleAndThreadIndependent) {
  auto c = small("thm21-slack", "gauss:0,1");
  const std::string a = to_csv(c, run_experiment(c).rows);
  const std::string b = to_csv(c, run_experiment(c).rows);
  c.workers = 4;
  const std::string p = to_csv(c, run_experiment(c).rows);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, p);
}

TEST(Run, SeedIsolation) {
  auto c = small("perf-vs-n", "laplace:0,1");
  const auto full = run_experiment(c).rows;
  // a sub-grid recomputes the same cells bit for bit
  auto d = c;
  d.K = {3};
  d.n = {64};
  d.seeds = 2;
  const auto part = run_experiment(d).rows;
  for (const auto& row : part) {
    const auto it = std::find_if(full.begin(), full.end(), [&](const ResultRow& r) {
      return r.K == row.K && r.n == row.n && r.seed == row.seed;
    });
    ASSERT_NE(it, full.end());
    EXPECT_EQ(it->performance, row.performance);
    EXPECT_EQ(it->w2, row.w2);
  }
}

TEST(Run, TimeoutBudgetMarksCells) {
  auto c = small("perf-vs-n", "uniform:0,1");
  c.cell_time_budget_s = 1e-12;
  const auto r = run_experiment(c);
  EXPECT_EQ(r.timeouts, static_cast<int>(r.rows.size()));
  for (const auto& row : r.rows) EXPECT_EQ(row.status, "timeout");
}

TEST(Csv, SchemaAndQuoting) {
  auto c = small("thm21-slack", "uniform:0,1");
  ResultRow row;
  row.experiment = "thm21-slack";
  row.distribution = "uniform:0,1";
  row.K = 2;
  row.n = 16;
  row.performance = 0.1;
  const std::string out = to_csv(c, {row});
  std::istringstream in(out);
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_EQ(header,
            "schema_version,experiment,distribution,K,n,seed,status,performance,w2,bound,slack,quantizer_distance\r");
  EXPECT_EQ(line.substr(0, 33), "1,thm21-slack,\"uniform:0,1\",2,16,");
  EXPECT_NE(line.find("0.10000000000000001"), std::string::npos);
  c.timing = true;
  EXPECT_NE(to_csv(c, {row}).find(",wall_time_s\r\n"), std::string::npos);
}

TEST(FitRate, Examples) {
  std::vector<double> x, y, k;
  for (double n : {16.0, 64.0, 256.0, 1024.0, 4096.0}) {
    x.push_back(n);
    y.push_back(1.0 / std::sqrt(n));
    k.push_back(3.0);
  }
  const auto f = fit_rate(x, y);
  EXPECT_NEAR(f.slope, -0.5, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_NEAR(fit_rate(x, k).slope, 0.0, 1e-14);
  EXPECT_THROW(fit_rate(std::vector<double>{1, 2, 2}, std::vector<double>{1, 1, 1}), DomainError);
  EXPECT_THROW(fit_rate(std::vector<double>{1, 2, 3}, std::vector<double>{1, -1, 1}), DomainError);
}

TEST(FitRate, UsesPerNMeansOfOkRows) {
  std::vector<ResultRow> rows;
  for (std::size_t n : {10u, 100u, 1000u}) {
    for (double jitter : {0.5, 1.5}) {
      ResultRow r;
      r.n = n;
      r.performance = jitter / static_cast<double>(n);
      rows.push_back(r);
    }
  }
  ResultRow bad;
  bad.n = 100;
  bad.status = "timeout";
  bad.performance = 1e6;
  rows.push_back(bad);
  EXPECT_NEAR(fit_rate(rows, "n", "performance").slope, -1.0, 1e-12);
  EXPECT_THROW(fit_rate(rows, "n", "nope"), DomainError);
}

TEST(CellStream, PureFunctionOfCell) {
  EXPECT_EQ(cell_stream(1, 2, 16, 0), cell_stream(1, 2, 16, 0));
  EXPECT_NE(cell_stream(1, 2, 16, 0).key(), cell_stream(1, 2, 16, 1).key());
  EXPECT_NE(cell_stream(1, 2, 16, 0).key(), cell_stream(2, 2, 16, 0).key());
  EXPECT_NE(cell_stream(1, 2, 16, 0).key(), cell_stream(1, 3, 16, 0).key());
}
