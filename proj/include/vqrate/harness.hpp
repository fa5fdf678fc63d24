#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vqrate/solvers.hpp"

namespace vqrate {

inline constexpr int kCsvSchemaVersion = 1;

struct ExperimentConfig {
  // consistency | perf-vs-n | thm21-slack | thm22-distance | thm42-gaussian | uniform-closed-form
  std::string experiment;
  std::string distribution;
  std::vector<int> K;
  std::vector<std::size_t> n;
  int seeds = 1;
  std::uint64_t base_seed = 0;
  SolverConfig solver;         // solver run on each empirical measure
  int restarts = 1;            // best_of restarts on each empirical measure
  int reference_restarts = 10;
  int scale_reps = 200;        // replications behind r_1, r_2n (thm42-gaussian)
  int workers = 1;
  double cell_time_budget_s = 60.0;
  std::string output;
  bool timing = false;  // adds a wall_time_s column; breaks byte-identical reruns
};

// Parses and validates a JSON document; throws ParseError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
void validate(const ExperimentConfig& cfg);

struct ResultRow {
  std::string experiment;
  std::string distribution;
  int K = 0;
  std::size_t n = 0;
  int seed = 0;
  std::string status = "ok";  // ok | timeout
  double performance = 0.0;   // D(x^(n)) - D(x*) under the law
  double w2 = 0.0;            // W2(mu_n, mu), exact in 1D
  double bound = 0.0;
  double slack = 0.0;
  double quantizer_distance = 0.0;  // |x^(n) - x*|
  double wall_time_s = 0.0;

  double field(const std::string& name) const;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // sorted by (K, n, seed)
  int timeouts = 0;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

void write_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<ResultRow>& rows);
std::string to_csv(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Least squares of log(mean y) on log(x) over the distinct x values.
RateFit fit_rate(const std::vector<ResultRow>& rows, const std::string& x_field, const std::string& y_field);
RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y);

// Stream of one experiment cell, a pure function of (base_seed, K, n, seed).
Stream cell_stream(std::uint64_t base_seed, int K, std::size_t n, int seed);

}  // namespace vqrate
