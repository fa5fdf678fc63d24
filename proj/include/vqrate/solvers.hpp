#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vqrate/measure.hpp"
#include "vqrate/quantizer.hpp"
#include "vqrate/rng.hpp"

namespace vqrate {

enum class InitStrategy { Quantile, SamplePP, Given };

InitStrategy parse_init_strategy(const std::string& name);
std::string to_string(InitStrategy s);

// quantile: 1D grid at the quantiles (2i-1)/(2K).
// sample-pp: distance-weighted greedy seeding on a 10^4-point sample (on the
// atoms themselves for empirical clouds of at most 10^4 points).
// given: validates and returns *given.
Quantizer init_quantizer(const Measure& m, int K, InitStrategy strategy, Stream& stream,
                         const Quantizer* given = nullptr);

inline constexpr std::size_t kSeedingSample = 10000;

struct SolveResult {
  Quantizer quantizer;
  double distortion = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;  // Euclidean norm of the K x d gradient at the returned grid
  std::vector<double> history;  // distortion at each visited iterate
  std::string solver;
};

// Default stopping tolerance for a measure: 1e-10 exact 1D, 1e-8 empirical,
// 1e-8 for Monte Carlo centroids on a fixed sample stream.
double default_tolerance(const Measure& m);
inline constexpr int kDefaultMaxIter = 10000;

struct LloydOptions {
  double tol = -1.0;  // negative: default_tolerance
  int max_iter = kDefaultMaxIter;
  std::optional<Method> method;  // default_method(m) when empty
  Stream stream{0x11dULL};  // Monte Carlo centroids reuse this stream every iteration
};

SolveResult lloyd(const Measure& m, const Quantizer& init, const LloydOptions& opt = {});

SolveResult newton_1d(const Measure& m, const Quantizer& init, double tol = 1e-10, int max_iter = kDefaultMaxIter);

struct ClvqSchedule {
  double a = 1.0;
  double b = 100.0;
  double gamma(std::size_t t) const { return a / (b + static_cast<double>(t)); }
};

SolveResult clvq(const Measure& m, const Quantizer& init, std::size_t steps, const ClvqSchedule& schedule,
                 Stream stream, double tol = 1e-3);

enum class SolverKind { Lloyd, Newton, Clvq };
SolverKind parse_solver_kind(const std::string& name);
std::string to_string(SolverKind s);

struct SolverConfig {
  SolverKind kind = SolverKind::Lloyd;
  InitStrategy init = InitStrategy::Quantile;
  std::optional<Quantizer> given;
  double tol = -1.0;
  int max_iter = kDefaultMaxIter;
  std::size_t clvq_steps = 100000;
  ClvqSchedule schedule;
  int workers = 1;  // parallel restarts in best_of
};

// Initialise and run the configured solver once.
SolveResult solve(const Measure& m, int K, const SolverConfig& cfg, Stream& stream);

struct BestOfResult {
  SolveResult best;
  double e_star_hat = 0.0;  // sqrt of the smallest distortion
  double rho_hat = 0.0;     // largest point norm of the best grid
  int best_restart = 0;
  std::vector<double> restart_distortions;
};

// Restart 0 uses cfg.init, later restarts use sample-pp seeding on
// stream.split(r). Minimum by distortion, ties to the lowest restart.
BestOfResult best_of(const Measure& m, int K, int restarts, const SolverConfig& cfg, const Stream& stream);

}  // namespace vqrate
