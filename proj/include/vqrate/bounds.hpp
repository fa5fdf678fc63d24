#pragma once

#include <map>
#include <optional>
#include <string>

#include "vqrate/measure.hpp"
#include "vqrate/rng.hpp"
#include "vqrate/solvers.hpp"

namespace vqrate {

// 4 e* W + 4 W^2
double perf_bound_thm21(double e_star, double w2);
// (8 / lambda*) (e* W + W^2), a bound on the squared grid distance.
double quantizer_bound_thm22(double lambda_star, double e_star, double w2);
// Bracketed rate of the empirical W2 convergence; the constant is left out.
double empirical_rate_prop41(int d, double q, double n);

struct Thm42aParams {
  int K = 1;
  double n = 1, r1 = 0, r2n = 0, rho = 0;
};
struct Thm42bParams {
  int K = 1;
  double n = 1;
  double C = 1.0;  // C_{mu,p}
  double p = 3, c = 0;
  int d = 1;
  double gamma = 1.0;
};
struct Thm42cParams {
  int K = 1;
  double n = 1;
  double C = 1.0;  // C_{theta,kappa,mu}
  double kappa = 2;
  int d = 1;
  double gamma = 1.0;
};

double clustering_bound_thm42a(const Thm42aParams& p);
double clustering_bound_thm42b(const Thm42bParams& p);
double clustering_bound_thm42c(const Thm42cParams& p);
// 24 (1 v log(2 E exp(|X|^2/4))) for N(0, I_d): 24 (1 + d/2) log 2.
double gaussian_performance_constant(int d);
// Same constant for a general Gaussian law; needs all covariance eigenvalues below 2.
double gaussian_performance_constant(const Measure& gaussian);

double zador_upper(double C, double sigma, int d, double K);

struct RadiusBound {
  std::string kind;  // hyper-exponential | polynomial
  double value = 0;  // radius bound, or the limit exponent of log rho_K / log K
  std::optional<double> exact_1d_factor;  // (3/theta)^{1/kappa}
};
RadiusBound radius_bounds(const TailDescriptor& tail, int d, double K, double p = 2.0);

struct ScaleEstimates {
  double r1 = 0, r1_se = 0;
  double rn = 0, rn_se = 0;
  double r2n = 0, r2n_se = 0;
  double rho_hat = 0, e_star_hat = 0;
  double m2 = 0;  // ||X||_2
  double q = 4;
  double M_q = 0, sigma_q = 0;
};

struct ScaleOptions {
  double q = 4.0;  // moment order for M_q and sigma_q
  int restarts = 10;
  SolverConfig solver;
};

// r_1, r_n, r_2n from reps paired draws of 2n points (the first n give r_n,
// the first one r_1), rho_hat and e_star_hat from best_of.
ScaleEstimates scale_estimates(const Measure& m, std::size_t n, int reps, int K, const Stream& stream,
                               const ScaleOptions& opt = {});
// Only the r fields, from stream.split(rep) for each replication.
ScaleEstimates sample_radii(const Measure& m, std::size_t n, int reps, const Stream& stream, int workers = 1);

enum class Applicability { Yes, No, Asymptotic };
std::string to_string(Applicability a);

struct BoundReport {
  std::string name;
  std::optional<double> measured;
  double measured_se = 0.0;
  double bound = 0.0;
  std::optional<double> slack;
  std::map<std::string, double> inputs;
  Applicability applicable = Applicability::Yes;
  std::string note;
};

// Bound by name (thm21, thm22, prop41, thm42a, thm42b, thm42c, zador, radius)
// from a flat parameter record; an optional "measured" entry fills slack.
BoundReport evaluate_bound(const std::string& name, const std::map<std::string, double>& params);

std::map<std::string, double> parse_params(const std::string& text);

}  // namespace vqrate
