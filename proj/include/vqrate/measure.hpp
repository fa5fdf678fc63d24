#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "vqrate/rng.hpp"

namespace vqrate {

// Moments of a measure restricted to a 1D cell (a, b].
struct CellMoments {
  double mass = 0.0;
  double first = 0.0;   // integral of xi
  double second = 0.0;  // integral of xi^2

  CellMoments& operator+=(const CellMoments& o) {
    mass += o.mass;
    first += o.first;
    second += o.second;
    return *this;
  }
};

// f(xi) = tau |xi|^c exp(-theta |xi|^kappa) for |xi| >= A.
struct HyperExponentialTail {
  double theta = 0.5;
  double kappa = 2.0;
  double c = 0.0;
  double tau = 1.0;
  double A = 1.0;
};

// f(xi) = tau |xi|^-c (log |xi|)^beta for |xi| >= A.
struct PolynomialTail {
  double c = 0.0;
  double tau = 1.0;
  double beta = 0.0;
  double A = 1.0;
};

using TailDescriptor = std::variant<HyperExponentialTail, PolynomialTail>;

// An analytic distribution or an empirical point cloud on R^d. Immutable;
// copies share the point storage of empirical measures.
class Measure {
 public:
  struct Uniform1d {
    double lo, hi;
  };
  struct Gaussian1d {
    double mean, sigma;
  };
  struct Laplace1d {
    double loc, scale;
  };
  struct Exponential1d {
    double rate, shift;
  };
  struct GaussianNd {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    Eigen::MatrixXd chol;  // lower Cholesky factor of cov
    double log_norm;       // log of the density normalising constant
  };
  struct UniformBox {
    Eigen::VectorXd lo, hi;
  };
  struct Empirical {
    std::shared_ptr<const Eigen::MatrixXd> points;  // n x d
    // 1D only: sorted atoms and long-double prefix sums of xi and xi^2.
    std::shared_ptr<const std::vector<double>> sorted;
    std::shared_ptr<const std::vector<long double>> prefix1;
    std::shared_ptr<const std::vector<long double>> prefix2;
  };
  using Kind = std::variant<Uniform1d, Gaussian1d, Laplace1d, Exponential1d, GaussianNd, UniformBox, Empirical>;

  static Measure uniform(double lo, double hi);
  static Measure gaussian(double mean, double sigma);
  static Measure laplace(double loc, double scale);
  static Measure exponential(double rate, double shift = 0.0);
  // d == 1 collapses to gaussian(); covariance must be SPD.
  static Measure gaussian_nd(Eigen::VectorXd mean, Eigen::MatrixXd cov);
  // d == 1 collapses to uniform().
  static Measure uniform_box(Eigen::VectorXd lo, Eigen::VectorXd hi);
  static Measure empirical(Eigen::MatrixXd points);
  static Measure empirical(const std::vector<double>& atoms);

  const Kind& kind() const noexcept { return kind_; }
  std::string kind_name() const;
  int dim() const noexcept { return dim_; }
  bool is_empirical() const noexcept { return std::holds_alternative<Empirical>(kind_); }
  bool is_analytic() const noexcept { return !is_empirical(); }
  bool is_gaussian() const noexcept {
    return std::holds_alternative<Gaussian1d>(kind_) || std::holds_alternative<GaussianNd>(kind_);
  }

  double pdf(double xi) const;
  double pdf(const Eigen::Ref<const Eigen::VectorXd>& xi) const;
  double cdf(double x) const;
  // Left-continuous generalised inverse inf{x : F(x) >= p}, p in (0,1).
  double quantile(double p) const;

  Eigen::MatrixXd sample(std::size_t n, Stream& stream) const;
  // One draw written to out[0..dim).
  void draw(Stream& stream, double* out) const;

  // Mass, first and second moment of the 1D measure on (a, b]; a, b may be infinite.
  CellMoments cell_moments(double a, double b) const;

  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;
  // E|X|^2
  double second_moment() const;
  // E|X|^q (closed form, 1D quadrature or summation; Monte Carlo otherwise).
  double abs_moment(double q) const;
  // sigma_q = min_a (E|X - a|^q)^(1/q).
  double sigma(double q) const;

  // 1D: quantiles 1e-12 and 1-1e-12 (or the support end points when bounded).
  std::pair<double, double> effective_support() const;
  // Axis-aligned box carrying all but ~1e-12 of the mass (d >= 1).
  std::pair<Eigen::VectorXd, Eigen::VectorXd> effective_box() const;

  // Empirical only.
  const Eigen::MatrixXd& points() const;
  std::size_t size() const;
  const std::vector<double>& sorted_atoms() const;
  std::size_t distinct_atoms() const;

  const std::optional<TailDescriptor>& tail() const noexcept { return tail_; }
  Measure with_tail(TailDescriptor tail) const;

 private:
  explicit Measure(Kind kind, int dim) : kind_(std::move(kind)), dim_(dim) {}

  Kind kind_;
  int dim_;
  std::optional<TailDescriptor> tail_;
};

inline constexpr double kTailQuantile = 1e-12;

// Distribution spec grammar:
//   uniform:a,b  gauss:m,sigma  laplace:m,b  exp:lambda[,shift]
//   gaussNd:meanCsv;covCsv  (cov row-major, d*d values)
//   box:loCsv;hiCsv  empirical:path.csv
Measure parse_distribution(std::string_view spec);

}  // namespace vqrate
