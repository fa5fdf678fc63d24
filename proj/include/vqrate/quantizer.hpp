#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "vqrate/measure.hpp"
#include "vqrate/rng.hpp"

namespace vqrate {

// K pairwise distinct points in R^d, one per row. 1D grids are kept sorted.
class Quantizer {
 public:
  explicit Quantizer(Eigen::MatrixXd points);
  static Quantizer from_values(const std::vector<double>& values);

  int K() const noexcept { return static_cast<int>(points_.rows()); }
  int dim() const noexcept { return static_cast<int>(points_.cols()); }
  const Eigen::MatrixXd& points() const noexcept { return points_; }
  Eigen::VectorXd point(int i) const { return points_.row(i).transpose(); }
  // 1D only.
  std::vector<double> values() const;
  // 1D Voronoi cut points (x_i + x_{i+1})/2, length K-1.
  std::vector<double> cut_points() const;

  double min_separation() const;
  double max_norm() const;

 private:
  Eigen::MatrixXd points_;
};

struct Nearest {
  int index = 0;
  double sq_distance = 0.0;
};

// Lowest index wins ties.
Nearest nearest(const Quantizer& x, const Eigen::Ref<const Eigen::VectorXd>& xi);
Nearest nearest(const Eigen::MatrixXd& centers, const double* xi);

namespace method {
struct Exact1d {};
struct EmpiricalSum {};
// N draws from a copy of `stream`; repeated calls reuse the same draws.
struct MonteCarlo {
  std::size_t samples = 100000;
  Stream stream{0x6d63ULL};
};
// Deterministic adaptive cubature over the Voronoi polygons (2D analytic).
struct Cubature2d {
  double abs_tol = 1e-13;
};
}  // namespace method

using Method = std::variant<method::Exact1d, method::EmpiricalSum, method::MonteCarlo, method::Cubature2d>;

// Exact1d for 1D analytic, EmpiricalSum for empirical, MonteCarlo otherwise.
Method default_method(const Measure& m);
std::string method_name(const Method& method);

struct DistortionEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero for exact methods
  double error() const;    // quantization error sqrt(D)
};

DistortionEstimate distortion(const Quantizer& x, const Measure& m, const Method& method);
DistortionEstimate distortion(const Quantizer& x, const Measure& m);

// Row i is 2 * integral over V_i of (x_i - xi) dmu.
Eigen::MatrixXd gradient(const Quantizer& x, const Measure& m, const Method& method);
Eigen::MatrixXd gradient(const Quantizer& x, const Measure& m);

struct VoronoiWeights {
  Eigen::VectorXd weights;
  std::string method;       // exact1d | empirical | montecarlo | cubature2d
  std::size_t samples = 0;  // Monte Carlo sample count
};

VoronoiWeights voronoi_weights(const Quantizer& x, const Measure& m, const Method& method);
VoronoiWeights voronoi_weights(const Quantizer& x, const Measure& m);

// Per-cell mass and first moment (K-vector and K x d matrix), the building
// block of Lloyd iterations.
struct CellStatistics {
  Eigen::VectorXd mass;
  Eigen::MatrixXd first;
  Eigen::VectorXd distortion;  // per-cell contribution to D
  std::size_t samples = 0;
};

CellStatistics cell_statistics(const Quantizer& x, const Measure& m, const Method& method);

}  // namespace vqrate
