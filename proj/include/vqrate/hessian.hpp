#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "vqrate/measure.hpp"
#include "vqrate/quantizer.hpp"

namespace vqrate {

struct TridiagonalMatrix {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples i and i+1

  int size() const noexcept { return static_cast<int>(diag.size()); }
  Eigen::MatrixXd dense() const;
  std::vector<double> row_sums() const;
};

// diag_i = A_i - B_{i-1,i} - B_{i,i+1}, off_i = -B_{i,i+1} with
// A_i = 2 mu(C_i) and B_{i,j} = (x_j - x_i) f((x_i + x_j)/2) / 2.
TridiagonalMatrix hessian_1d(const Quantizer& x, const Measure& m);
// Raw grid overload; rejects unsorted or repeated values.
TridiagonalMatrix hessian_1d(const std::vector<double>& grid, const Measure& m);

struct Hessian2d {
  Eigen::MatrixXd matrix;  // 2K x 2K, coordinates ordered (x_1, y_1, x_2, y_2, ...)
  // Some facet was cut by the integration window. For uniformBox measures
  // this is where the density jumps.
  bool crosses_boundary = false;
  Eigen::Vector2d window_lo, window_hi;
};

// Boundary-integral Hessian in 2D. The window is the measure's effective box,
// or [mean - r, mean + r]^2 when a truncation radius r is given.
Hessian2d hessian_2d_boundary(const Quantizer& x, const Measure& m, std::optional<double> truncation = {});

// Central second differences of the distortion, Kd x Kd, symmetrised.
// Requires 2 * step below the smallest point separation.
Eigen::MatrixXd fd_hessian(const Quantizer& x, const Measure& m, double step, const Method& method);
Eigen::MatrixXd fd_hessian(const Quantizer& x, const Measure& m, double step);

struct PdCertificate {
  bool positive_definite = false;
  std::vector<double> leading_minors;
  std::vector<double> row_excess;
  double lambda_star = 0.0;  // lower end of the bisection bracket of the smallest eigenvalue
};

PdCertificate pd_certificate(const TridiagonalMatrix& t);

// Number of eigenvalues strictly below `shift` (Sturm sequence count).
int eigenvalues_below(const TridiagonalMatrix& t, double shift);

inline constexpr double kLambdaMargin = 1e-8;
// Smallest eigenvalue minus kLambdaMargin, the value fed to the quantizer-distance bound.
double lambda_star_for_bound(const TridiagonalMatrix& t);

// Row sums of the 1D Hessian at a stationary grid written as cell integrals,
// evaluated by adaptive quadrature of the density.
std::vector<double> row_excess_integrals(const Quantizer& x, const Measure& m);

}  // namespace vqrate
