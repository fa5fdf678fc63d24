#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "vqrate/measure.hpp"
#include "vqrate/rng.hpp"

namespace vqrate {

struct TransportResult {
  double distance = 0.0;
  int p = 2;
  std::string method;  // quantile1d | sorted | assignment | gaussian-closed-form | assignment-surrogate
  double error_bound = 0.0;
};

// 1D quantile coupling. Empirical pieces are handled exactly: empirical vs
// empirical by merging the quantile steps, empirical vs analytic with cell
// moments over each quantile bin. Two analytic laws use adaptive quadrature.
TransportResult w_p_1d(const Measure& a, const Measure& b, int p = 2);

// Sorted pairing of two 1D clouds of equal size.
TransportResult w_p_sorted(const Measure& a, const Measure& b, int p = 2);

inline constexpr std::size_t kAssignmentLimit = 512;

// Exact optimal assignment on squared distances (any d, equal n <= 512).
TransportResult w2_assignment(const Measure& a, const Measure& b);

// Closed form between two Gaussian laws of the same dimension.
TransportResult w2_gaussian(const Measure& a, const Measure& b);

// Stand-in for W2(mu_n, mu) when mu is a d >= 2 analytic law: exact
// assignment against an independent sample of mu of the same size.
TransportResult w2_surrogate(const Measure& empirical, const Measure& analytic, Stream stream);

// Minimum-cost perfect matching of a square cost matrix (Hungarian method
// with potentials). assignment[i] is the column matched to row i.
double min_cost_assignment(const Eigen::MatrixXd& cost, std::vector<int>* assignment = nullptr);

}  // namespace vqrate
