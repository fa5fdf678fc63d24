#include "vqrate/quadrature.hpp"

#include <numbers>
#include <stdexcept>

namespace vqrate {

GaussLegendreRule make_gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("make_gauss_legendre: n must be positive");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

const GaussLegendreRule& gauss_legendre_15() {
  static const GaussLegendreRule rule = make_gauss_legendre(15);
  return rule;
}

}  // namespace vqrate
