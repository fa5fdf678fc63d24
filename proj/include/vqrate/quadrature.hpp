#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace vqrate {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendreRule make_gauss_legendre(int n);
// Cached 15-point rule used by the adaptive integrators.
const GaussLegendreRule& gauss_legendre_15();

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long evaluations = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-13;
  int max_depth = 48;
};

namespace detail {

template <class F>
double gl_panel(F& f, double a, double b, const GaussLegendreRule& rule, long& evals) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
  evals += static_cast<long>(rule.nodes.size());
  return half * sum;
}

template <class F>
double adapt(F& f, double a, double b, double whole, double tol, int depth,
             const GaussLegendreRule& rule, QuadratureResult& out) {
  const double mid = 0.5 * (a + b);
  const double left = gl_panel(f, a, mid, rule, out.evaluations);
  const double right = gl_panel(f, mid, b, rule, out.evaluations);
  const double refined = left + right;
  const double err = std::abs(refined - whole);
  if (err <= tol || depth <= 0 || mid <= a || mid >= b) {
    out.error_estimate += err;
    return refined;
  }
  return adapt(f, a, mid, left, 0.5 * tol, depth - 1, rule, out) +
         adapt(f, mid, b, right, 0.5 * tol, depth - 1, rule, out);
}

}  // namespace detail

// Adaptive bisection with a fixed 15-point Gauss-Legendre panel. A panel is
// accepted when it agrees with the sum over its two halves. Node placement
// depends only on (a, b) and f, so results are deterministic.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  QuadratureResult out;
  if (a == b) return out;
  const auto& rule = gauss_legendre_15();
  const double whole = detail::gl_panel(f, a, b, rule, out.evaluations);
  const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(whole));
  out.value = detail::adapt(f, a, b, whole, tol, opt.max_depth, rule, out);
  return out;
}

// Integrates piecewise over consecutive breakpoints, so that kinks or jumps of
// f placed at the breakpoints do not degrade the panel rule.
template <class F>
QuadratureResult integrate_pieces(F&& f, std::span<const double> breaks,
                                  const QuadratureOptions& opt = {}) {
  QuadratureResult total;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i] < breaks[i + 1])) continue;
    const auto piece = integrate(f, breaks[i], breaks[i + 1], opt);
    total.value += piece.value;
    total.error_estimate += piece.error_estimate;
    total.evaluations += piece.evaluations;
  }
  return total;
}

}  // namespace vqrate
