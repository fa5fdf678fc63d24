#include "vqrate/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vqrate/errors.hpp"

namespace vqrate::special {

double normal_pdf(double z) noexcept {
  if (std::isinf(z)) return 0.0;
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / kSqrt2); }

double normal_sf(double z) noexcept { return 0.5 * std::erfc(z / kSqrt2); }

double normal_interval(double a, double b) noexcept {
  if (b <= a) return 0.0;
  if (a >= 0.0) return normal_sf(a) - normal_sf(b);
  if (b <= 0.0) return normal_cdf(b) - normal_cdf(a);
  return 1.0 - normal_cdf(a) - normal_sf(b);
}

namespace {

double acklam(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0,1)");
  if (p > 0.5) return -normal_quantile(1.0 - p);  // 1-p is exact for p >= 0.5
  double x = acklam(p);
  for (int it = 0; it < 3; ++it) {
    const double e = normal_cdf(x) - p;
    const double u = e / normal_pdf(x);
    const double step = u / (1.0 + 0.5 * x * u);
    x -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

}  // namespace vqrate::special
