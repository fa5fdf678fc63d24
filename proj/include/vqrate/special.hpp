#pragma once

namespace vqrate::special {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kSqrt2 = 1.41421356237309504880168872421;

double normal_pdf(double z) noexcept;
// Lower and upper tail probabilities of N(0,1), each accurate in its own tail.
double normal_cdf(double z) noexcept;
double normal_sf(double z) noexcept;
// P(a < Z <= b), computed on the side of zero that avoids cancellation.
double normal_interval(double a, double b) noexcept;
// Inverse of normal_cdf on (0,1); Acklam's rational start plus Halley refinement.
double normal_quantile(double p);

}  // namespace vqrate::special
