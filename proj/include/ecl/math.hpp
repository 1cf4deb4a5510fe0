#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecl {

inline constexpr double kLog2Pi = 1.8378770664093454836;
inline constexpr double kSqrt2 = 1.4142135623730950488;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

/// Standard normal CDF. erfc-based, accurate into the far lower tail
/// (underflows to 0 only past z ~ -38.5).
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

/// log Phi(z). erfc carries the tail without cancellation down to where it
/// underflows; below that an asymptotic expansion of the Mills ratio takes
/// over, so the result is finite for any finite z.
inline double log_normal_cdf(double z) {
  if (z > -37.0) {
    double p = normal_cdf(z);
    if (p > 0.0) return std::log(p);
  }
  // Phi(z) ~ phi(z)/|z| * (1 - 1/z^2 + 3/z^4 - 15/z^6), z << 0
  const double zz = z * z;
  const double series = 1.0 - 1.0 / zz + 3.0 / (zz * zz) - 15.0 / (zz * zz * zz);
  return -0.5 * zz - 0.5 * kLog2Pi - std::log(-z) + std::log(series);
}

/// Inverse standard normal CDF: Acklam's rational approximation (|rel err|
/// < 1.2e-9) polished with one Halley step.
inline double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw std::domain_error("normal_quantile: p outside [0,1]");
  }
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement
  double e = normal_cdf(x) - p;
  double u = e / normal_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace ecl
