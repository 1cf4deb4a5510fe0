#pragma once

#include <cmath>

#include "ecl/limit_state.hpp"
#include "ecl/math.hpp"

namespace ecl {

/// Binary entropy (nats) of the surrogate's pass/fail classification at a
/// point with Gaussian prediction (mean, sd):
///   H = -p log p - (1-p) log(1-p),  p = Phi((mean - T)/sd),  0 log 0 := 0.
///
/// Evaluated through the smaller tail q = Phi(-|z|), which makes it exact
/// under reflection (mean -> 2T - mean) and under flipping the limit-state
/// direction, and keeps the far tail finite: q underflows gracefully to 0
/// (entropy 0) instead of producing log(0) artifacts. Well beyond |z| = 37
/// the result is still finite and monotone.
inline double contour_entropy(double mean, double sd, const LimitState& limit) {
  if (sd < 0.0) throw std::domain_error("contour_entropy: sd must be >= 0");
  if (sd == 0.0) return mean == limit.threshold ? std::log(2.0) : 0.0;
  const double z = std::abs(mean - limit.threshold) / sd;
  const double q = 0.5 * std::erfc(z / kSqrt2);
  if (q <= 0.0) return 0.0;
  return -q * std::log(q) - (1.0 - q) * std::log1p(-q);
}

}  // namespace ecl
