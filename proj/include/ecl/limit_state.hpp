#pragma once

#include "ecl/errors.hpp"

namespace ecl {

/// Signed failure margin g(y) = direction * (y - threshold); failure when
/// g(y) > 0. direction = +1 flags high responses, -1 flags low ones.
struct LimitState {
  double threshold = 0.0;
  int direction = +1;

  LimitState() = default;
  LimitState(double threshold_, int direction_) : threshold(threshold_), direction(direction_) {
    if (direction != 1 && direction != -1) throw ConfigError("LimitState: direction must be +1 or -1");
  }

  double margin(double y) const { return direction * (y - threshold); }
  bool is_failure(double y) const { return margin(y) > 0.0; }
};

}  // namespace ecl
