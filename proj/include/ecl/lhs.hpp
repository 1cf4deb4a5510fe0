#pragma once

#include <Eigen/Dense>
#include <numeric>
#include <vector>

#include "ecl/errors.hpp"
#include "ecl/rng.hpp"

namespace ecl {

/// Latin hypercube sample on [0,1)^d: each column places exactly one point
/// in each of the n equal-width strata, jittered uniformly inside the
/// stratum, with an independent stratum permutation per column.
inline Eigen::MatrixXd latin_hypercube(int n, int d, Rng& rng) {
  if (n < 1 || d < 1) throw ConfigError("latin_hypercube: n and d must be >= 1");
  Eigen::MatrixXd design(n, d);
  std::vector<int> perm(n);
  for (int j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[i], perm[static_cast<int>(rng.index(static_cast<std::uint64_t>(i) + 1))]);
    for (int i = 0; i < n; ++i)
      design(i, j) = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
  }
  return design;
}

}  // namespace ecl
