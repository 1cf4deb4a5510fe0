#pragma once

#include <Eigen/Dense>

#include "ecl/errors.hpp"
#include "ecl/limit_state.hpp"

namespace ecl {

struct McEstimate {
  double alpha_hat = 0.0;
  double variance = 0.0;  // alpha_hat * (1 - alpha_hat) / n
  long long n_samples = 0;
  long long n_failures = 0;
};

inline McEstimate mc_from_counts(long long n_failures, long long n_total) {
  if (n_total <= 0) throw std::domain_error("mc estimate: n_total must be positive");
  McEstimate e;
  e.n_samples = n_total;
  e.n_failures = n_failures;
  e.alpha_hat = static_cast<double>(n_failures) / static_cast<double>(n_total);
  e.variance = e.alpha_hat * (1.0 - e.alpha_hat) / static_cast<double>(n_total);
  return e;
}

/// Direct Monte Carlo failure-probability estimate from responses at iid
/// nominal draws.
inline McEstimate mc_failure(const Eigen::VectorXd& values, const LimitState& limit,
                             long long n_total) {
  if (n_total != values.size())
    throw std::domain_error("mc_failure: n_total must equal the number of values");
  long long fails = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (limit.is_failure(values[i])) ++fails;
  return mc_from_counts(fails, n_total);
}

/// Chunk-wise accumulator for streaming MC runs over large M.
class StreamingMc {
 public:
  void add(const Eigen::VectorXd& values, const LimitState& limit) {
    for (Eigen::Index i = 0; i < values.size(); ++i)
      if (limit.is_failure(values[i])) ++fails_;
    total_ += values.size();
  }
  McEstimate estimate() const { return mc_from_counts(fails_, total_); }
  long long total() const { return total_; }

 private:
  long long fails_ = 0;
  long long total_ = 0;
};

}  // namespace ecl
