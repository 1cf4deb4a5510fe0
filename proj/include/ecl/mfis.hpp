#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "ecl/design.hpp"
#include "ecl/distributions.hpp"
#include "ecl/errors.hpp"
#include "ecl/gmm.hpp"
#include "ecl/gp.hpp"
#include "ecl/limit_state.hpp"
#include "ecl/montecarlo.hpp"
#include "ecl/rng.hpp"

namespace ecl {

struct MfisConfig {
  long long m_surrogate = 0;  // surrogate classification samples (M)
  int m_star = 0;             // high-fidelity budget (M*)
  int max_clusters = 10;
  int cv_folds = 5;
  CovarianceType covariance_type = CovarianceType::Diagonal;
  double classifier_delta = 0.0;  // 0 = mean surface, 1.645 = 95% bound

  void validate() const {
    if (m_star < 1) throw ConfigError("MfisConfig: m_star must be >= 1");
    if (m_surrogate < m_star) throw ConfigError("MfisConfig: m_surrogate must be >= m_star");
    if (max_clusters < 1) throw ConfigError("MfisConfig: max_clusters must be >= 1");
    if (cv_folds < 2) throw ConfigError("MfisConfig: cv_folds must be >= 2");
  }
};

/// Rows of x whose direction-aware confidence bound crosses the threshold:
/// failure flagged when a*(mean - T) + delta*sd > 0, i.e. the delta*sd
/// margin is always applied toward the failure side.
inline Eigen::MatrixXd classify_failures(const GpModel& model, const Eigen::MatrixXd& x,
                                         const LimitState& limit, double delta) {
  if (delta < 0.0) throw std::domain_error("classify_failures: delta must be >= 0");
  std::vector<Eigen::Index> keep;
  if (delta == 0.0) {
    Eigen::VectorXd mean = model.predict_mean(x);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (limit.is_failure(mean[i])) keep.push_back(i);
  } else {
    PredictiveDist dist = model.predict(x);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (limit.margin(dist.mean[i]) + delta * dist.sd[i] > 0.0) keep.push_back(i);
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(keep.size()), x.cols());
  for (std::size_t i = 0; i < keep.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = x.row(keep[i]);
  return out;
}

/// Gaussian-mixture bias distribution fitted in unit-cube coordinates with
/// densities Jacobian-corrected back to original units, so it is directly
/// comparable with the nominal input density.
struct BiasDistribution {
  Gmm mixture;     // over scaling-mapped (unit) coordinates
  Bounds scaling;  // coordinate record; lo=0/hi=1 makes this a plain mixture

  double log_density(const Eigen::VectorXd& x) const {
    return mixture.log_density(scaling.to_unit(x)) - log_jacobian();
  }
  double density(const Eigen::VectorXd& x) const { return std::exp(log_density(x)); }

  Eigen::MatrixXd sample(int n, Rng& rng) const {
    return scaling.from_unit_rows(mixture.sample(n, rng));
  }

  double log_jacobian() const { return (scaling.hi - scaling.lo).array().log().sum(); }
};

struct MfisEstimate {
  double alpha_hat = 0.0;
  double std_error = 0.0;  // sample sd of the weighted indicators / sqrt(M*)
  double ci_lo = 0.0;      // 95% normal interval, clamped at 0
  double ci_hi = 0.0;
  long long n_failures_observed = 0;
  double max_weight = 0.0;
  bool no_failures = false;
};

/// Importance-sampling estimate from high-fidelity responses at draws from
/// the bias distribution; weights are nominal/bias density ratios.
inline MfisEstimate mfis_estimate(const Eigen::VectorXd& sim_values, const Eigen::MatrixXd& xstar,
                                  const InputDistribution& nominal, const BiasDistribution& bias,
                                  const LimitState& limit) {
  const auto m = sim_values.size();
  if (m < 1 || xstar.rows() != m) throw ConfigError("mfis_estimate: values/inputs mismatch");
  Eigen::VectorXd terms(m);
  MfisEstimate out;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double log_fstar = bias.log_density(xstar.row(i).transpose());
    if (!std::isfinite(log_fstar))
      throw NumericalError("mfis_estimate: bias density vanished at a sample (support violation)");
    const double log_f = nominal.log_density(xstar.row(i).transpose());
    const double w = std::isfinite(log_f) ? std::exp(log_f - log_fstar) : 0.0;
    out.max_weight = std::max(out.max_weight, w);
    if (limit.is_failure(sim_values[i])) {
      terms[i] = w;
      ++out.n_failures_observed;
    } else {
      terms[i] = 0.0;
    }
  }
  out.alpha_hat = terms.sum() / static_cast<double>(m);
  if (m > 1) {
    const double var = (terms.array() - out.alpha_hat).square().sum() / static_cast<double>(m - 1);
    out.std_error = std::sqrt(var / static_cast<double>(m));
  }
  out.ci_lo = std::max(0.0, out.alpha_hat - 1.96 * out.std_error);
  out.ci_hi = out.alpha_hat + 1.96 * out.std_error;
  out.no_failures = out.n_failures_observed == 0;
  return out;
}

struct MfisRunResult {
  MfisEstimate estimate;
  std::optional<BiasDistribution> bias;
  long long n_classified = 0;   // surrogate-predicted failures among M
  int selected_clusters = 0;
  bool zero_failure_path = false;  // too few predicted failures to fit a bias
};

/// Full multifidelity importance-sampling pass: classify M nominal draws
/// with the surrogate, fit the mixture bias on the predicted failures,
/// draw and evaluate the M* high-fidelity samples, reweight. Fewer than 2
/// predicted failures short-circuits to a flagged zero estimate.
inline MfisRunResult run_mfis(const Simulator& truth, const GpModel& model,
                              const InputDistribution& nominal, const LimitState& limit,
                              const MfisConfig& cfg, std::uint64_t seed,
                              std::uint64_t repetition = 0) {
  cfg.validate();
  MfisRunResult out;

  Rng sample_rng = substream(seed, {repetition, 0, stream::kSurrogateSamples});
  std::vector<Eigen::MatrixXd> failure_blocks;
  const long long chunk = 65536;
  for (long long done = 0; done < cfg.m_surrogate; done += chunk) {
    const int m = static_cast<int>(std::min(chunk, cfg.m_surrogate - done));
    Eigen::MatrixXd x = nominal.sample(m, sample_rng);
    Eigen::MatrixXd fails = classify_failures(model, x, limit, cfg.classifier_delta);
    if (fails.rows() > 0) failure_blocks.push_back(std::move(fails));
  }
  long long n_fail = 0;
  for (const auto& b : failure_blocks) n_fail += b.rows();
  out.n_classified = n_fail;

  if (n_fail < 2) {
    out.zero_failure_path = true;
    out.estimate.no_failures = true;
    return out;  // alpha_hat = 0 with the warning flag
  }

  Eigen::MatrixXd failures(n_fail, model.dim());
  Eigen::Index at = 0;
  for (const auto& b : failure_blocks) {
    failures.middleRows(at, b.rows()) = b;
    at += b.rows();
  }

  GmmFitConfig gmm_cfg;
  gmm_cfg.max_clusters = cfg.max_clusters;
  gmm_cfg.cv_folds = cfg.cv_folds;
  gmm_cfg.covariance_type = cfg.covariance_type;
  GmmFitDiagnostics diag;
  Rng gmm_rng = substream(seed, {repetition, 0, stream::kBiasFit});
  BiasDistribution bias;
  bias.scaling = model.bounds();
  bias.mixture = fit_gmm(model.bounds().to_unit_rows(failures), gmm_cfg, gmm_rng, &diag);
  out.selected_clusters = diag.selected_clusters;

  Rng star_rng = substream(seed, {repetition, 0, stream::kBiasSamples});
  Eigen::MatrixXd xstar = bias.sample(cfg.m_star, star_rng);
  Eigen::VectorXd ystar = detail::evaluate_simulator(truth, xstar);

  out.estimate = mfis_estimate(ystar, xstar, nominal, bias, limit);
  out.bias = std::move(bias);
  return out;
}

}  // namespace ecl
