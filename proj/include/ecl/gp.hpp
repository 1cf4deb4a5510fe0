#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <utility>

#include "ecl/box_lbfgs.hpp"
#include "ecl/dataset.hpp"
#include "ecl/errors.hpp"
#include "ecl/kernel.hpp"
#include "ecl/lhs.hpp"
#include "ecl/math.hpp"
#include "ecl/rng.hpp"

namespace ecl {

struct FitConfig {
  int restarts = 5;
  double lengthscale_lo = 1e-2;  // bounds in unit-cube coordinates
  double lengthscale_hi = 10.0;
  double scale_lo = 1e-2;
  double scale_hi = 1e2;
  double jitter = 1e-6;
  int max_iterations = 200;
};

struct PredictiveDist {
  Eigen::VectorXd mean;  // original output units
  Eigen::VectorXd sd;    // nonnegative, original output units
  bool out_of_bounds = false;
};

/// mean + delta * sd, elementwise
inline Eigen::VectorXd ucb(const PredictiveDist& dist, double delta) {
  if (delta < 0.0) throw std::domain_error("ucb: delta must be >= 0");
  return dist.mean + delta * dist.sd;
}

namespace detail {

struct Standardization {
  double mean = 0.0;
  double sd = 1.0;
};

inline Standardization standardize_stats(const Eigen::VectorXd& y) {
  Standardization s;
  s.mean = y.mean();
  if (y.size() > 1) {
    const double var = (y.array() - s.mean).square().sum() / static_cast<double>(y.size() - 1);
    s.sd = std::sqrt(var);
  }
  if (!(s.sd > 1e-12)) s.sd = 1.0;
  return s;
}

/// MVN log-likelihood of standardized outputs under the jittered kernel
/// covariance, on the log-parameter vector psi = (log theta_1..d, log tau2).
/// Returns -inf when the factorization fails. Gradient via
/// dL/dpsi = 0.5 tr((aa' - K^-1) dK/dpsi).
inline double loglik_logparams(const PairwiseSq& sq, const Eigen::VectorXd& y,
                               KernelFamily family, double jitter, const Eigen::VectorXd& psi,
                               Eigen::VectorXd* grad) {
  const auto d = static_cast<Eigen::Index>(sq.d2.size());
  const auto n = y.size();
  KernelSpec k;
  k.family = family;
  k.lengthscales = psi.head(d).array().exp().matrix();
  k.scale = std::exp(psi[d]);
  k.jitter = jitter;

  KernelMatrix km = build_covariance(sq, k);
  Eigen::LLT<Eigen::MatrixXd> llt(km.K);
  if (llt.info() != Eigen::Success) {
    if (grad) grad->setZero(d + 1);
    return -std::numeric_limits<double>::infinity();
  }
  Eigen::VectorXd alpha = llt.solve(y);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double ll = -0.5 * y.dot(alpha) - 0.5 * logdet - 0.5 * static_cast<double>(n) * kLog2Pi;

  if (grad) {
    grad->resize(d + 1);
    Eigen::MatrixXd w = alpha * alpha.transpose();
    w -= llt.solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd kk = km.K;
    kk.diagonal().array() -= jitter;  // pure kernel part
    (*grad)[d] = 0.5 * w.cwiseProduct(kk).sum();
    if (family == KernelFamily::SquaredExponential) {
      Eigen::MatrixXd m = w.cwiseProduct(kk);
      for (Eigen::Index j = 0; j < d; ++j)
        (*grad)[j] = 0.5 * m.cwiseProduct(sq.d2[static_cast<std::size_t>(j)]).sum() /
                     (k.lengthscales[j] * k.lengthscales[j]);
    } else {
      Eigen::MatrixXd me = w.cwiseProduct(km.E);
      for (Eigen::Index j = 0; j < d; ++j)
        (*grad)[j] = 1.5 * k.scale *
                     me.cwiseProduct(sq.d2[static_cast<std::size_t>(j)]).sum() /
                     (k.lengthscales[j] * k.lengthscales[j]);
    }
  }
  return ll;
}

}  // namespace detail

/// Zero-mean GP surrogate. Inputs live on the unit cube (scaled through the
/// dataset bounds), outputs are standardized; predictions are returned in
/// original units. Immutable once constructed.
class GpModel {
 public:
  GpModel() = default;  // empty; assign from fit()/with_kernel()

  /// Model with given hyperparameters. Escalates jitter x10 (up to 1e-3)
  /// if the covariance factorization fails at the requested value.
  static GpModel with_kernel(Dataset data, KernelSpec kernel) {
    kernel.check();
    GpModel m;
    m.data_ = std::move(data);
    m.x_unit_ = m.data_.bounds.to_unit_rows(m.data_.inputs);
    m.std_ = detail::standardize_stats(m.data_.outputs);
    m.y_std_ = (m.data_.outputs.array() - m.std_.mean) / m.std_.sd;
    m.kernel_ = std::move(kernel);
    m.factorize();
    return m;
  }

  /// Maximum-likelihood hyperparameters: multi-start projected L-BFGS on
  /// (log lengthscales, log scale), restart points from an LHS over the
  /// log-bounds. Deterministic for a given stream.
  static GpModel fit(const Dataset& data, KernelFamily family, const FitConfig& cfg, Rng& rng) {
    if (data.size() < 2) throw ConfigError("GpModel::fit: needs at least 2 observations");
    const int d = data.dim();
    const Eigen::MatrixXd x_unit = data.bounds.to_unit_rows(data.inputs);
    const auto std_stats = detail::standardize_stats(data.outputs);
    const Eigen::VectorXd y = (data.outputs.array() - std_stats.mean) / std_stats.sd;
    const detail::PairwiseSq sq(x_unit);

    Eigen::VectorXd lo(d + 1), hi(d + 1);
    lo.head(d).setConstant(std::log(cfg.lengthscale_lo));
    hi.head(d).setConstant(std::log(cfg.lengthscale_hi));
    lo[d] = std::log(cfg.scale_lo);
    hi[d] = std::log(cfg.scale_hi);

    auto objective = [&](const Eigen::VectorXd& psi, Eigen::VectorXd* grad) {
      return detail::loglik_logparams(sq, y, family, cfg.jitter, psi, grad);
    };

    BoxOptimOptions opts;
    opts.max_iterations = cfg.max_iterations;
    opts.grad_tolerance = 1e-6;

    const Eigen::MatrixXd starts = latin_hypercube(cfg.restarts, d + 1, rng);
    double best = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_psi = 0.5 * (lo + hi);
    for (int r = 0; r < cfg.restarts; ++r) {
      Eigen::VectorXd psi0 =
          lo + starts.row(r).transpose().cwiseProduct(hi - lo);
      BoxOptimResult res = maximize_box(objective, std::move(psi0), lo, hi, opts);
      if (res.value > best) {
        best = res.value;
        best_psi = res.x;
      }
    }
    if (!std::isfinite(best))
      throw NumericalError("GpModel::fit: likelihood not finite at any restart");

    KernelSpec k;
    k.family = family;
    k.lengthscales = best_psi.head(d).array().exp().matrix();
    k.scale = std::exp(best_psi[d]);
    k.jitter = cfg.jitter;
    return with_kernel(data, std::move(k));
  }

  const Dataset& data() const { return data_; }
  const Bounds& bounds() const { return data_.bounds; }
  const KernelSpec& kernel() const { return kernel_; }
  const Eigen::MatrixXd& unit_inputs() const { return x_unit_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double output_mean() const { return std_.mean; }
  double output_sd() const { return std_.sd; }
  int dim() const { return data_.dim(); }
  int size() const { return data_.size(); }

  /// Pointwise predictive mean and standard deviation (Gaussian posterior)
  /// at queries in original units. Out-of-bounds queries are allowed and
  /// flagged.
  PredictiveDist predict(const Eigen::MatrixXd& queries) const {
    PredictiveDist out;
    out.mean.resize(queries.rows());
    out.sd.resize(queries.rows());
    for (Eigen::Index i = 0; i < queries.rows(); ++i)
      if (!data_.bounds.contains(queries.row(i).transpose())) {
        out.out_of_bounds = true;
        break;
      }
    const Eigen::Index block = 8192;
    for (Eigen::Index start = 0; start < queries.rows(); start += block) {
      const Eigen::Index m = std::min(block, queries.rows() - start);
      const Eigen::MatrixXd qu = data_.bounds.to_unit_rows(queries.middleRows(start, m));
      Eigen::MatrixXd kx = detail::cross_covariance(kernel_, qu, x_unit_);  // m x n
      out.mean.segment(start, m) =
          (std_.mean + (std_.sd * (kx * alpha_).array())).matrix();
      Eigen::MatrixXd v = chol_.triangularView<Eigen::Lower>().solve(kx.transpose());
      Eigen::ArrayXd var = kernel_.scale - v.colwise().squaredNorm().transpose().array();
      out.sd.segment(start, m) = (std_.sd * var.max(0.0).sqrt()).matrix();
    }
    return out;
  }

  /// predictive mean only (skips the O(N^2)-per-query variance solve)
  Eigen::VectorXd predict_mean(const Eigen::MatrixXd& queries) const {
    Eigen::VectorXd mean(queries.rows());
    const Eigen::Index block = 8192;
    for (Eigen::Index start = 0; start < queries.rows(); start += block) {
      const Eigen::Index m = std::min(block, queries.rows() - start);
      const Eigen::MatrixXd qu = data_.bounds.to_unit_rows(queries.middleRows(start, m));
      Eigen::MatrixXd kx = detail::cross_covariance(kernel_, qu, x_unit_);
      mean.segment(start, m) = (std_.mean + (std_.sd * (kx * alpha_).array())).matrix();
    }
    return mean;
  }

  /// single unit-coordinate query; returns (mean, sd) in original units
  std::pair<double, double> predict_point_unit(const Eigen::VectorXd& u) const {
    Eigen::VectorXd kx = detail::cross_covariance(kernel_, u.transpose(), x_unit_).transpose();
    const double mean = std_.mean + std_.sd * kx.dot(alpha_);
    Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kx);
    const double var = std::max(0.0, kernel_.scale - v.squaredNorm());
    return {mean, std_.sd * std::sqrt(var)};
  }

 private:
  friend class AugmentedGp;

  void factorize() {
    const detail::PairwiseSq sq(x_unit_);
    for (;;) {
      detail::KernelMatrix km = detail::build_covariance(sq, kernel_);
      Eigen::LLT<Eigen::MatrixXd> llt(km.K);
      if (llt.info() == Eigen::Success) {
        chol_ = llt.matrixL();
        alpha_ = llt.solve(y_std_);
        return;
      }
      if (kernel_.jitter >= 1e-3)
        throw NumericalError(
            "GpModel: covariance factorization failed with jitter escalated to " +
            std::to_string(kernel_.jitter) + " (N=" + std::to_string(data_.size()) + ")");
      kernel_.jitter = kernel_.jitter > 0.0 ? kernel_.jitter * 10.0 : 1e-6;
    }
  }

  Dataset data_;
  Eigen::MatrixXd x_unit_;
  Eigen::VectorXd y_std_;
  detail::Standardization std_;
  KernelSpec kernel_;
  Eigen::MatrixXd chol_;   // lower factor of K + jitter I
  Eigen::VectorXd alpha_;  // (K + jitter I)^-1 y_std
};

/// MVN log-likelihood of a dataset (outputs standardized as in fit) under
/// a fixed kernel, including the jitter term.
inline double log_likelihood(const Dataset& data, const KernelSpec& kernel) {
  kernel.check();
  const Eigen::MatrixXd x_unit = data.bounds.to_unit_rows(data.inputs);
  const auto s = detail::standardize_stats(data.outputs);
  const Eigen::VectorXd y = (data.outputs.array() - s.mean) / s.sd;
  const detail::PairwiseSq sq(x_unit);
  detail::KernelMatrix km = detail::build_covariance(sq, kernel);
  Eigen::LLT<Eigen::MatrixXd> llt(km.K);
  if (llt.info() != Eigen::Success)
    throw NumericalError("log_likelihood: covariance not positive definite");
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * y.dot(llt.solve(y)) - 0.5 * logdet -
         0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

/// Design augmented with response-free points: the predictive mean is the
/// base model's (reused verbatim), while the variance conditions on the
/// enlarged design through an incrementally extended Cholesky factor.
/// Each extension costs O((N + n_pending)^2).
class AugmentedGp {
 public:
  explicit AugmentedGp(const GpModel& base)
      : base_(std::make_shared<GpModel>(base)), x_all_(base.unit_inputs()), chol_(base.chol()) {}
  explicit AugmentedGp(std::shared_ptr<const GpModel> base)
      : base_(std::move(base)), x_all_(base_->unit_inputs()), chol_(base_->chol()) {}

  const GpModel& base() const { return *base_; }
  int n_pending() const { return n_pending_; }
  const Eigen::MatrixXd& unit_inputs() const { return x_all_; }
  const Bounds& bounds() const { return base_->bounds(); }
  int dim() const { return base_->dim(); }

  /// new value with one more pending design point (unit coordinates)
  AugmentedGp with_point_unit(const Eigen::VectorXd& u) const {
    if (min_scaled_distance(x_all_, u) <= 1e-8)
      throw DuplicatePointError("augment: point within 1e-8 of an existing design point");
    AugmentedGp out = *this;
    const auto n = out.x_all_.rows();
    const KernelSpec& k = base_->kernel();
    Eigen::VectorXd kx = detail::cross_covariance(k, u.transpose(), out.x_all_).transpose();
    Eigen::VectorXd l = out.chol_.triangularView<Eigen::Lower>().solve(kx);
    const double d2 = k.scale + k.jitter - l.squaredNorm();
    if (!(d2 > 0.0)) throw NumericalError("augment: extended covariance lost definiteness");

    Eigen::MatrixXd grown(n + 1, n + 1);
    grown.setZero();
    grown.topLeftCorner(n, n) = out.chol_;
    grown.block(n, 0, 1, n) = l.transpose();
    grown(n, n) = std::sqrt(d2);
    out.chol_ = std::move(grown);

    out.x_all_.conservativeResize(n + 1, Eigen::NoChange);
    out.x_all_.row(n) = u.transpose();
    ++out.n_pending_;
    return out;
  }

  std::pair<double, double> predict_point_unit(const Eigen::VectorXd& u) const {
    const double mean = base_->predict_point_unit(u).first;
    Eigen::VectorXd kx =
        detail::cross_covariance(base_->kernel(), u.transpose(), x_all_).transpose();
    Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kx);
    const double var = std::max(0.0, base_->kernel().scale - v.squaredNorm());
    return {mean, base_->output_sd() * std::sqrt(var)};
  }

  PredictiveDist predict(const Eigen::MatrixXd& queries) const {
    PredictiveDist base_dist = base_->predict(queries);
    PredictiveDist out;
    out.mean = std::move(base_dist.mean);
    out.out_of_bounds = base_dist.out_of_bounds;
    out.sd.resize(queries.rows());
    const Eigen::MatrixXd qu = base_->bounds().to_unit_rows(queries);
    Eigen::MatrixXd kx = detail::cross_covariance(base_->kernel(), qu, x_all_);
    Eigen::MatrixXd v = chol_.triangularView<Eigen::Lower>().solve(kx.transpose());
    Eigen::ArrayXd var = base_->kernel().scale - v.colwise().squaredNorm().transpose().array();
    out.sd = (base_->output_sd() * var.max(0.0).sqrt()).matrix();
    return out;
  }

 private:
  std::shared_ptr<const GpModel> base_;
  Eigen::MatrixXd x_all_;  // base design plus pending rows, unit coordinates
  Eigen::MatrixXd chol_;   // lower factor over x_all_ with jitter
  int n_pending_ = 0;
};

/// x_new in original units, validated against bounds
inline AugmentedGp augment(const GpModel& model, const Eigen::VectorXd& x_new) {
  if (!model.bounds().contains(x_new, 1e-12))
    throw ConfigError("augment: point outside bounds");
  return AugmentedGp(model).with_point_unit(model.bounds().to_unit(x_new));
}

inline AugmentedGp augment(const AugmentedGp& model, const Eigen::VectorXd& x_new) {
  if (!model.bounds().contains(x_new, 1e-12))
    throw ConfigError("augment: point outside bounds");
  return model.with_point_unit(model.bounds().to_unit(x_new));
}

}  // namespace ecl
