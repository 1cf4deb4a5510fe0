#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ecl/distributions.hpp"
#include "ecl/errors.hpp"
#include "ecl/rng.hpp"

namespace ecl {

enum class CovarianceType { Diagonal, Full };

struct InsufficientFailuresError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Gaussian mixture: weights on the simplex, one SPD covariance block per
/// component (diagonal blocks stored as full matrices with zero
/// off-diagonals). Density is strictly positive everywhere.
struct Gmm {
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;  // k x d
  std::vector<Eigen::MatrixXd> covariances;
  CovarianceType type = CovarianceType::Diagonal;

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(means.cols()); }

  /// validates the simplex/SPD invariants and caches the factorizations
  void finalize() {
    if (std::abs(weights.sum() - 1.0) > 1e-12)
      throw NumericalError("Gmm: weights do not sum to 1");
    if ((weights.array() < 0.0).any()) throw NumericalError("Gmm: negative weight");
    cores_.clear();
    cores_.reserve(covariances.size());
    for (int k = 0; k < components(); ++k)
      cores_.emplace_back(means.row(k).transpose(), covariances[static_cast<std::size_t>(k)]);
  }

  double log_density(const Eigen::VectorXd& x) const {
    double m = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd lp(components());
    for (int k = 0; k < components(); ++k) {
      lp[k] = weights[k] > 0.0 ? std::log(weights[k]) + cores_[static_cast<std::size_t>(k)].log_pdf(x)
                               : -std::numeric_limits<double>::infinity();
      m = std::max(m, lp[k]);
    }
    double s = 0.0;
    for (int k = 0; k < components(); ++k) s += std::exp(lp[k] - m);
    return m + std::log(s);
  }

  double density(const Eigen::VectorXd& x) const { return std::exp(log_density(x)); }

  /// component by weight, then a Gaussian draw through its factor
  Eigen::MatrixXd sample(int n, Rng& rng) const {
    Eigen::MatrixXd out(n, dim());
    for (int i = 0; i < n; ++i) {
      double u = rng.uniform();
      int k = 0;
      double acc = weights[0];
      while (u > acc && k + 1 < components()) acc += weights[++k];
      out.row(i) = cores_[static_cast<std::size_t>(k)].draw(rng).transpose();
    }
    return out;
  }

 private:
  std::vector<MvnCore> cores_;
};

struct GmmFitConfig {
  int max_clusters = 10;
  int cv_folds = 5;
  CovarianceType covariance_type = CovarianceType::Diagonal;
  int restarts = 3;
  int max_iterations = 200;
  double tolerance = 1e-6;  // mean per-point log-likelihood change
  double floor = 1e-6;      // covariance diagonal floor
};

struct GmmFitDiagnostics {
  int selected_clusters = 0;
  std::vector<double> cv_scores;        // mean held-out per-point LL, by k
  std::vector<double> final_ll_trace;   // training LL per EM iteration
  int em_iterations = 0;
  bool converged = false;
};

namespace detail {

inline Eigen::MatrixXd kmeanspp_centers(const Eigen::MatrixXd& x, int k, Rng& rng) {
  const auto n = x.rows();
  Eigen::MatrixXd centers(k, x.cols());
  centers.row(0) = x.row(static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n))));
  Eigen::VectorXd d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (u <= acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

inline void apply_floor(Eigen::MatrixXd& cov, CovarianceType type, double floor) {
  if (type == CovarianceType::Diagonal) {
    for (Eigen::Index j = 0; j < cov.rows(); ++j) cov(j, j) = std::max(cov(j, j), floor);
  } else {
    cov.diagonal().array() += floor;
  }
}

/// EM for a fixed component count; returns the fitted mixture and the
/// training log-likelihood trajectory (non-decreasing up to roundoff).
inline Gmm em_fit(const Eigen::MatrixXd& x, int k, const GmmFitConfig& cfg, Rng& rng,
                  std::vector<double>* ll_trace = nullptr, bool* converged = nullptr) {
  const auto n = x.rows();
  const auto d = x.cols();

  Gmm g;
  g.type = cfg.covariance_type;
  g.means = kmeanspp_centers(x, k, rng);
  g.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
  // global scatter as the starting covariance
  Eigen::RowVectorXd mean0 = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mean0;
  Eigen::MatrixXd cov0 = (centered.transpose() * centered) / static_cast<double>(n);
  if (cfg.covariance_type == CovarianceType::Diagonal) {
    Eigen::VectorXd v = cov0.diagonal();
    cov0 = v.asDiagonal();
  }
  apply_floor(cov0, cfg.covariance_type, cfg.floor);
  g.covariances.assign(static_cast<std::size_t>(k), cov0);
  g.finalize();

  Eigen::MatrixXd log_resp(n, k);
  double prev_mean_ll = -std::numeric_limits<double>::infinity();
  if (converged) *converged = false;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    // E step
    for (int c = 0; c < k; ++c) {
      MvnCore core(g.means.row(c).transpose(), g.covariances[static_cast<std::size_t>(c)]);
      const double lw = g.weights[c] > 0.0 ? std::log(g.weights[c])
                                           : -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n; ++i)
        log_resp(i, c) = lw + core.log_pdf(x.row(i).transpose());
    }
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = log_resp.row(i).maxCoeff();
      const double s = (log_resp.row(i).array() - m).exp().sum();
      const double norm = m + std::log(s);
      ll += norm;
      log_resp.row(i) = (log_resp.row(i).array() - norm).exp();
    }
    if (ll_trace) ll_trace->push_back(ll);

    // M step (log_resp now holds responsibilities)
    for (int c = 0; c < k; ++c) {
      const double nk = std::max(log_resp.col(c).sum(), 1e-12);
      g.weights[c] = nk / static_cast<double>(n);
      Eigen::RowVectorXd mu = (log_resp.col(c).transpose() * x) / nk;
      g.means.row(c) = mu;
      Eigen::MatrixXd xc = x.rowwise() - mu;
      Eigen::MatrixXd cov;
      if (cfg.covariance_type == CovarianceType::Diagonal) {
        Eigen::ArrayXXd sq = xc.array().square().colwise() * log_resp.col(c).array();
        Eigen::VectorXd var = sq.colwise().sum().matrix().transpose() / nk;
        cov = var.asDiagonal();
      } else {
        cov = (xc.transpose() * (log_resp.col(c).asDiagonal() * xc)) / nk;
      }
      apply_floor(cov, cfg.covariance_type, cfg.floor);
      g.covariances[static_cast<std::size_t>(c)] = cov;
    }
    g.weights /= g.weights.sum();  // keep the simplex exact

    const double mean_ll = ll / static_cast<double>(n);
    if (std::abs(mean_ll - prev_mean_ll) <= cfg.tolerance) {
      if (converged) *converged = true;
      break;
    }
    prev_mean_ll = mean_ll;
  }
  g.finalize();
  if (ll_trace) {
    // trace entries are LLs of the parameters entering each E step; close
    // it with the LL of the returned parameters
    double final_ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) final_ll += g.log_density(x.row(i).transpose());
    ll_trace->push_back(final_ll);
  }
  return g;
}

inline double mean_log_likelihood(const Gmm& g, const Eigen::MatrixXd& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) s += g.log_density(x.row(i).transpose());
  return s / static_cast<double>(x.rows());
}

inline Gmm em_fit_restarts(const Eigen::MatrixXd& x, int k, const GmmFitConfig& cfg, Rng& rng,
                           std::vector<double>* ll_trace = nullptr, bool* converged = nullptr) {
  Gmm best;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<double> trace;
    bool conv = false;
    Gmm g = em_fit(x, k, cfg, rng, &trace, &conv);
    const double ll = trace.back();
    if (ll > best_ll) {
      best_ll = ll;
      best = std::move(g);
      if (ll_trace) *ll_trace = std::move(trace);
      if (converged) *converged = conv;
    }
  }
  return best;
}

}  // namespace detail

/// Mixture fit with the component count chosen by cross-validated held-out
/// log-likelihood: k ranges over 1..min(max_clusters, n/2), each candidate
/// is scored by the mean held-out per-point log-likelihood across folds,
/// and the winner is refit on all points.
inline Gmm fit_gmm(const Eigen::MatrixXd& points, const GmmFitConfig& cfg, Rng& rng,
                   GmmFitDiagnostics* diag = nullptr) {
  const auto n = points.rows();
  if (n < 2) throw InsufficientFailuresError("fit_gmm: needs at least 2 points");
  if (cfg.max_clusters < 1) throw ConfigError("fit_gmm: max_clusters must be >= 1");

  int k_max = std::min<int>(cfg.max_clusters, static_cast<int>(n / 2));
  // spread below the regularization floor cannot support multiple components
  Eigen::RowVectorXd mean0 = points.colwise().mean();
  if ((points.rowwise() - mean0).array().square().colwise().mean().maxCoeff() <= cfg.floor)
    k_max = 1;
  int selected = 1;
  if (diag) diag->cv_scores.clear();

  if (k_max > 1) {
    const int folds = std::min<int>(cfg.cv_folds, static_cast<int>(n));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (Eigen::Index i = n - 1; i > 0; --i)
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(rng.index(static_cast<std::uint64_t>(i) + 1))]);

    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= k_max; ++k) {
      double score = 0.0;
      int used_folds = 0;
      for (int f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> train, held;
        for (Eigen::Index i = 0; i < n; ++i)
          (static_cast<int>(i) % folds == f ? held : train).push_back(order[static_cast<std::size_t>(i)]);
        if (static_cast<int>(train.size()) < std::max(2, k) || held.empty()) continue;
        Eigen::MatrixXd xt(train.size(), points.cols()), xh(held.size(), points.cols());
        for (std::size_t i = 0; i < train.size(); ++i) xt.row(static_cast<Eigen::Index>(i)) = points.row(train[i]);
        for (std::size_t i = 0; i < held.size(); ++i) xh.row(static_cast<Eigen::Index>(i)) = points.row(held[i]);
        Gmm g = detail::em_fit_restarts(xt, k, cfg, rng);
        score += detail::mean_log_likelihood(g, xh);
        ++used_folds;
      }
      score = used_folds > 0 ? score / used_folds : -std::numeric_limits<double>::infinity();
      if (diag) diag->cv_scores.push_back(score);
      if (score > best_score) {
        best_score = score;
        selected = k;
      }
    }
  }

  std::vector<double> trace;
  bool conv = false;
  Gmm g = detail::em_fit_restarts(points, selected, cfg, rng, &trace, &conv);
  if (diag) {
    diag->selected_clusters = selected;
    diag->final_ll_trace = std::move(trace);
    diag->em_iterations = static_cast<int>(diag->final_ll_trace.size());
    diag->converged = conv;
  }
  return g;
}

}  // namespace ecl
