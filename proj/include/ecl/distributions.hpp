#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <variant>
#include <vector>

#include "ecl/dataset.hpp"
#include "ecl/errors.hpp"
#include "ecl/math.hpp"
#include "ecl/rng.hpp"

namespace ecl {

struct UniformMarginal {
  double lo, hi;
};

/// Normal(mean, sd) truncated to [lo, hi]; lo/hi may be infinite.
struct TruncatedNormalMarginal {
  double mean, sd;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

using Marginal = std::variant<UniformMarginal, TruncatedNormalMarginal>;

namespace detail {

inline void check_marginal(const Marginal& m) {
  if (const auto* u = std::get_if<UniformMarginal>(&m)) {
    if (!(u->lo < u->hi)) throw ConfigError("uniform marginal: lo must be < hi");
  } else {
    const auto& t = std::get<TruncatedNormalMarginal>(m);
    if (!(t.sd > 0.0)) throw ConfigError("truncated-normal marginal: sd must be > 0");
    if (!(t.lo < t.hi)) throw ConfigError("truncated-normal marginal: lo must be < hi");
    const double mass = normal_cdf((t.hi - t.mean) / t.sd) - normal_cdf((t.lo - t.mean) / t.sd);
    if (!(mass > 1e-12)) throw ConfigError("truncated-normal marginal: truncation leaves no mass");
  }
}

inline double trunc_mass(const TruncatedNormalMarginal& t) {
  return normal_cdf((t.hi - t.mean) / t.sd) - normal_cdf((t.lo - t.mean) / t.sd);
}

}  // namespace detail

inline double marginal_quantile(const Marginal& m, double u) {
  if (!(u >= 0.0) || !(u < 1.0)) throw std::domain_error("marginal_quantile: u outside [0,1)");
  if (const auto* uni = std::get_if<UniformMarginal>(&m)) return uni->lo + u * (uni->hi - uni->lo);
  const auto& t = std::get<TruncatedNormalMarginal>(m);
  const double fa = normal_cdf((t.lo - t.mean) / t.sd);
  const double fb = normal_cdf((t.hi - t.mean) / t.sd);
  return t.mean + t.sd * normal_quantile(fa + u * (fb - fa));
}

inline double marginal_cdf(const Marginal& m, double x) {
  if (const auto* uni = std::get_if<UniformMarginal>(&m)) {
    if (x <= uni->lo) return 0.0;
    if (x >= uni->hi) return 1.0;
    return (x - uni->lo) / (uni->hi - uni->lo);
  }
  const auto& t = std::get<TruncatedNormalMarginal>(m);
  if (x <= t.lo) return 0.0;
  if (x >= t.hi) return 1.0;
  const double fa = normal_cdf((t.lo - t.mean) / t.sd);
  return (normal_cdf((x - t.mean) / t.sd) - fa) / detail::trunc_mass(t);
}

inline double marginal_density(const Marginal& m, double x) {
  if (const auto* uni = std::get_if<UniformMarginal>(&m))
    return (x < uni->lo || x > uni->hi) ? 0.0 : 1.0 / (uni->hi - uni->lo);
  const auto& t = std::get<TruncatedNormalMarginal>(m);
  if (x < t.lo || x > t.hi) return 0.0;
  return normal_pdf((x - t.mean) / t.sd) / (t.sd * detail::trunc_mass(t));
}

inline double marginal_lo(const Marginal& m) {
  if (const auto* u = std::get_if<UniformMarginal>(&m)) return u->lo;
  return std::get<TruncatedNormalMarginal>(m).lo;
}
inline double marginal_hi(const Marginal& m) {
  if (const auto* u = std::get_if<UniformMarginal>(&m)) return u->hi;
  return std::get<TruncatedNormalMarginal>(m).hi;
}

/// Shared MVN log-density core, also used by the Gaussian-mixture
/// components so equal parameters give bit-equal densities.
struct MvnCore {
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol;  // lower factor of the covariance
  double log_norm = 0.0; // -(d/2)log(2pi) - sum(log diag(chol))

  MvnCore() = default;
  MvnCore(Eigen::VectorXd mean_, const Eigen::MatrixXd& cov) : mean(std::move(mean_)) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw NumericalError("MvnCore: covariance is not positive definite");
    chol = llt.matrixL();
    log_norm = -0.5 * static_cast<double>(mean.size()) * kLog2Pi -
               chol.diagonal().array().log().sum();
  }

  double log_pdf(const Eigen::VectorXd& x) const {
    Eigen::VectorXd m = chol.triangularView<Eigen::Lower>().solve(x - mean);
    return log_norm - 0.5 * m.squaredNorm();
  }

  Eigen::VectorXd draw(Rng& rng) const {
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = rng.normal();
    return mean + chol * z;
  }
};

/// Nominal input uncertainty: either independent marginals or a
/// full-covariance multivariate normal, with a box support.
class InputDistribution {
 public:
  enum class Kind { IndependentMarginals, MultivariateNormal };

  static InputDistribution independent(std::vector<Marginal> marginals) {
    if (marginals.empty()) throw ConfigError("InputDistribution: no marginals");
    for (const auto& m : marginals) detail::check_marginal(m);
    InputDistribution d;
    d.kind_ = Kind::IndependentMarginals;
    d.marginals_ = std::move(marginals);
    const int dim = static_cast<int>(d.marginals_.size());
    Eigen::VectorXd lo(dim), hi(dim);
    for (int j = 0; j < dim; ++j) {
      lo[j] = marginal_lo(d.marginals_[j]);
      hi[j] = marginal_hi(d.marginals_[j]);
    }
    d.has_box_ = lo.allFinite() && hi.allFinite();
    if (d.has_box_) d.box_ = Bounds(lo, hi);
    return d;
  }

  static InputDistribution uniform_box(const Bounds& b) {
    std::vector<Marginal> ms;
    for (int j = 0; j < b.dim(); ++j) ms.push_back(UniformMarginal{b.lo[j], b.hi[j]});
    return independent(std::move(ms));
  }

  /// support box defaults to mean +/- support_sigmas marginal standard deviations
  static InputDistribution multivariate_normal(Eigen::VectorXd mean, Eigen::MatrixXd cov,
                                               double support_sigmas = 5.0) {
    if (cov.rows() != cov.cols() || cov.rows() != mean.size())
      throw ConfigError("InputDistribution: covariance/mean shape mismatch");
    if (!cov.isApprox(cov.transpose(), 1e-10))
      throw ConfigError("InputDistribution: covariance must be symmetric");
    InputDistribution d;
    d.kind_ = Kind::MultivariateNormal;
    Eigen::VectorXd sd = cov.diagonal().array().sqrt();
    d.box_ = Bounds(mean - support_sigmas * sd, mean + support_sigmas * sd);
    d.has_box_ = true;
    d.mvn_ = MvnCore(std::move(mean), cov);
    d.cov_ = std::move(cov);
    return d;
  }

  Kind kind() const { return kind_; }
  int dim() const {
    return kind_ == Kind::MultivariateNormal ? static_cast<int>(mvn_.mean.size())
                                             : static_cast<int>(marginals_.size());
  }
  bool has_support_box() const { return has_box_; }
  const Bounds& support() const {
    if (!has_box_) throw ConfigError("InputDistribution: unbounded support");
    return box_;
  }
  const std::vector<Marginal>& marginals() const { return marginals_; }
  const Eigen::VectorXd& mvn_mean() const { return mvn_.mean; }
  const Eigen::MatrixXd& mvn_covariance() const { return cov_; }

  /// iid draws; the MVN kind rejects draws outside the support box
  Eigen::MatrixXd sample(int n, Rng& rng) const {
    Eigen::MatrixXd out(n, dim());
    if (kind_ == Kind::IndependentMarginals) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim(); ++j)
          out(i, j) = marginal_quantile(marginals_[j], rng.uniform());
      return out;
    }
    long long attempts = 0;
    for (int i = 0; i < n; ++i) {
      for (;;) {
        ++attempts;
        Eigen::VectorXd x = mvn_.draw(rng);
        if (!has_box_ || box_.contains(x)) {
          out.row(i) = x.transpose();
          break;
        }
        // degenerate truncation guard: >99% rejected over a fair trial
        if (attempts >= 10000 && static_cast<double>(i) < 0.01 * static_cast<double>(attempts))
          throw ConfigError("InputDistribution: >99% of MVN draws rejected by the support box");
      }
    }
    return out;
  }

  double log_density(const Eigen::VectorXd& x) const {
    if (has_box_ && !box_.contains(x)) return -std::numeric_limits<double>::infinity();
    if (kind_ == Kind::MultivariateNormal) return mvn_.log_pdf(x);
    double s = 0.0;
    for (int j = 0; j < dim(); ++j) {
      const double f = marginal_density(marginals_[j], x[j]);
      if (f <= 0.0) return -std::numeric_limits<double>::infinity();
      s += std::log(f);
    }
    return s;
  }

  double density(const Eigen::VectorXd& x) const {
    const double lf = log_density(x);
    return std::isfinite(lf) ? std::exp(lf) : 0.0;
  }

  /// Inverse-CDF warp of a unit-cube design, componentwise. The MVN kind
  /// warps through its marginal standard deviations only (covariances
  /// dropped), truncated to the support box.
  Eigen::MatrixXd warp(const Eigen::MatrixXd& unit_design) const {
    if (unit_design.cols() != dim()) throw ConfigError("warp: dimension mismatch");
    Eigen::MatrixXd out(unit_design.rows(), unit_design.cols());
    for (Eigen::Index i = 0; i < unit_design.rows(); ++i)
      for (int j = 0; j < dim(); ++j) {
        const double u = unit_design(i, j);
        if (!(u >= 0.0) || !(u < 1.0)) throw std::domain_error("warp: design value outside [0,1)");
        out(i, j) = marginal_quantile(warp_marginal(j), u);
      }
    return out;
  }

  Marginal warp_marginal(int j) const {
    if (kind_ == Kind::IndependentMarginals) return marginals_[j];
    return TruncatedNormalMarginal{mvn_.mean[j], std::sqrt(cov_(j, j)), box_.lo[j], box_.hi[j]};
  }

 private:
  InputDistribution() = default;

  Kind kind_ = Kind::IndependentMarginals;
  std::vector<Marginal> marginals_;
  MvnCore mvn_;
  Eigen::MatrixXd cov_;
  Bounds box_;
  bool has_box_ = false;
};

}  // namespace ecl
