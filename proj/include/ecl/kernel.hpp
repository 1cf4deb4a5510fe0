#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "ecl/errors.hpp"

namespace ecl {

enum class KernelFamily { SquaredExponential, Matern32 };

/// Anisotropic stationary kernel over unit-cube coordinates:
/// k(a,b) = scale * rho(r),  r^2 = sum_j ((a_j-b_j)/lengthscale_j)^2.
struct KernelSpec {
  KernelFamily family = KernelFamily::SquaredExponential;
  Eigen::VectorXd lengthscales;
  double scale = 1.0;    // tau^2
  double jitter = 1e-6;  // added to the training covariance diagonal

  void check() const {
    if (lengthscales.size() == 0 || (lengthscales.array() <= 0.0).any())
      throw std::domain_error("KernelSpec: lengthscales must be positive");
    if (!(scale > 0.0)) throw std::domain_error("KernelSpec: scale must be positive");
    if (jitter < 0.0) throw std::domain_error("KernelSpec: jitter must be nonnegative");
  }
};

inline double kernel_eval(const KernelSpec& k, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& b) {
  k.check();
  const double r2 = ((a - b).cwiseQuotient(k.lengthscales)).squaredNorm();
  if (k.family == KernelFamily::SquaredExponential) return k.scale * std::exp(-0.5 * r2);
  const double r = std::sqrt(r2);
  const double s3r = std::sqrt(3.0) * r;
  return k.scale * (1.0 + s3r) * std::exp(-s3r);
}

namespace detail {

/// Per-dimension squared scaled differences, cached once per dataset so
/// likelihood iterations rebuild K with one exp per entry.
struct PairwiseSq {
  std::vector<Eigen::MatrixXd> d2;  // one n x n block per dimension, (x_ij - x_kj)^2

  explicit PairwiseSq(const Eigen::MatrixXd& x) {
    const auto n = x.rows();
    d2.resize(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      auto& m = d2[static_cast<std::size_t>(j)];
      m.resize(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k <= i; ++k) {
          const double d = x(i, j) - x(k, j);
          m(i, k) = m(k, i) = d * d;
        }
    }
  }
};

/// Training covariance (with jitter) plus the pieces gradients need.
struct KernelMatrix {
  Eigen::MatrixXd K;  // scale * rho(r) + jitter on the diagonal
  Eigen::MatrixXd E;  // Matern only: exp(-sqrt(3) r)
};

inline KernelMatrix build_covariance(const PairwiseSq& sq, const KernelSpec& k) {
  const auto n = sq.d2.front().rows();
  const auto d = static_cast<Eigen::Index>(sq.d2.size());
  Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < d; ++j)
    r2 += sq.d2[static_cast<std::size_t>(j)] / (k.lengthscales[j] * k.lengthscales[j]);
  KernelMatrix out;
  if (k.family == KernelFamily::SquaredExponential) {
    out.K = (k.scale * (-0.5 * r2.array()).exp()).matrix();
  } else {
    Eigen::ArrayXXd s3r = (3.0 * r2.array()).sqrt();
    out.E = (-s3r).exp().matrix();
    out.K = (k.scale * (1.0 + s3r) * out.E.array()).matrix();
  }
  out.K.diagonal().array() += k.jitter;
  return out;
}

/// k(query, X) row vectors for a block of unit-coordinate queries
inline Eigen::MatrixXd cross_covariance(const KernelSpec& k, const Eigen::MatrixXd& queries,
                                        const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(queries.rows(), x.rows());
  Eigen::ArrayXXd r2 = Eigen::ArrayXXd::Zero(queries.rows(), x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double inv = 1.0 / k.lengthscales[j];
    Eigen::ArrayXXd diff = (queries.col(j).replicate(1, x.rows()).rowwise() -
                            x.col(j).transpose())
                               .array() *
                           inv;
    r2 += diff.square();
  }
  if (k.family == KernelFamily::SquaredExponential) {
    out = (k.scale * (-0.5 * r2).exp()).matrix();
  } else {
    Eigen::ArrayXXd s3r = (3.0 * r2).sqrt();
    out = (k.scale * (1.0 + s3r) * (-s3r).exp()).matrix();
  }
  return out;
}

}  // namespace detail

}  // namespace ecl
