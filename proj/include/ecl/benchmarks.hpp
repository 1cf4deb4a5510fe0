#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ecl/dataset.hpp"
#include "ecl/distributions.hpp"
#include "ecl/errors.hpp"
#include "ecl/limit_state.hpp"

namespace ecl {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Branin-Hoo on [-5,10] x [0,15] (a=1, b=5.1/4pi^2, c=5/pi, r=6, s=10,
/// t=1/8pi); global minima at 0.397887.
inline double branin_hoo(const Eigen::VectorXd& x) {
  const double b = 5.1 / (4.0 * kPi * kPi);
  const double c = 5.0 / kPi;
  const double t = 1.0 / (8.0 * kPi);
  const double u = x[1] - b * x[0] * x[0] + c * x[0] - 6.0;
  return u * u + 10.0 * (1.0 - t) * std::cos(x[0]) + 10.0;
}

/// sin(x1) + 5 sin^2(x2) + 0.1 x3^4 sin(x1) on [-pi,pi]^3
/// (coefficient 5 on the sin^2 term, not the more common 7)
inline double ishigami(const Eigen::VectorXd& x) {
  const double s1 = std::sin(x[0]);
  const double s2 = std::sin(x[1]);
  return s1 + 5.0 * s2 * s2 + 0.1 * x[2] * x[2] * x[2] * x[2] * s1;
}

/// Hartmann-6 on [0,1]^6 in positive orientation (canonical form negated),
/// peak ~3.32237
inline double hartmann6(const Eigen::VectorXd& x) {
  static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
  static const double a[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                 {0.05, 10, 17, 0.1, 8, 14},
                                 {3, 3.5, 1.7, 10, 17, 8},
                                 {17, 8, 0.05, 10, 0.1, 14}};
  static const double p[4][6] = {
      {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
      {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
      {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
      {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    double e = 0.0;
    for (int j = 0; j < 6; ++j) {
      const double d = x[j] - p[i][j];
      e += a[i][j] * d * d;
    }
    sum += alpha[i] * std::exp(-e);
  }
  return sum;
}

/// (x1^2+4)(x2-1)/20 - sin(5 x1/2) - 2 on [-4,7] x [-3,8]; several
/// crossings of the zero level
inline double multimodal_2d(const Eigen::VectorXd& x) {
  return (x[0] * x[0] + 4.0) * (x[1] - 1.0) / 20.0 - std::sin(2.5 * x[0]) - 2.0;
}

/// Synthetic 4d stand-in exercising the correlated-MVN input path: a
/// contact-force-like response, roughly linear in the inputs with a mild
/// oscillatory term, calibrated so failures above 2800 are rare under the
/// nominal distribution below.
inline double correlated_response_4d(const Eigen::VectorXd& x) {
  const double d1 = x[0] - 0.41597;
  const double d2 = x[1] - 1.54189;
  const double d3 = x[2] - 0.01031;
  const double d4 = x[3] - 1.0;
  return 2465.0 + 900.0 * d1 - 450.0 * d2 + 700.0 * d3 + 1200.0 * d4 +
         60.0 * std::sin(40.0 * d4) * std::cos(12.0 * d1);
}

struct BenchmarkSpec {
  std::string name;
  Bounds domain;
  LimitState limit;
  int n_initial = 0;
  int n_total = 0;
  double reference_volume = std::numeric_limits<double>::quiet_NaN();
  double reference_quantile = std::numeric_limits<double>::quiet_NaN();
  std::function<double(const Eigen::VectorXd&)> fn;
};

namespace detail {
inline Bounds box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  Eigen::VectorXd l(static_cast<Eigen::Index>(lo.size())), h(static_cast<Eigen::Index>(hi.size()));
  Eigen::Index i = 0;
  for (double v : lo) l[i++] = v;
  i = 0;
  for (double v : hi) h[i++] = v;
  return Bounds(l, h);
}
}  // namespace detail

inline const std::vector<BenchmarkSpec>& benchmark_registry() {
  static const std::vector<BenchmarkSpec> all = [] {
    std::vector<BenchmarkSpec> v;
    v.push_back({"branin", detail::box({-5, 0}, {10, 15}), LimitState(206.0, +1), 10, 30, 2.1783,
                 0.9903, branin_hoo});
    v.push_back({"ishigami", detail::box({-kPi, -kPi, -kPi}, {kPi, kPi, kPi}),
                 LimitState(-10.244, -1), 30, 200, 0.0250, 0.9999, ishigami});
    v.push_back({"hartmann6", detail::box({0, 0, 0, 0, 0, 0}, {1, 1, 1, 1, 1, 1}),
                 LimitState(2.63, +1), 60, 500, 0.0011, 0.9989, hartmann6});
    v.push_back({"multimodal2d", detail::box({-4, -3}, {7, 8}), LimitState(0.0, +1), 20, 40,
                 std::numeric_limits<double>::quiet_NaN(),
                 std::numeric_limits<double>::quiet_NaN(), multimodal_2d});
    Eigen::VectorXd mu(4);
    mu << 0.41597, 1.54189, 0.01031, 1.0;
    Eigen::MatrixXd sigma(4, 4);
    sigma << 0.00275, -0.00494, -0.00373, 0.0,
        -0.00494, 0.01856, 0.0032, 0.0,
        -0.00373, 0.0032, 0.01834, 0.0,
        0.0, 0.0, 0.0, 0.00016;
    Eigen::VectorXd sd = sigma.diagonal().array().sqrt();
    v.push_back({"correlated4d", Bounds(mu - 5.0 * sd, mu + 5.0 * sd), LimitState(2800.0, +1), 40,
                 200, std::numeric_limits<double>::quiet_NaN(),
                 std::numeric_limits<double>::quiet_NaN(), correlated_response_4d});
    return v;
  }();
  return all;
}

inline const BenchmarkSpec& find_benchmark(const std::string& name) {
  for (const auto& b : benchmark_registry())
    if (b.name == name) return b;
  throw ConfigError("unknown benchmark: " + name);
}

/// nominal input distributions used by the failure-probability studies

inline InputDistribution ishigami_nominal() {
  return InputDistribution::independent({TruncatedNormalMarginal{-1.0, 1.0, -kPi, kPi},
                                         TruncatedNormalMarginal{1.5, 1.5, -kPi, kPi},
                                         UniformMarginal{-kPi, kPi}});
}

inline InputDistribution hartmann6_nominal() {
  std::vector<Marginal> ms;
  for (int j = 0; j < 6; ++j) ms.push_back(TruncatedNormalMarginal{0.5, 0.1, 0.0, 1.0});
  return InputDistribution::independent(std::move(ms));
}

inline InputDistribution correlated4d_nominal() {
  Eigen::VectorXd mu(4);
  mu << 0.41597, 1.54189, 0.01031, 1.0;
  Eigen::MatrixXd sigma(4, 4);
  sigma << 0.00275, -0.00494, -0.00373, 0.0,
      -0.00494, 0.01856, 0.0032, 0.0,
      -0.00373, 0.0032, 0.01834, 0.0,
      0.0, 0.0, 0.0, 0.00016;
  return InputDistribution::multivariate_normal(mu, sigma, 5.0);
}

}  // namespace ecl
