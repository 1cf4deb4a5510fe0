#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "ecl/lhs.hpp"
#include "ecl/mfis.hpp"
#include "ecl/montecarlo.hpp"

using namespace ecl;

namespace {

// 2d linear response over a wide gaussian: alpha has a closed form
struct LinearProblem {
  InputDistribution nominal = InputDistribution::multivariate_normal(
      Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), 8.0);
  LimitState limit{3.5, +1};
  Simulator fn = [](const Eigen::VectorXd& x) { return x[0] + x[1]; };
  // alpha = P(x1 + x2 > 3.5), x1 + x2 ~ N(0, 2)
  double alpha() const { return 1.0 - normal_cdf(3.5 / std::sqrt(2.0)); }

  GpModel surrogate(std::uint64_t seed) const {
    Rng rng(seed);
    Eigen::MatrixXd xu = latin_hypercube(30, 2, rng);
    Eigen::MatrixXd x = nominal.support().from_unit_rows(xu);
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) y[i] = fn(x.row(i).transpose());
    Dataset data(x, y, nominal.support());
    Rng fit_rng(seed + 1000);
    return GpModel::fit(data, KernelFamily::SquaredExponential, {}, fit_rng);
  }
};

BiasDistribution identity_bias_from(const InputDistribution& mvn) {
  BiasDistribution bias;
  bias.mixture.weights = Eigen::VectorXd::Ones(1);
  bias.mixture.means = mvn.mvn_mean().transpose();
  bias.mixture.covariances = {mvn.mvn_covariance()};
  bias.mixture.type = CovarianceType::Full;
  bias.mixture.finalize();
  const int d = mvn.dim();
  bias.scaling = Bounds(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
  return bias;
}

}  // namespace

TEST_CASE("classification with confidence margins") {
  // deterministic-ish surrogate around y = x on [0,1]
  Eigen::MatrixXd xd(6, 1);
  xd << 0.0, 0.2, 0.4, 0.6, 0.8, 1.0;
  Eigen::VectorXd yd = xd.col(0);
  Dataset data(xd, yd, Bounds(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)));
  KernelSpec k;
  k.lengthscales = Eigen::VectorXd::Constant(1, 0.4);
  k.scale = 1.0;
  GpModel m = GpModel::with_kernel(data, k);

  Eigen::MatrixXd queries(100, 1);
  for (int i = 0; i < 100; ++i) queries(i, 0) = (i + 0.5) / 100.0;

  SECTION("no crossings means an empty set") {
    LimitState high(5.0, +1);
    CHECK(classify_failures(m, queries, high, 0.0).rows() == 0);
  }
  SECTION("mean-classified set is a subset of the ucb set") {
    LimitState limit(0.7, +1);
    Eigen::MatrixXd strict = classify_failures(m, queries, limit, 0.0);
    Eigen::MatrixXd wide = classify_failures(m, queries, limit, 1.645);
    CHECK(strict.rows() <= wide.rows());
    // every strict row appears in the wide set
    for (Eigen::Index i = 0; i < strict.rows(); ++i) {
      bool found = false;
      for (Eigen::Index j = 0; j < wide.rows() && !found; ++j)
        found = (strict.row(i) - wide.row(j)).norm() == 0.0;
      REQUIRE(found);
    }
  }
  SECTION("margin is applied toward the failure side for both directions") {
    PredictiveDist dist = m.predict(queries);
    for (int dir : {+1, -1})
      for (double delta : {0.0, 1.645, 50.0}) {
        LimitState limit(0.3, dir);
        Eigen::MatrixXd got = classify_failures(m, queries, limit, delta);
        long long expected = 0;
        for (Eigen::Index i = 0; i < queries.rows(); ++i)
          if (dir * (dist.mean[i] - 0.3) + delta * dist.sd[i] > 0.0) ++expected;
        REQUIRE(got.rows() == expected);
      }
  }
  CHECK_THROWS_AS(classify_failures(m, queries, LimitState(0.5, +1), -1.0), std::domain_error);
}

TEST_CASE("importance weights collapse to one when bias equals nominal") {
  LinearProblem prob;
  BiasDistribution bias = identity_bias_from(prob.nominal);

  Rng rng(101);
  const int m = 5000;
  Eigen::MatrixXd x = prob.nominal.sample(m, rng);
  Eigen::VectorXd y(m);
  for (int i = 0; i < m; ++i) y[i] = prob.fn(x.row(i).transpose());

  // densities agree bitwise on shared samples
  for (int i = 0; i < 50; ++i)
    REQUIRE(bias.log_density(x.row(i).transpose()) ==
            prob.nominal.log_density(x.row(i).transpose()));

  MfisEstimate est = mfis_estimate(y, x, prob.nominal, bias, prob.limit);
  McEstimate mc = mc_failure(y, prob.limit, m);
  CHECK(est.alpha_hat == mc.alpha_hat);  // bitwise
  CHECK(est.max_weight == 1.0);
  CHECK(est.n_failures_observed == mc.n_failures);
}

TEST_CASE("zero observed failures produce a flagged zero estimate") {
  LinearProblem prob;
  BiasDistribution bias = identity_bias_from(prob.nominal);
  Eigen::MatrixXd x(4, 2);
  x << 0.0, 0.0, 0.1, 0.2, -0.3, 0.4, 0.5, -0.6;
  Eigen::VectorXd y(4);
  y << 0.0, 0.3, 0.1, -0.1;  // all far below the threshold
  MfisEstimate est = mfis_estimate(y, x, prob.nominal, bias, prob.limit);
  CHECK(est.alpha_hat == 0.0);
  CHECK(est.std_error == 0.0);
  CHECK(est.ci_lo == 0.0);
  CHECK(est.ci_hi == 0.0);
  CHECK(est.no_failures);
}

TEST_CASE("surrogate with no predicted failures short-circuits") {
  // constant data well below the threshold, certain predictions
  Eigen::MatrixXd xd(4, 1);
  xd << 0.1, 0.4, 0.6, 0.9;
  Eigen::VectorXd yd = Eigen::VectorXd::Zero(4);
  Dataset data(xd, yd, Bounds(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)));
  KernelSpec k;
  k.lengthscales = Eigen::VectorXd::Constant(1, 1.0);
  k.scale = 1.0;
  GpModel m = GpModel::with_kernel(data, k);

  auto nominal = InputDistribution::independent({UniformMarginal{0.0, 1.0}});
  MfisConfig cfg;
  cfg.m_surrogate = 2000;
  cfg.m_star = 100;
  cfg.classifier_delta = 0.0;
  auto truth = [](const Eigen::VectorXd&) { return 0.0; };
  MfisRunResult res = run_mfis(truth, m, nominal, LimitState(10.0, +1), cfg, 7);
  CHECK(res.zero_failure_path);
  CHECK(res.estimate.alpha_hat == 0.0);
  CHECK(res.estimate.no_failures);
  CHECK_FALSE(res.bias.has_value());
}

TEST_CASE("full pipeline on the closed-form linear problem") {
  LinearProblem prob;
  const double alpha = prob.alpha();

  MfisConfig cfg;
  cfg.m_surrogate = 20000;
  cfg.m_star = 300;
  cfg.max_clusters = 4;
  cfg.classifier_delta = 1.645;

  SECTION("single-run sanity") {
    GpModel m = prob.surrogate(3);
    MfisRunResult res = run_mfis(prob.fn, m, prob.nominal, prob.limit, cfg, 11);
    REQUIRE_FALSE(res.zero_failure_path);
    REQUIRE(res.bias.has_value());
    CHECK(res.selected_clusters >= 1);
    CHECK(res.estimate.n_failures_observed > 0);
    CHECK(std::abs(res.estimate.alpha_hat - alpha) <= 4.0 * res.estimate.std_error);
    CHECK(res.estimate.ci_lo <= res.estimate.alpha_hat);
    CHECK(res.estimate.alpha_hat <= res.estimate.ci_hi);
  }

  SECTION("variance reduction against direct mc at the same budget") {
    std::vector<double> mfis_se, mc_se;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      GpModel m = prob.surrogate(seed);
      MfisRunResult res = run_mfis(prob.fn, m, prob.nominal, prob.limit, cfg, 200 + seed);
      REQUIRE_FALSE(res.zero_failure_path);
      mfis_se.push_back(res.estimate.std_error);

      Rng rng = substream(300 + seed, {0});
      Eigen::MatrixXd x = prob.nominal.sample(cfg.m_star, rng);
      Eigen::VectorXd y(cfg.m_star);
      for (int i = 0; i < cfg.m_star; ++i) y[i] = prob.fn(x.row(i).transpose());
      McEstimate mc = mc_failure(y, prob.limit, cfg.m_star);
      mc_se.push_back(std::sqrt(std::max(mc.variance, alpha * (1.0 - alpha) / cfg.m_star)));
    }
    std::sort(mfis_se.begin(), mfis_se.end());
    std::sort(mc_se.begin(), mc_se.end());
    CHECK(mfis_se[5] < mc_se[5]);
  }

  SECTION("estimates are unbiased across seeds") {
    double sum = 0.0, var_sum = 0.0;
    const int reps = 20;
    for (std::uint64_t seed = 0; seed < reps; ++seed) {
      GpModel m = prob.surrogate(50 + seed);
      MfisRunResult res = run_mfis(prob.fn, m, prob.nominal, prob.limit, cfg, 400 + seed);
      REQUIRE_FALSE(res.zero_failure_path);
      sum += res.estimate.alpha_hat;
      var_sum += res.estimate.std_error * res.estimate.std_error;
    }
    const double mean = sum / reps;
    const double pooled_se = std::sqrt(var_sum) / reps;
    CHECK(std::abs(mean - alpha) <= 3.0 * pooled_se);
  }
}

TEST_CASE("mfis config validation") {
  MfisConfig cfg;
  cfg.m_surrogate = 10;
  cfg.m_star = 20;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.m_star = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.m_surrogate = 100;
  cfg.m_star = 10;
  cfg.max_clusters = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
