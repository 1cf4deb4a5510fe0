#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ecl/benchmarks.hpp"
#include "ecl/lhs.hpp"
#include "ecl/metrics.hpp"
#include "ecl/montecarlo.hpp"

using namespace ecl;

namespace {

Eigen::Vector2d v2(double a, double b) { return Eigen::Vector2d(a, b); }

// perfect-classifier stand-in: predictions are the truth with zero sd
struct TruthModel {
  const BenchmarkSpec* spec;
  Bounds box;
  const Bounds& bounds() const { return box; }
  Eigen::VectorXd predict_mean(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd y(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) y[i] = spec->fn(x.row(i).transpose());
    return y;
  }
  PredictiveDist predict(const Eigen::MatrixXd& x) const {
    PredictiveDist d;
    d.mean = predict_mean(x);
    d.sd = Eigen::VectorXd::Zero(x.rows());
    return d;
  }
};

}  // namespace

TEST_CASE("branin-hoo values") {
  CHECK(branin_hoo(v2(kPi, 2.275)) == Catch::Approx(0.39788735772973816).epsilon(1e-10));
  CHECK(branin_hoo(v2(-kPi, 12.275)) == Catch::Approx(0.39788735772973816).epsilon(1e-10));
  CHECK(branin_hoo(v2(-5.0, 0.0)) == Catch::Approx(308.12909601160666).epsilon(1e-10));
}

TEST_CASE("ishigami values") {
  Eigen::Vector3d x(0.0, 0.0, 0.0);
  CHECK(ishigami(x) == 0.0);
  x << kPi / 2.0, 0.0, 0.0;
  CHECK(ishigami(x) == Catch::Approx(1.0).margin(1e-12));
  x << kPi / 2.0, kPi / 2.0, 0.0;
  CHECK(ishigami(x) == Catch::Approx(6.0).margin(1e-12));
}

TEST_CASE("hartmann-6 values") {
  Eigen::VectorXd xstar(6);
  xstar << 0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573;
  CHECK(hartmann6(xstar) == Catch::Approx(3.32237).margin(2e-5));
  Eigen::VectorXd corner = Eigen::VectorXd::Ones(6);
  corner[1] = 0.0;  // far from every optimum row of P
  CHECK(hartmann6(corner) < 0.02);
  CHECK(hartmann6(corner) > 0.0);
}

TEST_CASE("multimodal values") {
  CHECK(multimodal_2d(v2(0.0, 1.0)) == Catch::Approx(-2.0).margin(1e-12));
  CHECK(multimodal_2d(v2(0.0, 6.0)) == Catch::Approx(-1.0).margin(1e-12));
  CHECK(multimodal_2d(v2(0.0, 21.0)) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("registry carries the study configurations") {
  const BenchmarkSpec& branin = find_benchmark("branin");
  CHECK(branin.n_initial == 10);
  CHECK(branin.n_total == 30);
  CHECK(branin.limit.threshold == 206.0);
  CHECK(branin.limit.direction == +1);
  CHECK(branin.reference_volume == Catch::Approx(2.1783));
  CHECK(branin.reference_quantile == Catch::Approx(0.9903));
  CHECK(branin.domain.volume() == Catch::Approx(225.0));

  const BenchmarkSpec& ish = find_benchmark("ishigami");
  CHECK(ish.n_initial == 30);
  CHECK(ish.n_total == 200);
  CHECK(ish.limit.threshold == -10.244);
  CHECK(ish.limit.direction == -1);
  CHECK(ish.reference_volume == Catch::Approx(0.0250));
  CHECK(ish.reference_quantile == Catch::Approx(0.9999));

  const BenchmarkSpec& hart = find_benchmark("hartmann6");
  CHECK(hart.n_initial == 60);
  CHECK(hart.n_total == 500);
  CHECK(hart.limit.threshold == 2.63);
  CHECK(hart.reference_volume == Catch::Approx(0.0011));
  CHECK(hart.reference_quantile == Catch::Approx(0.9989));

  CHECK(find_benchmark("multimodal2d").limit.threshold == 0.0);
  CHECK(find_benchmark("correlated4d").limit.threshold == 2800.0);
  CHECK_THROWS_AS(find_benchmark("nope"), ConfigError);

  // nominal distributions attach to the right domains
  CHECK(ishigami_nominal().dim() == 3);
  CHECK(hartmann6_nominal().dim() == 6);
  CHECK(correlated4d_nominal().dim() == 4);
  CHECK(correlated4d_nominal().support().contains(correlated4d_nominal().mvn_mean()));
}

TEST_CASE("light-sample volume cross-checks") {
  Rng rng(2027);
  SECTION("branin failure volume is in the table's ballpark") {
    const BenchmarkSpec& b = find_benchmark("branin");
    const int n = 200000;
    Eigen::MatrixXd x = b.domain.from_unit_rows(latin_hypercube(n, 2, rng));
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = b.fn(x.row(i).transpose());
    McEstimate e = mc_failure(y, b.limit, n);
    CHECK(std::abs(e.alpha_hat * 225.0 - b.reference_volume) / b.reference_volume < 0.10);
  }
  SECTION("hartmann-6 failure fraction") {
    const BenchmarkSpec& h = find_benchmark("hartmann6");
    const int n = 500000;
    Eigen::MatrixXd x = latin_hypercube(n, 6, rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = h.fn(x.row(i).transpose());
    McEstimate e = mc_failure(y, h.limit, n);
    CHECK(std::abs(e.alpha_hat - h.reference_volume) / h.reference_volume < 0.15);
  }
}

TEST_CASE("classification reports") {
  const BenchmarkSpec& bench = find_benchmark("multimodal2d");
  Rng rng(5);
  Eigen::MatrixXd test = bench.domain.from_unit_rows(latin_hypercube(20000, 2, rng));

  SECTION("the truth classifies itself perfectly") {
    TruthModel oracle{&bench, bench.domain};
    ClassificationReport rep = classify_report(oracle, bench.fn, bench.limit, test, 0.0);
    REQUIRE(rep.sensitivity_defined);
    CHECK(rep.sensitivity == 1.0);
    CHECK(rep.specificity == 1.0);
    CHECK(rep.relative_volume_error == Catch::Approx(0.0).margin(1e-12));
    CHECK(rep.tp + rep.fp + rep.tn + rep.fn == rep.n_test);
  }

  SECTION("a constant passing model has zero sensitivity and full specificity") {
    Eigen::MatrixXd xd(4, 2);
    xd << -3.0, -2.0, 5.0, 6.0, 0.0, 2.0, 2.0, -1.0;
    Eigen::VectorXd yd = Eigen::VectorXd::Constant(4, -5.0);  // below T = 0
    Dataset data(xd, yd, bench.domain);
    KernelSpec k;
    k.lengthscales = Eigen::VectorXd::Constant(2, 1.0);
    k.scale = 1.0;
    GpModel m = GpModel::with_kernel(data, k);
    ClassificationReport rep = classify_report(m, bench.fn, bench.limit, test, 0.0);
    REQUIRE(rep.sensitivity_defined);
    CHECK(rep.sensitivity == 0.0);
    CHECK(rep.specificity == 1.0);
  }

  SECTION("no true failures flags the report") {
    TruthModel oracle{&bench, bench.domain};
    ClassificationReport rep = classify_report(oracle, bench.fn, LimitState(1e9, +1), test, 0.0);
    CHECK_FALSE(rep.sensitivity_defined);
    CHECK(std::isnan(rep.sensitivity));
    CHECK(std::isnan(rep.relative_volume_error));
  }
}

TEST_CASE("cluster counting by linking radius") {
  Eigen::MatrixXd pts(7, 2);
  pts << 0.0, 0.0, 0.01, 0.0, 0.02, 0.01,   // blob A
      0.5, 0.5, 0.51, 0.5,                  // blob B
      0.9, 0.9, 0.905, 0.9;                 // blob C
  CHECK(count_point_clusters(pts, 0.05) == 3);
  CHECK(count_point_clusters(pts, 0.8) == 1);
  CHECK(count_point_clusters(pts.topRows(3), 0.05) == 1);
  CHECK(count_point_clusters(Eigen::MatrixXd(0, 2), 0.05) == 0);
}

TEST_CASE("correlated 4d stand-in is rare under its nominal distribution") {
  auto nominal = correlated4d_nominal();
  Rng rng(99);
  const int n = 200000;
  Eigen::MatrixXd x = nominal.sample(n, rng);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = correlated_response_4d(x.row(i).transpose());
  McEstimate e = mc_failure(y, find_benchmark("correlated4d").limit, n);
  CHECK(e.alpha_hat > 1e-5);
  CHECK(e.alpha_hat < 2e-2);
}
