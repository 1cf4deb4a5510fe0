#include <catch2/catch_amalgamated.hpp>

#include "ecl/math.hpp"

using namespace ecl;

TEST_CASE("normal pdf and cdf reference values") {
  CHECK(normal_pdf(0.0) == Catch::Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(normal_cdf(0.0) == Catch::Approx(0.5).margin(1e-16));
  CHECK(normal_cdf(1.0) == Catch::Approx(0.8413447460685429).epsilon(1e-13));
  CHECK(normal_cdf(-1.959963984540054) == Catch::Approx(0.025).epsilon(1e-10));
  for (double z : {-3.0, -0.7, 0.0, 0.4, 2.5})
    CHECK(normal_cdf(z) + normal_cdf(-z) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("normal quantile inverts the cdf") {
  CHECK(normal_quantile(0.5) == Catch::Approx(0.0).margin(1e-15));
  CHECK(normal_quantile(0.75) == Catch::Approx(0.6744897501960817).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == Catch::Approx(1.959963984540054).epsilon(1e-12));
  for (double u = 1e-10; u < 1.0; u = u < 0.1 ? u * 10.0 : u + 0.07) {
    const double x = normal_quantile(u);
    CHECK(normal_cdf(x) == Catch::Approx(u).epsilon(1e-9).margin(1e-13));
  }
  CHECK(std::isinf(normal_quantile(0.0)));
  CHECK(std::isinf(normal_quantile(1.0)));
  CHECK_THROWS_AS(normal_quantile(-0.1), std::domain_error);
}

TEST_CASE("quantile accuracy meets the 1e-9 contract") {
  // against high-precision tail values
  CHECK(normal_quantile(1e-6) == Catch::Approx(-4.753424308822899).epsilon(1e-9));
  CHECK(normal_quantile(1.0 - 1e-6) == Catch::Approx(4.753424308822899).epsilon(1e-9));
  CHECK(normal_quantile(0.9) == Catch::Approx(1.2815515655446004).epsilon(1e-12));
}

TEST_CASE("log cdf is stable deep into the tail") {
  CHECK(log_normal_cdf(0.0) == Catch::Approx(std::log(0.5)).epsilon(1e-14));
  // log Phi(-10), reference 7.619853024160527e-24
  CHECK(log_normal_cdf(-10.0) == Catch::Approx(std::log(7.619853024160527e-24)).epsilon(1e-12));
  double prev = log_normal_cdf(-30.0);
  for (double z = -31.0; z >= -300.0; z -= 1.0) {
    const double v = log_normal_cdf(z);
    REQUIRE(std::isfinite(v));
    REQUIRE(v < prev);
    prev = v;
  }
  // asymptotic branch against high-precision references
  CHECK(log_normal_cdf(-37.5) == Catch::Approx(-707.6689893175072).epsilon(1e-10));
  CHECK(log_normal_cdf(-40.0) == Catch::Approx(-804.6084420137538).epsilon(1e-10));
  CHECK(log_normal_cdf(-100.0) == Catch::Approx(-5005.524208694205).epsilon(1e-10));
}
