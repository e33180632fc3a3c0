#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "epidiff/quadrature.hpp"

using namespace epidiff;

TEST_CASE("polynomials and smooth integrands") {
  CHECK(integrate_value([](double x) { return x * x; }, 0.0, 1.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(integrate_value([](double x) { return std::exp(x); }, 0.0, 1.0) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
  // Reversed limits flip the sign.
  CHECK(integrate_value([](double x) { return std::exp(x); }, 1.0, 0.0) ==
        doctest::Approx(1.0 - std::exp(1.0)).epsilon(1e-14));
  CHECK(integrate_value([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("oscillatory integrand converges by subdivision") {
  const double val = integrate_value([](double x) { return std::sin(40.0 * x); }, 0.0, 1.0);
  CHECK(val == doctest::Approx((1.0 - std::cos(40.0)) / 40.0).epsilon(1e-12));
}

TEST_CASE("integrable endpoint singularity") {
  const double val = integrate_value([](double x) { return std::log(x); }, 0.0, 1.0,
                                     1e-10, 1e-10);
  CHECK(val == doctest::Approx(-1.0).epsilon(1e-9));
  const double sqrt_val =
      integrate_value([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-10, 1e-10);
  CHECK(sqrt_val == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("non-finite integrand is reported with its subinterval") {
  CHECK_THROWS_AS(
      integrate_value([](double x) { return 1.0 / (x - 0.5); }, 0.4999999, 0.5000001),
      QuadratureError);
  try {
    integrate_value([](double x) { return 1.0 / x; }, 0.0, 1.0);
    FAIL("expected divergence failure");
  } catch (const QuadratureError& e) {
    CHECK(e.bad_lo >= 0.0);
    CHECK(e.bad_hi <= 1.0);
    CHECK(e.bad_lo < e.bad_hi);
  }
}

TEST_CASE("weight table cumulative matches direct integration") {
  WeightTable table([](double x) { return std::exp(2.0 * x); }, 0.0, 1.0, 64);
  for (double x : {0.001, 0.1, 0.25, 0.333, 0.5, 0.77, 0.999, 1.0}) {
    const double exact = 0.5 * (std::exp(2.0 * x) - 1.0);
    CHECK(table.cumulative_to(x) == doctest::Approx(exact).epsilon(1e-12));
  }
  CHECK(table.cumulative_to(0.0) == 0.0);
  CHECK(table.between(0.25, 0.75) ==
        doctest::Approx(0.5 * (std::exp(1.5) - std::exp(0.5))).epsilon(1e-12));
  CHECK_THROWS_AS(table.cumulative_to(1.5), std::domain_error);
}

TEST_CASE("weight table with a singular integrand anchored above zero") {
  // Integrand 1/x anchored at 1e-12: cumulative is ln(x/1e-12).
  WeightTable table([](double x) { return 1.0 / x; }, 1e-12, 1.0, 256);
  for (double x : {1e-10, 1e-6, 1e-3, 0.5, 1.0}) {
    CHECK(table.cumulative_to(x) == doctest::Approx(std::log(x / 1e-12)).epsilon(1e-11));
  }
  // Differences between interior points do not feel the anchor.
  CHECK(table.between(0.2, 0.9) == doctest::Approx(std::log(0.9 / 0.2)).epsilon(1e-12));
}

TEST_CASE("weight table tail stays accurate when mass sits at the anchor") {
  // exp(-k x): nearly all mass lives in [0, 5/k], so the tail beyond 0.5 is
  // ~1e-44 -- forty orders below the total.  A difference of cumulatives
  // would return pure roundoff noise; the right-anchored tail must not.
  const double k = 200.0;
  WeightTable table([k](double x) { return std::exp(-k * x); }, 0.0, 1.0, 512);
  auto exact_tail = [k](double x) { return (std::exp(-k * x) - std::exp(-k)) / k; };
  for (double x : {0.0, 0.01, 0.1, 0.3, 0.5, 0.9}) {
    CHECK(table.tail_to(x) == doctest::Approx(exact_tail(x)).epsilon(1e-11));
  }
  CHECK(table.tail_to(1.0) == 0.0);
  // Head and tail reassemble the total integral.
  const double total = table.cumulative_to(1.0);
  for (double x : {0.05, 0.4, 0.8}) {
    CHECK(table.cumulative_to(x) + table.tail_to(x) ==
          doctest::Approx(total).epsilon(1e-13));
  }
  CHECK_THROWS_AS(table.tail_to(-0.5), std::domain_error);
}
