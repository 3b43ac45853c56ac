#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "specstat/errors.hpp"
#include "specstat/sublevel.hpp"

using namespace specstat;

namespace {

const BoxDomain kUnitInterval = {{-1.0, 1.0}};

double first(const std::vector<double>& x) { return x[0]; }

}  // namespace

TEST_CASE("linear function: measure of the slab matches 2 eps") {
  const SublevelEstimate est =
      sublevel_measure(first, kUnitInterval, 0.1, 200000, 7);
  CHECK(est.volume == doctest::Approx(2.0));
  CHECK(est.samples == 200000);
  CHECK(est.fraction.point ==
        doctest::Approx(static_cast<double>(est.hits) / est.samples));
  CHECK(est.measure == doctest::Approx(0.2).epsilon(0.05));
  CHECK(est.measure_lo <= 0.2);
  CHECK(0.2 <= est.measure_hi);
  CHECK(est.measure_lo < est.measure);
  CHECK(est.measure < est.measure_hi);
}

TEST_CASE("constant function: empty sublevel set") {
  const auto one = [](const std::vector<double>&) { return 1.0; };
  const SublevelEstimate est = sublevel_measure(one, kUnitInterval, 0.5, 5000, 3);
  CHECK(est.hits == 0);
  CHECK(est.measure == 0.0);
  CHECK(est.measure_lo == 0.0);
  CHECK(est.measure_hi > 0.0);

  // eps above the sup of |f| captures everything.
  const SublevelEstimate all = sublevel_measure(first, kUnitInterval, 2.0, 5000, 3);
  CHECK(all.hits == 5000);
  CHECK(all.measure == doctest::Approx(2.0));
  CHECK(all.measure_hi == doctest::Approx(2.0));
}

TEST_CASE("monomial exponents recovered from the eps grid") {
  const std::vector<double> grid = {0.2, 0.1, 0.05, 0.025, 0.0125};

  const SublevelExponent lin =
      sublevel_exponent(first, kUnitInterval, grid, 100000, 17);
  CHECK(std::abs(lin.fit.exponent - 1.0) <= 0.2);
  CHECK(lin.points.size() == 5);
  CHECK(lin.fit.used_points == 5);
  CHECK(lin.fit.stderr_ > 0.0);

  const auto square = [](const std::vector<double>& x) { return x[0] * x[0]; };
  const SublevelExponent sq =
      sublevel_exponent(square, kUnitInterval, grid, 100000, 19);
  CHECK(std::abs(sq.fit.exponent - 0.5) <= 0.05);

  const auto quartic = [](const std::vector<double>& x) {
    const double t = x[0] * x[0];
    return t * t;
  };
  const SublevelExponent qu =
      sublevel_exponent(quartic, kUnitInterval, grid, 100000, 23);
  CHECK(std::abs(qu.fit.exponent - 0.25) <= 0.05);
}

TEST_CASE("two-dimensional box: product function against the exact measure") {
  // |{(x,y) in [-1,1]^2 : |xy| < eps}| = 4 eps (1 + log(1/eps)) for eps < 1.
  const BoxDomain square = {{-1.0, 1.0}, {-1.0, 1.0}};
  const auto prod = [](const std::vector<double>& x) { return x[0] * x[1]; };
  const double eps = 0.1;
  const double exact = 4.0 * eps * (1.0 + std::log(1.0 / eps));
  const SublevelEstimate est = sublevel_measure(prod, square, eps, 400000, 29);
  CHECK(est.volume == doctest::Approx(4.0));
  CHECK(est.measure == doctest::Approx(exact).epsilon(0.02));
  CHECK(est.measure_lo <= exact);
  CHECK(exact <= est.measure_hi);
}

TEST_CASE("determinism and seed sensitivity") {
  const auto square = [](const std::vector<double>& x) { return x[0] * x[0]; };
  const SublevelEstimate a = sublevel_measure(square, kUnitInterval, 0.05, 20000, 99);
  const SublevelEstimate b = sublevel_measure(square, kUnitInterval, 0.05, 20000, 99);
  CHECK(a.hits == b.hits);
  CHECK(a.measure == b.measure);
  const SublevelEstimate c = sublevel_measure(square, kUnitInterval, 0.05, 20000, 100);
  CHECK(a.hits != c.hits);

  const std::vector<double> grid = {0.2, 0.1, 0.05};
  const SublevelExponent e1 = sublevel_exponent(square, kUnitInterval, grid, 5000, 5);
  const SublevelExponent e2 = sublevel_exponent(square, kUnitInterval, grid, 5000, 5);
  CHECK(e1.fit.exponent == e2.fit.exponent);
  // Per-eps streams are independent: the sub-seeds differ from the master.
  CHECK(e1.points[0].hits != e1.points[1].hits);
}

TEST_CASE("input validation") {
  const auto one = [](const std::vector<double>&) { return 1.0; };
  CHECK_THROWS_AS(sublevel_measure(first, kUnitInterval, 0.1, 0, 1), ConfigError);
  CHECK_THROWS_AS(sublevel_measure(first, kUnitInterval, 0.0, 100, 1), ConfigError);
  CHECK_THROWS_AS(sublevel_measure(first, kUnitInterval, -0.1, 100, 1), ConfigError);
  CHECK_THROWS_AS(sublevel_measure(first, {}, 0.1, 100, 1), ConfigError);
  CHECK_THROWS_AS(sublevel_measure(first, {{1.0, -1.0}}, 0.1, 100, 1), ConfigError);
  CHECK_THROWS_AS(
      sublevel_measure(first, {{0.0, std::numeric_limits<double>::infinity()}}, 0.1,
                       100, 1),
      ConfigError);
  CHECK_THROWS_AS(sublevel_measure({}, kUnitInterval, 0.1, 100, 1), ConfigError);

  const auto bad = [](const std::vector<double>&) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(sublevel_measure(bad, kUnitInterval, 0.1, 100, 1), NumericError);

  // A function with an empty sublevel set leaves nothing to fit.
  CHECK_THROWS_AS(
      sublevel_exponent(one, kUnitInterval, {0.2, 0.1, 0.05}, 1000, 1), ConfigError);
  // Too few usable grid points propagates the insufficient-data error.
  CHECK_THROWS_AS(sublevel_exponent(first, kUnitInterval, {0.2, 0.1}, 1000, 1),
                  ConfigError);
}
