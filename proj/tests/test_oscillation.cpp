#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "specstat/errors.hpp"
#include "specstat/oscillation.hpp"
#include "specstat/rng.hpp"

using namespace specstat;

namespace {
constexpr double kPi = 3.14159265358979323846;

SampledProfile unit_profile() {
  SampledProfile q;
  q.lo = 0.0;
  q.hi = 1.0;
  q.val = {1.0, 1.0};
  return q;
}
}  // namespace

TEST_CASE("strict sign-change counting") {
  CHECK(oscillation_sign_changes({1.0, 2.0, 3.0}) == 0);
  CHECK(oscillation_sign_changes({1.0, -1.0}) == 1);
  CHECK(oscillation_sign_changes({1.0, 0.0, -1.0}) == 1);
  CHECK(oscillation_sign_changes({1.0, 0.0, 1.0}) == 0);
  CHECK(oscillation_sign_changes({0.0, 0.0, 5.0}) == 0);
  CHECK(oscillation_sign_changes({-1.0, 0.0, 0.0, 2.0, -3.0}) == 2);
  CHECK(oscillation_sign_changes({-2.5}) == 0);
  CHECK_THROWS_AS(oscillation_sign_changes({0.0, 0.0, 0.0}), NumericError);
  CHECK_THROWS_AS(oscillation_sign_changes({}), NumericError);

  // sin on (0, 3 pi) crosses at pi and 2 pi.
  std::vector<double> s;
  for (int i = 1; i < 1000; ++i)
    s.push_back(std::sin(3.0 * kPi * static_cast<double>(i) / 1000.0));
  CHECK(oscillation_sign_changes(s) == 2);
}

TEST_CASE("positive free recursion never flips") {
  // u(m+1) = 3 u(m) - u(m-1), u(0) = 0, u(1) = 1: the coefficient 3 > 2
  // keeps the sequence increasing, so no sign changes from m = 1 on.
  std::vector<double> u = {0.0, 1.0};
  for (int m = 1; m < 40; ++m)
    u.push_back(3.0 * u[static_cast<std::size_t>(m)] -
                u[static_cast<std::size_t>(m) - 1]);
  std::vector<double> tail(u.begin() + 1, u.end());
  CHECK(oscillation_sign_changes(tail) == 0);
  for (std::size_t i = 2; i < u.size(); ++i) CHECK(u[i] > u[i - 1]);
}

TEST_CASE("sturm integrator accuracy") {
  auto q = unit_profile();
  // y'' = 4 y with y(0) = 1, y'(0) = 0 is cosh(2x).
  auto grow = integrate_sturm(q, 4.0, 0.0, 1.0, 0.0, 3.0);
  CHECK(grow.y.back() ==
        doctest::Approx(std::cosh(6.0)).epsilon(1e-8));
  CHECK(grow.x.back() == doctest::Approx(3.0).epsilon(1e-12));
  // y'' = -y with y(0) = 0, y'(0) = 1 is sin(x).
  auto osc = integrate_sturm(q, 1.0, 2.0, 0.0, 1.0, 3.0);
  CHECK(osc.y.back() == doctest::Approx(std::sin(3.0)).epsilon(1e-8));
  std::size_t mid = osc.y.size() / 2;
  CHECK(osc.y[mid] == doctest::Approx(std::sin(osc.x[mid])).epsilon(1e-8));

  CHECK_THROWS_AS(integrate_sturm(q, 1.0, 0.0, 1.0, 0.0, -1.0), ConfigError);
  CHECK_THROWS_AS(integrate_sturm(q, 1.0, 0.0, 1.0, 0.0, 1.0, 1), ConfigError);
}

TEST_CASE("continuum single solutions have at most one zero") {
  int with_one = 0;
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    auto chk = continuum_single_zero_case(trial_seed(101, rep));
    CAPTURE(rep);
    CHECK(chk.bound == 1);
    CHECK(chk.holds);
    CHECK(chk.sign_changes <= 1);
    CHECK(chk.lambda * 0.4 > 0.0);
    if (chk.sign_changes == 1) ++with_one;
  }
  // Random initial data lands outside the positive cone often enough that
  // crossing solutions must appear.
  CHECK(with_one > 0);
}

TEST_CASE("continuum solution differences change sign at most three times") {
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    auto chk = continuum_difference_case(trial_seed(103, rep));
    CAPTURE(rep);
    CHECK(chk.bound == 3);
    CHECK(chk.holds);
    CHECK(chk.energy1 > chk.energy2);
  }
}

TEST_CASE("discrete single solutions flip at most once") {
  int max_seen = 0;
  for (std::uint64_t rep = 0; rep < 500; ++rep) {
    auto chk = discrete_single_flip_case(trial_seed(107, rep));
    CAPTURE(rep);
    CHECK(chk.bound == 1);
    CHECK(chk.holds);
    CHECK(chk.lambda < 0.0);
    max_seen = std::max(max_seen, chk.sign_changes);
  }
  CHECK(max_seen == 1);
}

TEST_CASE("discrete solution differences change sign at most three times") {
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    auto chk = discrete_difference_case(trial_seed(109, rep));
    CAPTURE(rep);
    CHECK(chk.bound == 3);
    CHECK(chk.holds);
    CHECK(chk.energy2 > chk.energy1);
  }
}

TEST_CASE("instances are deterministic in the seed") {
  auto a = continuum_difference_case(777);
  auto b = continuum_difference_case(777);
  CHECK(a.sign_changes == b.sign_changes);
  CHECK(a.lambda == b.lambda);
  CHECK(a.energy1 == b.energy1);
  CHECK(a.energy2 == b.energy2);
  auto c = continuum_difference_case(778);
  CHECK(c.lambda != a.lambda);
}
