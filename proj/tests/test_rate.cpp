#include <catch_amalgamated.hpp>

#include <cmath>

#include "checks.h"
#include "mdpboot/errors.h"
#include "mdpboot/rate.h"

using namespace mdpboot;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
FiniteProbabilityMeasure pm(std::vector<double> pts, std::vector<double> probs) {
  return FiniteProbabilityMeasure(std::move(pts), std::move(probs));
}
}  // namespace

TEST_CASE("rate_of is half the weighted square of the density") {
  const auto p = pm({-1, 1}, {0.5, 0.5});
  CHECK(rate_of(SignedMeasureDensity::zero(p)) == 0.0);
  CHECK_THAT(rate_of(SignedMeasureDensity(p, {-1.0, 1.0})), WithinAbs(0.5, 1e-15));
  const auto q = pm({0, 1}, {0.25, 0.75});
  CHECK_THAT(rate_of(SignedMeasureDensity(q, {3.0, -1.0})), WithinAbs(1.5, 1e-15));
}

TEST_CASE("half-space closed form") {
  SECTION("symmetric two-point law") {
    const auto p = pm({-1, 1}, {0.5, 0.5});
    const RateSolution s = min_rate_halfspace(p, TestFunction({-1.0, 1.0}), 1.0);
    CHECK_THAT(s.rate, WithinAbs(0.5, 1e-15));
    REQUIRE(s.argmin);
    CHECK_THAT((*s.argmin)[0], WithinAbs(-1.0, 1e-15));
    CHECK_THAT((*s.argmin)[1], WithinAbs(1.0, 1e-15));

    // One free parameter: g = (-t, t) meets the constraint when t >= 1.
    double best = INFINITY;
    for (int i = 0; i <= 4000; ++i) {
      const double t = i * 1e-3;
      if (t >= 1.0) best = std::min(best, 0.5 * t * t);
    }
    CHECK_THAT(s.rate, WithinAbs(best, 1e-12));
  }
  SECTION("c = 0 is free") {
    const auto p = pm({-1, 1}, {0.5, 0.5});
    const RateSolution s = min_rate_halfspace(p, TestFunction({-1.0, 1.0}), 0.0);
    CHECK(s.rate == 0.0);
    REQUIRE(s.argmin);
    CHECK((*s.argmin)[0] == 0.0);
  }
  SECTION("skewed Bernoulli") {
    const auto p = pm({0, 1}, {0.75, 0.25});
    const RateSolution s = min_rate_halfspace(p, TestFunction({0.0, 1.0}), 0.3);
    CHECK_THAT(s.rate, WithinRel(0.24, 1e-12));
    CHECK_THAT(rate_of(*s.argmin), WithinRel(s.rate, 1e-12));
    // Density grid with step 1e-3: g = (t, -3t) for zero mass, int f dG = -0.75 t.
    double best = INFINITY;
    for (int i = -2000; i <= 0; ++i) {
      const double t = i * 1e-3;
      if (-0.75 * t >= 0.3) best = std::min(best, 0.5 * (t * t * 0.75 + 9 * t * t * 0.25));
    }
    CHECK_THAT(s.rate, WithinAbs(best, 1e-3));
  }
  SECTION("constant f") {
    const auto p = pm({0, 1}, {0.5, 0.5});
    const RateSolution s = min_rate_halfspace(p, TestFunction({2.0, 2.0}), 0.5);
    CHECK(std::isinf(s.rate));
    CHECK_FALSE(s.feasible());
  }
}

TEST_CASE("min_rate_linear") {
  const auto p = pm({-1, 1}, {0.5, 0.5});
  SECTION("single equality reproduces the closed form") {
    const RateSolution s =
        min_rate_linear(ConstraintSet(p, {LinearConstraint(TestFunction({-1.0, 1.0}), ConstraintKind::equality, 1.0)}));
    CHECK_THAT(s.rate, WithinAbs(0.5, 1e-12));
  }
  SECTION("zero right-hand sides give zero") {
    const RateSolution s = min_rate_linear(
        ConstraintSet(p, {LinearConstraint(TestFunction({-1.0, 1.0}), ConstraintKind::equality, 0.0)}));
    CHECK(s.rate == 0.0);
    REQUIRE(s.argmin);
    CHECK((*s.argmin)[0] == 0.0);
  }
  SECTION("shift moves the right-hand side") {
    const RateSolution s = min_rate_linear(
        ConstraintSet(p, {LinearConstraint(TestFunction({-1.0, 1.0}), ConstraintKind::equality, 1.5)}),
        ShiftVector{{0.5}});
    CHECK_THAT(s.rate, WithinAbs(0.5, 1e-12));
  }
  SECTION("orthogonal constraints on a uniform 4-point support") {
    const auto u = pm({0, 1, 2, 3}, {0.25, 0.25, 0.25, 0.25});
    const TestFunction f1({-1.0, 1.0, 0.0, 0.0});
    const TestFunction f2({0.0, 0.0, -1.0, 1.0});
    const double c1 = 0.3, c2 = 0.2;
    const RateSolution s = min_rate_linear(ConstraintSet(
        u, {LinearConstraint(f1, ConstraintKind::equality, c1), LinearConstraint(f2, ConstraintKind::equality, c2)}));
    const double expect = c1 * c1 / (2 * variance(u, f1)) + c2 * c2 / (2 * variance(u, f2));
    CHECK_THAT(s.rate, WithinRel(expect, 1e-12));

    // g = (-a, a, -b, b) + (c, c, -c, -c)*0 keeps zero mass; the constraints
    // fix a and b, so a 0.05 grid over the free direction d = (t, t, -t, -t) suffices.
    double best = INFINITY;
    for (int i = -100; i <= 100; ++i) {
      const double t = i * 0.05;
      const double a = 2 * c1, b = 2 * c2;
      const double g[4] = {-a + t, a + t, -b - t, b - t};
      double r = 0;
      for (double x : g) r += 0.5 * x * x * 0.25;
      best = std::min(best, r);
    }
    CHECK_THAT(s.rate, WithinAbs(best, 1e-12));
  }
  SECTION("inconsistent equalities are infeasible") {
    const TestFunction f({-1.0, 1.0});
    const RateSolution s = min_rate_linear(ConstraintSet(
        p, {LinearConstraint(f, ConstraintKind::equality, 1.0), LinearConstraint(f, ConstraintKind::equality, 2.0)}));
    CHECK(std::isinf(s.rate));
    CHECK_FALSE(s.feasible());
  }
  SECTION("inactive inequality") {
    const RateSolution s = min_rate_linear(
        ConstraintSet(p, {LinearConstraint(TestFunction({-1.0, 1.0}), ConstraintKind::at_least, -1.0)}));
    CHECK(s.rate == 0.0);
  }
  SECTION("too many inequalities trip the guard") {
    std::vector<LinearConstraint> many;
    for (int i = 0; i < 13; ++i) many.emplace_back(TestFunction({-1.0, 1.0}), ConstraintKind::at_least, 0.1 * i);
    CHECK_THROWS_AS(min_rate_linear(ConstraintSet(p, many)), ComplexityError);
  }
}

TEST_CASE("joint rate adds the bootstrap and empirical parts") {
  const auto p = pm({-1, 1}, {0.5, 0.5});
  const SignedMeasureDensity g(p, {-1.0, 1.0});
  CHECK_THAT(joint_rate(g, g, 1.0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(joint_rate(g, g, 2.0), WithinAbs(1.5, 1e-15));
  CHECK_THAT(joint_rate(SignedMeasureDensity::zero(p), g, 3.7), WithinAbs(0.5, 1e-15));
  const auto q = pm({0, 1}, {0.5, 0.5});
  CHECK_THROWS_AS(joint_rate(SignedMeasureDensity(q, {-1.0, 1.0}), g, 1.0), InputError);
  CHECK_THROWS_AS(joint_rate(g, g, 0.0), InputError);
}

TEST_CASE("finite-dimensional quadratic rate") {
  Eigen::VectorXd y(1), z(0), fh(1);
  Eigen::MatrixXd rf(1, 1), rg(0, 0);
  rf << 1.0;
  fh << 0.5;
  y << 1.0;
  CHECK_THAT(finite_dim_rate(y, z, rf, rg, fh), WithinAbs(0.125, 1e-15));
  y << 0.5;
  CHECK_THAT(finite_dim_rate(y, z, rf, rg, fh), WithinAbs(0.0, 1e-15));

  Eigen::VectorXd z2(2);
  z2 << 1.0, 1.0;
  Eigen::MatrixXd sing(2, 2);
  sing << 1.0, 0.0, 0.0, 0.0;
  CHECK(std::isinf(finite_dim_rate(y, z2, rf, sing, fh)));

  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(finite_dim_rate(y, z2, rf, asym, fh), InputError);
}

TEST_CASE("rate invariants over random instances") {
  for (const auto& r : checks::rate_properties(1000, 202)) {
    INFO(checks::describe(r));
    CHECK(r.pass);
    CHECK(r.instances >= 1000);
  }
}

TEST_CASE("rate solver against grid search") {
  const auto r = checks::rate_brute_force(100, 203);
  INFO(checks::describe(r));
  CHECK(r.pass);
}
