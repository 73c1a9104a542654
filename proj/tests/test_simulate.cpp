#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include <boost/math/distributions/binomial.hpp>

#include "checks.h"
#include "mdpboot/errors.h"
#include "mdpboot/simulate.h"

using namespace mdpboot;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const FiniteProbabilityMeasure kCoin(std::vector<double>{0.0, 1.0}, {0.5, 0.5});
const TestFunction kId({0.0, 1.0});
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

TEST_CASE("draw_sample") {
  const FiniteProbabilityMeasure dirac(std::vector<double>{3.0}, {1.0});
  CHECK(draw_sample(dirac, 5, RngSpec{1, 2}).count(0) == 5);

  const EmpiricalMeasure a = draw_sample(kCoin, 1000, RngSpec{9, 9});
  const EmpiricalMeasure b = draw_sample(kCoin, 1000, RngSpec{9, 9});
  CHECK(a.count(0) == b.count(0));

  const EmpiricalMeasure big = draw_sample(kCoin, 100000, RngSpec{4, 1});
  CHECK_THAT(big.frequency(0), WithinAbs(0.5, 0.01));
  CHECK_THROWS_AS(draw_sample(kCoin, 0, RngSpec{}), InputError);
}

TEST_CASE("bootstrap_resample") {
  const EmpiricalMeasure one(kCoin, {4, 0});
  CHECK(bootstrap_resample(one, 7, RngSpec{1, 1}).count(0) == 7);

  const EmpiricalMeasure emp(kCoin, {3, 2});
  CHECK(bootstrap_resample(emp, 11, RngSpec{2, 2}).n() == 11);

  // counts (1,1), k = 2: outcomes (2,0), (1,1), (0,2) with 1/4, 1/2, 1/4.
  const EmpiricalMeasure even(kCoin, {1, 1});
  const int trials = 100000;
  int tally[3] = {0, 0, 0};
  for (int t = 0; t < trials; ++t) ++tally[bootstrap_resample(even, 2, RngSpec{5, static_cast<std::uint64_t>(t)}).count(1)];
  const double expect[3] = {0.25, 0.5, 0.25};
  for (int i = 0; i < 3; ++i) {
    const double se = std::sqrt(expect[i] * (1 - expect[i]) / trials);
    CHECK_THAT(tally[i] / static_cast<double>(trials), WithinAbs(expect[i], 3 * se));
  }
}

TEST_CASE("exact conditional tail") {
  const EmpiricalMeasure emp(kCoin, {1, 1});
  const TailEstimate e = exact_conditional_tail(emp, kId, 0.4, 2);
  CHECK_THAT(e.p_hat, WithinAbs(0.25, 1e-15));
  CHECK(e.std_err == 0.0);
  CHECK(e.method == EstimatorMethod::exact);
  CHECK_THAT(exact_conditional_tail(emp, kId, -1.0, 2).p_hat, WithinAbs(1.0, 1e-15));
  CHECK(exact_conditional_tail(emp, kId, 2.0, 2).p_hat == 0.0);

  // Strict inequality: deviation exactly 0.5 does not exceed 0.5.
  CHECK(exact_conditional_tail(emp, kId, 0.5, 2).p_hat == 0.0);

  const FiniteProbabilityMeasure wide = FiniteProbabilityMeasure::uniform({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  std::vector<std::uint64_t> ones(10, 1);
  const EmpiricalMeasure spread(wide, ones);
  CHECK(multinomial_outcomes(40, 10) > kEnumerationBudget);
  CHECK_THROWS_AS(exact_conditional_tail(spread, TestFunction({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), 0.0, 40),
                  ComplexityError);
}

TEST_CASE("exact enumeration against ordered resamples") {
  std::mt19937_64 gen(77);
  for (int c = 0; c < 200; ++c) {
    const std::size_t m = 2 + gen() % 2;
    std::vector<std::uint64_t> counts(m);
    for (auto& x : counts) x = gen() % 4;
    counts[gen() % m] += 1;
    const std::vector<double> fv = checks::random_values(gen, m, -2, 2);
    const std::uint64_t k = 1 + gen() % 6;
    std::vector<double> pts(m);
    for (std::size_t i = 0; i < m; ++i) pts[i] = static_cast<double>(i);
    const EmpiricalMeasure emp(FiniteProbabilityMeasure::uniform(pts), counts);
    const double theta = std::uniform_real_distribution<double>(-2, 2)(gen);
    const double a = exact_conditional_tail(emp, TestFunction(fv), theta, k).p_hat;
    const double b = checks::ordered_resample_tail(counts, fv, theta, k);
    CHECK_THAT(a, WithinAbs(b, 1e-12));
  }
}

TEST_CASE("naive Monte Carlo") {
  const EmpiricalMeasure emp(kCoin, {1, 1});
  const TailEstimate e = mc_conditional_tail(emp, kId, 0.4, 2, 100000, RngSpec{3, 3});
  CHECK_THAT(e.p_hat, WithinAbs(0.25, 3 * e.std_err));
  CHECK_THAT(e.std_err, WithinRel(std::sqrt(e.p_hat * (1 - e.p_hat) / 100000), 1e-12));
  CHECK(mc_conditional_tail(emp, kId, -1.0, 2, 1000, RngSpec{3, 4}).p_hat == 1.0);
  CHECK_THROWS_AS(mc_conditional_tail(emp, kId, 0.4, 2, 50, RngSpec{}), InputError);
}

TEST_CASE("exponential tilting") {
  const EmpiricalMeasure emp(kCoin, {1, 1});

  SECTION("zero tilt agrees with naive") {
    const Tilt t = solve_tilt(std::vector<double>{0.5, 0.5}, kId, 0.5);
    CHECK(t.z == 0.0);
    const TailEstimate tl = tilted_conditional_tail(emp, kId, 0.0, 6, 20000, RngSpec{8, 1});
    const TailEstimate nv = mc_conditional_tail(emp, kId, 0.0, 6, 20000, RngSpec{8, 2});
    CHECK(std::abs(tl.p_hat - nv.p_hat) <= 3 * std::hypot(tl.std_err, nv.std_err));
  }
  SECTION("oracle case with smaller error than naive") {
    const TailEstimate tl = tilted_conditional_tail(emp, kId, 0.4, 2, 20000, RngSpec{8, 3});
    const TailEstimate nv = mc_conditional_tail(emp, kId, 0.4, 2, 20000, RngSpec{8, 4});
    CHECK_THAT(tl.p_hat, WithinAbs(0.25, 3 * tl.std_err));
    CHECK(tl.std_err < nv.std_err);
  }
  SECTION("deep tail of Bin(100, 1/2)") {
    const EmpiricalMeasure hundred(kCoin, {50, 50});
    const double exact = exact_conditional_tail(hundred, kId, 0.45, 100).p_hat;
    const boost::math::binomial bin(100, 0.5);
    CHECK_THAT(exact, WithinRel(boost::math::cdf(boost::math::complement(bin, 95.0)), 1e-9));
    const TailEstimate tl = tilted_conditional_tail(hundred, kId, 0.45, 100, 10000, RngSpec{8, 5});
    CHECK(std::abs(tl.p_hat - exact) <= 3 * tl.std_err);
    CHECK(mc_conditional_tail(hundred, kId, 0.45, 100, 10000, RngSpec{8, 6}).p_hat == 0.0);
  }
  SECTION("typical event below the mean") {
    const EmpiricalMeasure hundred(kCoin, {50, 50});
    const double exact = exact_conditional_tail(hundred, kId, -0.105, 100).p_hat;
    const boost::math::binomial bin(100, 0.5);
    CHECK_THAT(exact, WithinRel(boost::math::cdf(boost::math::complement(bin, 39.0)), 1e-9));
    const TailEstimate tl = tilted_conditional_tail(hundred, kId, -0.105, 100, 10000, RngSpec{8, 7});
    CHECK(tl.p_hat < 1.0);
    CHECK(std::abs(tl.p_hat - exact) <= 3 * tl.std_err);
    CHECK(tl.std_err < 1e-3);
  }
  SECTION("infeasible targets") {
    CHECK_THROWS_AS(tilted_conditional_tail(emp, kId, 0.5, 4, 1000, RngSpec{}), InfeasibleError);
    CHECK_THROWS_AS(tilted_conditional_tail(emp, kId, -0.7, 4, 1000, RngSpec{}), InfeasibleError);
  }
  SECTION("tilted weights hit the target mean") {
    const std::vector<double> q{0.2, 0.3, 0.5};
    const TestFunction f({-1.0, 0.5, 2.0});
    const Tilt t = solve_tilt(q, f, 1.5);
    double mean = 0.0, total = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      mean += t.weights[i] * f[i];
      total += t.weights[i];
    }
    CHECK_THAT(total, WithinAbs(1.0, 1e-12));
    CHECK_THAT(mean, WithinAbs(1.5, 1e-8));
  }
}

TEST_CASE("estimator dispatch") {
  CHECK(parse_method("naive") == EstimatorMethod::naive);
  CHECK(parse_method("exact") == EstimatorMethod::exact);
  CHECK(parse_method("tilted") == EstimatorMethod::tilted);
  CHECK_THROWS_AS(parse_method("bogus"), InputError);
  const EmpiricalMeasure emp(kCoin, {1, 1});
  CHECK(conditional_tail(EstimatorMethod::exact, emp, kId, 0.4, 2, 100, RngSpec{}).p_hat == 0.25);
}

TEST_CASE("heavy-tailed bootstrap sums") {
  const TailModel w = TailModel::stretched_exponential(0.5);
  CHECK(heavy_tail_sum_mc(w, 100, kInf, 100, RngSpec{1, 1}).p_hat == 0.0);

  // Threshold below the mean: the event becomes certain as n grows.
  const double small = heavy_tail_sum_mc(w, 10, 1.0, 2000, RngSpec{1, 10}).p_hat;
  const double large = heavy_tail_sum_mc(w, 1000, 1.0, 400, RngSpec{1, 1000}).p_hat;
  CHECK(small < large);
  CHECK(large > 0.95);

  const SumDiagnostics d = heavy_tail_sum_mc_diagnostics(w, 100, 1.0, 100, RngSpec{1, 9});
  CHECK(d.max_observation > 0.0);
  CHECK(d.estimate.p_hat == heavy_tail_sum_mc(w, 100, 1.0, 100, RngSpec{1, 9}).p_hat);
}

TEST_CASE("Gaussian sandwich") {
  const GaussianSandwich s = gaussian_sandwich(6, 1.0, 20.0);
  CHECK_THAT(s.l_low, WithinAbs(-0.1, 1e-15));
  CHECK_THAT(s.l_high, WithinAbs(6.0 / 42.0, 1e-15));
  CHECK_THAT(s.l_high, WithinAbs(0.142857, 5e-7));

  const GaussianSandwich inf = gaussian_sandwich(6, 1.0, kInf);
  CHECK(inf.l_low == 0.0);
  CHECK(inf.l_high == 0.0);
  const GaussianSandwich big = gaussian_sandwich(6, 1.0, 1e12);
  CHECK(std::abs(big.l_low) < 1e-11);
  CHECK(std::abs(big.l_high) < 1e-11);

  CHECK(gaussian_sandwich(1'000'000, 0.11, 17.0).err_factor == 6.0);
  CHECK_THROWS_AS(gaussian_sandwich(6, 1.0, 1.0), InputError);

  const SandwichEnvelope env = sandwich_envelope(400, 0.2, 20.0);
  CHECK(env.lower <= env.lower_unwidened);
  CHECK(env.upper >= env.upper_unwidened);
  CHECK_THAT(env.gaussian_tail, WithinRel(normal_upper_tail(4.0), 1e-15));
  CHECK_THAT(normal_upper_tail(0.0), WithinAbs(0.5, 1e-16));
  CHECK_THAT(normal_upper_tail(10.0), WithinRel(7.619853024160527e-24, 1e-12));
}

TEST_CASE("joint tail") {
  const TestFunction f({-1.0, 1.0});
  const FiniteProbabilityMeasure rad(std::vector<double>{-1.0, 1.0}, {0.5, 0.5});
  CHECK(joint_tail_mc(rad, 10, 10, f, f, -kInf, -kInf, 100, RngSpec{1, 1}).p_hat == 1.0);

  // n = k = 2, f = g = x on a fair coin. Outer counts (2,0), (1,1), (0,2)
  // have probabilities 1/4, 1/2, 1/4 and empirical deviations -1/2, 0, 1/2.
  // An all-ones outer sample cannot move under resampling; (1,1) moves by
  // 1/2 with probability 1/4.
  CHECK(exact_joint_tail(kCoin, 2, 2, kId, kId, 0.4, 0.4).p_hat == 0.0);
  CHECK_THAT(exact_joint_tail(kCoin, 2, 2, kId, kId, -0.1, 0.4).p_hat, WithinAbs(0.25, 1e-15));
  CHECK_THAT(exact_joint_tail(kCoin, 2, 2, kId, kId, 0.4, -0.1).p_hat, WithinAbs(0.125, 1e-15));

  const JointTailCounts c = joint_tail_counts(kCoin, 2, 2, kId, kId, 0.4, -0.1, 100000, RngSpec{2, 2});
  const TailEstimate j = frequency_estimate(c.joint_hits, c.trials);
  CHECK_THAT(j.p_hat, WithinAbs(0.125, 3 * j.std_err));
  CHECK(c.joint_hits <= c.boot_hits);
  CHECK(c.joint_hits <= c.emp_hits);

  // Antisymmetric f = g on a symmetric law: the two events at threshold 0
  // are asymptotically independent.
  const JointTailCounts big = joint_tail_counts(rad, 400, 400, f, f, 0.0, 0.0, 20000, RngSpec{3, 3});
  const double pb = big.boot_hits / 20000.0, pe = big.emp_hits / 20000.0, pj = big.joint_hits / 20000.0;
  const double se = std::sqrt(pb * pe * (1 - pb * pe) / 20000.0);
  CHECK(std::abs(pj - pb * pe) <= 3 * se + 3 * std::sqrt(pj * (1 - pj) / 20000.0));
}

TEST_CASE("simulate invariants over random instances") {
  for (const auto& r : checks::simulate_properties(1000, 404)) {
    INFO(checks::describe(r));
    CHECK(r.pass);
  }
}

TEST_CASE("oracle closure at reduced scale") {
  const auto r = checks::oracle_equivalence(5, 20, 20000, 405);
  INFO(checks::describe(r));
  CHECK(r.pass);
}
