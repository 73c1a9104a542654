#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mdpboot/measures.h"
#include "mdpboot/rng.h"
#include "mdpboot/zones.h"

namespace mdpboot {

enum class EstimatorMethod { naive, exact, tilted };
std::string_view to_string(EstimatorMethod m);
/// Parses "naive", "exact" or "tilted"; throws InputError otherwise.
EstimatorMethod parse_method(std::string_view name);

struct TailEstimate {
  double p_hat = 0.0;
  double std_err = 0.0;
  std::uint64_t trials = 0;
  EstimatorMethod method = EstimatorMethod::naive;
};

/// Outcome count above which exact enumeration refuses to run.
inline constexpr std::uint64_t kEnumerationBudget = 10'000'000;
inline constexpr std::uint64_t kMinTrials = 100;

/// Common knobs for Monte Carlo estimators. workers = 0 picks default_workers().
struct SimOptions {
  std::size_t workers = 0;
};

/// n categorical draws from P by inverse CDF.
EmpiricalMeasure draw_sample(const FiniteProbabilityMeasure& p, std::uint64_t n, RngSpec rng);

/// k draws with replacement from the frequencies of emp, over the same support.
EmpiricalMeasure bootstrap_resample(const EmpiricalMeasure& emp, std::uint64_t k, RngSpec rng);

/// int f d(P*_k - Phat): (sum_i f_i c_i)/k - mean, evaluated identically by
/// every estimator so that ties resolve the same way.
double bootstrap_deviation(const TestFunction& f, std::span<const std::uint64_t> counts,
                           std::uint64_t k, double base_mean);

/// Number of bootstrap count vectors, C(k+m-1, m-1), saturating at UINT64_MAX.
std::uint64_t multinomial_outcomes(std::uint64_t k, std::size_t m);

/// P(int f d(P*_k - Phat) > theta | Phat) by full enumeration.
TailEstimate exact_conditional_tail(const EmpiricalMeasure& emp, const TestFunction& f, double theta,
                                    std::uint64_t k);

/// Fraction of `trials` bootstrap resamples whose deviation exceeds theta.
TailEstimate mc_conditional_tail(const EmpiricalMeasure& emp, const TestFunction& f, double theta,
                                 std::uint64_t k, std::uint64_t trials, RngSpec rng,
                                 const SimOptions& opts = {});

/// Exponential tilt of weights q: z with sum_i w_i f_i = target, w ∝ q e^{z f}.
struct Tilt {
  double z = 0.0;
  /// Cumulant K(z) = log sum_i q_i e^{z f_i}.
  double cumulant = 0.0;
  std::vector<double> weights;
};

/// Bisection on K'(z) = target; target must lie strictly inside the range of f
/// over atoms with positive weight.
Tilt solve_tilt(std::span<const double> q, const TestFunction& f, double target);

/// Importance-sampling estimate that draws bootstrap resamples from the tilted
/// weights and reweights by the likelihood ratio exp(k K(z) - z sum f_i c_i).
/// For a negative tilt it estimates the complement event and returns 1 minus that.
TailEstimate tilted_conditional_tail(const EmpiricalMeasure& emp, const TestFunction& f, double theta,
                                     std::uint64_t k, std::uint64_t trials, RngSpec rng,
                                     const SimOptions& opts = {});
/// Same with the resampling weights given directly.
TailEstimate tilted_conditional_tail(const FiniteProbabilityMeasure& weights, const TestFunction& f,
                                     double theta, std::uint64_t k, std::uint64_t trials, RngSpec rng,
                                     const SimOptions& opts = {});

/// Dispatches to the exact, naive or tilted estimator.
TailEstimate conditional_tail(EstimatorMethod method, const EmpiricalMeasure& emp,
                              const TestFunction& f, double theta, std::uint64_t k,
                              std::uint64_t trials, RngSpec rng, const SimOptions& opts = {});

/// Event for the heavy-tailed bootstrap sum. `none` is sum Y*_i > n e_n;
/// `sample_mean` subtracts the sample mean first, sum (Y*_i - Ybar) > n e_n.
enum class SumCentering { none, sample_mean };

/// Draw Y_1..Y_n from the tail model, resample n values with replacement and
/// test the sum event. Frequency estimate over `trials` independent pairs.
TailEstimate heavy_tail_sum_mc(const TailModel& tail, std::uint64_t n, double e_n,
                               std::uint64_t trials, RngSpec rng,
                               SumCentering centering = SumCentering::none,
                               const SimOptions& opts = {});

/// Largest |Y| in any outer sample, recorded alongside heavy_tail_sum_mc.
struct SumDiagnostics {
  TailEstimate estimate;
  double max_observation = 0.0;
};
SumDiagnostics heavy_tail_sum_mc_diagnostics(const TailModel& tail, std::uint64_t n, double e_n,
                                             std::uint64_t trials, RngSpec rng,
                                             SumCentering centering = SumCentering::none,
                                             const SimOptions& opts = {});

struct GaussianSandwich {
  double l_low = 0.0;
  double l_high = 0.0;
  double err_factor = 0.0;
};

/// Bounds on L in (1 - Phi(sqrt(k) a)) exp{L} with the error factor.
GaussianSandwich gaussian_sandwich(std::uint64_t k, double a, double omega);

struct SandwichEnvelope {
  double gaussian_tail = 0.0;  ///< 1 - Phi(sqrt(k) a)
  double lower = 0.0;
  double upper = 0.0;
  double lower_unwidened = 0.0;
  double upper_unwidened = 0.0;
};

/// Probability band [gaussian_tail e^{l_low} (1 - err)_+, gaussian_tail e^{l_high} (1 + err)].
SandwichEnvelope sandwich_envelope(std::uint64_t k, double a, double omega);

/// Standard normal upper tail 1 - Phi(x), accurate deep in the tail.
double normal_upper_tail(double x);

struct JointTailCounts {
  std::uint64_t trials = 0;
  std::uint64_t boot_hits = 0;
  std::uint64_t emp_hits = 0;
  std::uint64_t joint_hits = 0;
};

/// One outer sample of size n from P and one bootstrap resample of size k per
/// trial, counting {int g d(P* - Phat) > theta_boot}, {int f d(Phat - P) > theta_emp}
/// and their intersection.
JointTailCounts joint_tail_counts(const FiniteProbabilityMeasure& p, std::uint64_t n, std::uint64_t k,
                                  const TestFunction& f, const TestFunction& g, double theta_boot,
                                  double theta_emp, std::uint64_t trials, RngSpec rng,
                                  const SimOptions& opts = {});

/// Frequency of the joint event.
TailEstimate joint_tail_mc(const FiniteProbabilityMeasure& p, std::uint64_t n, std::uint64_t k,
                           const TestFunction& f, const TestFunction& g, double theta_boot,
                           double theta_emp, std::uint64_t trials, RngSpec rng,
                           const SimOptions& opts = {});

/// Frequency estimate from a hit count.
TailEstimate frequency_estimate(std::uint64_t hits, std::uint64_t trials);

/// Exact joint probability by nested enumeration of outer and inner counts.
TailEstimate exact_joint_tail(const FiniteProbabilityMeasure& p, std::uint64_t n, std::uint64_t k,
                              const TestFunction& f, const TestFunction& g, double theta_boot,
                              double theta_emp);

}  // namespace mdpboot
