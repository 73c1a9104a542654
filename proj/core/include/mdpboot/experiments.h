#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mdpboot/io.h"
#include "mdpboot/measures.h"
#include "mdpboot/simulate.h"
#include "mdpboot/zones.h"

namespace mdpboot {

enum class Scenario { conditional, joint, instability, sandwich };
std::string_view to_string(Scenario s);

struct ExperimentConfig {
  Scenario scenario = Scenario::conditional;
  std::optional<FiniteProbabilityMeasure> distribution;
  /// Where the distribution came from ("inline" or a path), for the manifest.
  std::string distribution_source;
  std::vector<double> f;
  std::vector<double> g;
  /// Half-space level c (bootstrap side in the joint scenario); events use c a_n.
  double threshold = 1.0;
  /// Empirical-side level in the joint scenario.
  double threshold_emp = 0.0;
  /// a_n in the conditional scenario, b_n in the joint one.
  SequenceFamily a_n{1.0, 0.35, 0.0};
  /// k_n = ceil(nu n).
  double nu = 1.0;
  std::vector<std::uint64_t> n_grid;
  std::uint64_t trials = 1000;
  EstimatorMethod method = EstimatorMethod::tilted;
  std::uint64_t seed = 0;
  /// CSV destination; the manifest goes beside it as <stem>.manifest.json.
  std::string output;
  double rel_tol = 0.2;
  std::size_t workers = 0;

  // instability
  std::optional<TailModel> tail;
  double delta = 0.2;
  PowerLog f_n{1.0, 0.0, 2.0};
  double gaussian_sigma = 1.0;
  double normalized_threshold = -0.1;
  double gaussian_threshold = -0.4;

  // sandwich
  double omega = 20.0;
  std::uint64_t k = 400;
  std::vector<double> x_grid;
  double truncation_gamma = 1.0;
};

/// Checks the cross-field invariants (increasing n-grid, trials >= 100, nu > 0,
/// scenario-specific fields present). Throws InputError.
void validate(const ExperimentConfig& cfg);

/// Parses a JSON config; relative distribution paths resolve against base_dir.
ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// k_n = ceil(nu n).
std::uint64_t bootstrap_size(double nu, std::uint64_t n);

struct DecayRow {
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  double a_n = 0.0;
  double p_hat = 0.0;
  double std_err = 0.0;
  /// k a_n^2.
  double scale = 0.0;
  /// -log(p_hat) / scale; +inf when p_hat = 0.
  double normalized = 0.0;
  bool flagged = false;
  std::string note;
};

/// Row for a given estimate, flagging p_hat = 0.
DecayRow make_decay_row(std::uint64_t n, std::uint64_t k, double a_n, const TailEstimate& est);

/// Conditional scenario: one outer sample per n, then the configured estimator
/// of P(int f d(P* - Phat) > c a_n | Phat). Estimator infeasibility flags the row.
std::vector<DecayRow> run_decay_experiment(const ExperimentConfig& cfg);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Half-width of the 95% confidence interval for the slope.
  double ci_halfwidth = 0.0;
  std::size_t points = 0;
};

/// Least squares of y on x with a t-based 95% interval; needs >= 3 points.
SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Least squares of -log p_hat on k a_n^2 over rows with finite normalized values.
SlopeFit fit_rate_slope(const std::vector<DecayRow>& rows);

enum class VerdictStatus { pass, fail, theory_infinite };
std::string_view to_string(VerdictStatus s);

struct TheoryVerdict {
  VerdictStatus status = VerdictStatus::fail;
  double slope = 0.0;
  double ci_halfwidth = 0.0;
  double theory = 0.0;
  double gap = 0.0;
  double rel_tol = 0.0;
  std::string message;
};

/// PASS when |slope - theory| <= rel_tol theory or the interval covers theory.
TheoryVerdict verify_against_theory(const SlopeFit& fit, double theoretical_rate, double rel_tol);

struct JointRow {
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  double b_n = 0.0;
  JointTailCounts counts;
  /// k b_n^2 and n b_n^2.
  double boot_scale = 0.0;
  double emp_scale = 0.0;
};

struct JointReport {
  std::vector<JointRow> rows;
  std::optional<SlopeFit> boot_fit;
  std::optional<SlopeFit> emp_fit;
  std::optional<SlopeFit> joint_fit;
  double boot_theory = 0.0;
  double emp_theory = 0.0;
  /// nu r_boot + r_emp from the marginal fits.
  double predicted_joint = 0.0;
  double relative_gap = 0.0;
  bool pass = false;
};

JointReport run_joint_experiment(const ExperimentConfig& cfg);

struct InstabilityRow {
  std::uint64_t n = 0;
  double e_n = 0.0;
  double r_n = 0.0;
  TailEstimate estimate;
  /// log(p_hat) / (n e_n^2).
  double normalized = 0.0;
  /// log(1 - Phi(sqrt(n) e_n / sigma)) / (n e_n^2).
  double gaussian = 0.0;
  TailEstimate centered;
  double centered_normalized = 0.0;
  double max_observation = 0.0;
};

struct InstabilityReport {
  InstabilityZone zone;
  std::vector<InstabilityRow> rows;
  bool pass = false;
};

/// Requires a stretched-exponential tail and a valid zone (InputError otherwise).
InstabilityReport run_instability_experiment(const ExperimentConfig& cfg);

struct SandwichRow {
  double x = 0.0;
  double a = 0.0;
  TailEstimate estimate;
  GaussianSandwich bounds;
  SandwichEnvelope envelope;
  bool inside = false;
  bool inside_unwidened = false;
  bool truncation_ok = true;
};

struct SandwichReport {
  std::vector<SandwichRow> rows;
  bool pass = false;
};

/// Tilted estimates of P(int f d(P*_k - P) > sigma a) against the Gaussian
/// sandwich, one row per x = sqrt(k) a in the grid.
SandwichReport run_sandwich_experiment(const ExperimentConfig& cfg);

struct ExperimentResult {
  CsvTable table;
  std::string manifest_json;
  bool pass = false;
  std::string summary;
};

/// Runs the configured scenario and renders its CSV table and manifest.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes the CSV to cfg.output and the manifest beside it; returns the manifest path.
std::filesystem::path write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result);

/// Library version string.
std::string_view version();

}  // namespace mdpboot
