#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mdpboot/measures.h"

namespace mdpboot {

/// Sentinel for infeasible sets and missing absolute continuity. Printed as "inf".
inline constexpr double kInfiniteRate = std::numeric_limits<double>::infinity();

/// Active-set enumeration visits 2^l patterns; l is capped here.
inline constexpr std::size_t kMaxInequalityConstraints = 12;

/// Residual tolerance for least-norm solves, relative to the right-hand side.
inline constexpr double kLeastNormResidualTolerance = 1e-8;

/// Fisher-information rate 1/2 * sum g_i^2 p_i.
double rate_of(const SignedMeasureDensity& g);

struct RateSolution {
  double rate = kInfiniteRate;
  std::optional<SignedMeasureDensity> argmin;

  bool feasible() const noexcept { return argmin.has_value(); }
};

/// Closed form for {G : int f dG >= c}: rate max(c,0)^2 / (2 Var_P f) attained
/// by g* = c (f - E_P f) / Var_P f. Reports +inf when Var_P f = 0 and c > 0.
RateSolution min_rate_halfspace(const FiniteProbabilityMeasure& p, const TestFunction& f, double c);

enum class ConstraintKind { equality, at_least };

/// int f dG = c, or int f dG >= c.
class LinearConstraint {
 public:
  LinearConstraint(TestFunction f, ConstraintKind kind, double c);

  const TestFunction& f() const noexcept { return f_; }
  ConstraintKind kind() const noexcept { return kind_; }
  double c() const noexcept { return c_; }

 private:
  TestFunction f_;
  ConstraintKind kind_;
  double c_;
};

class ConstraintSet {
 public:
  ConstraintSet(FiniteProbabilityMeasure base, std::vector<LinearConstraint> constraints);

  const FiniteProbabilityMeasure& base() const noexcept { return base_; }
  const std::vector<LinearConstraint>& constraints() const noexcept { return constraints_; }
  std::size_t size() const noexcept { return constraints_.size(); }

 private:
  FiniteProbabilityMeasure base_;
  std::vector<LinearConstraint> constraints_;
};

/// Per-constraint values <f_j, H>; subtracted from each right-hand side.
struct ShiftVector {
  std::vector<double> values;
};

/// Minimum of rate_of over densities satisfying every constraint.
///
/// The minimiser lies in the span of the centred constraint functions, so
/// the problem reduces to a least-norm solve against their covariance
/// structure. Inequalities are handled by enumerating which of them are
/// active (at most kMaxInequalityConstraints). Returns rate +inf with no
/// argmin when the constraints are inconsistent.
RateSolution min_rate_linear(const ConstraintSet& cs,
                             const std::optional<ShiftVector>& shift = std::nullopt);

/// nu * rate_of(g2) + rate_of(g1).
double joint_rate(const SignedMeasureDensity& g2, const SignedMeasureDensity& g1, double nu);

/// 1/2 (y - fH)' Rf^+ (y - fH) + 1/2 z' Rg^+ z with +inf for directions
/// outside the column space of a singular covariance.
double finite_dim_rate(const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                       const Eigen::MatrixXd& r_f, const Eigen::MatrixXd& r_g,
                       const Eigen::VectorXd& f_h);

/// Covariance matrix Cov_P(f_j, f_k).
Eigen::MatrixXd covariance_matrix(const FiniteProbabilityMeasure& p,
                                  const std::vector<TestFunction>& fs);

}  // namespace mdpboot
