#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace mdpboot {

enum class TailFamily { bounded, power, stretched_exponential };

/// Distribution of Y = |f(X)| through its survival function.
///
///   bounded(B):               Y ~ Uniform(0, B), P(Y > u) = 0 for u >= B
///   power(t):                 Pareto, P(Y > u) = u^-t for u >= 1, t > 2
///   stretched_exponential(g): Weibull, P(Y > u) = exp(-u^g), g > 0
class TailModel {
 public:
  static TailModel bounded(double bound = 1.0);
  static TailModel power(double t);
  static TailModel stretched_exponential(double gamma);

  TailFamily family() const noexcept { return family_; }
  /// B, t or gamma depending on the family.
  double parameter() const noexcept { return param_; }

  double survival(double u) const;
  double log_survival(double u) const;
  /// h(s) = P(Y > 1/s).
  double h(double s) const;
  /// Inverse-CDF transform of u in (0, 1].
  double quantile_from_upper(double u) const;
  double mean() const;

 private:
  TailModel(TailFamily family, double param) : family_(family), param_(param) {}
  TailFamily family_;
  double param_;
};

/// s_n = A n^-beta (log n)^-mu, a decreasing normalising sequence.
struct SequenceFamily {
  double scale = 1.0;
  double beta = 0.0;
  double mu = 0.0;

  SequenceFamily(double scale, double beta, double mu);
  double at(double n) const;
};

/// s_n = scale * n^poly * (log n)^log, with no sign restrictions. Used for the
/// growing sequences r_n, f_n and for e_n.
struct PowerLog {
  double scale = 1.0;
  double poly = 0.0;
  double log = 0.0;

  double at(double n) const;
  double log_at(double n) const;
};

enum class Verdict { satisfied, violated, boundary };
std::string_view to_string(Verdict v);

/// (n b_n^2)^-1 log(n P(Y > 1/b_n)) -> -inf ?
Verdict check_phi_membership(const TailModel& tail, const SequenceFamily& b);
/// The finite-n quantity whose limit check_phi_membership decides (-inf when
/// the probability vanishes).
double phi_functional(const TailModel& tail, const SequenceFamily& b, double n);

/// (n d_n^2)^-1 log(n P(Y > n d_n)) -> -inf ?
Verdict check_psi_membership(const TailModel& tail, const SequenceFamily& d);
double psi_functional(const TailModel& tail, const SequenceFamily& d, double n);

enum class ThetaMode { summable, vanishing };

/// sum_n h(c a_n) < inf (summable) or n h(c a_n) -> 0 (vanishing), for every c > 0.
Verdict check_theta_conditions(const TailModel& tail, const SequenceFamily& a, ThetaMode mode);

/// Critical exponents of the moderate-deviation zones for a stretched-exponential tail.
struct ZoneReport {
  double gamma = 0.0;
  /// b_n = o(n^-x), x = 1/(1+gamma), as stated in the joint-MDP example.
  double b_exponent_stated = 0.0;
  /// x = 1/(2+gamma): substitution into the Phi condition; also the value used
  /// by the bootstrap-instability example.
  double b_exponent_from_phi = 0.0;
  /// d_n = o(n^-x), x = (1-gamma)/(2-gamma); empty when gamma = 2.
  std::optional<double> d_exponent;
  /// Every polynomially decaying d_n qualifies (gamma >= 1).
  bool d_unbounded = false;
  /// a_n = o((log n)^-x), x = gamma, as stated.
  double a_log_exponent_stated = 0.0;
  /// x = 1/gamma from the summability condition with a pure log sequence.
  double a_log_exponent_from_summability = 0.0;
};

/// Throws InputError for non-stretched-exponential tails.
ZoneReport zone_report(const TailModel& tail);

/// r_n = n^{1/(2+g)} f_n and e_n = n^{-1/(2+g)} f_n^{g/2-d} from the instability
/// construction; `valid` when (log n)^{1/(1+g/2-d)} << f_n << n^{g/((2+g)(1+d))}.
struct InstabilityZone {
  PowerLog r;
  PowerLog e;
  bool valid = false;
  double lower_log_exponent = 0.0;
  double upper_poly_exponent = 0.0;
};

InstabilityZone instability_zone(double gamma, double delta, const PowerLog& f);

/// b_n^-1 < r_n eventually, e_n / b_n -> inf and n e_n / r_n -> inf.
bool instability_hypotheses_hold(const InstabilityZone& zone, const PowerLog& b);

struct ConvergenceGuard {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double kappa = 1.0;
};

/// kappa_n = 1 - C (beta_1n + beta_2n) clamped to [0,1] with
/// beta_1n = n h(a_n / (eps C1)) and beta_2n = C2 n^{1-t/2}.
ConvergenceGuard convergence_guard(std::uint64_t n, double t, const TailModel& tail, double a_n,
                                   double eps, double c, double c1, double c2);

}  // namespace mdpboot
