#include "mdpboot/zones.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mdpboot/errors.h"

namespace mdpboot {
namespace {

constexpr double kExponentTolerance = 1e-12;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool near(double a, double b) { return std::abs(a - b) <= kExponentTolerance; }

// Sign of the asymptotic order n^poly (log n)^log relative to a constant:
// +1 grows without bound, -1 vanishes, 0 stays bounded away from both.
int growth(double poly, double log) {
  if (poly > kExponentTolerance) return 1;
  if (poly < -kExponentTolerance) return -1;
  if (log > kExponentTolerance) return 1;
  if (log < -kExponentTolerance) return -1;
  return 0;
}

// satisfied / boundary / violated from the sign of the leading exponent pair.
Verdict classify(double poly, double log) {
  switch (growth(poly, log)) {
    case 1: return Verdict::satisfied;
    case 0: return Verdict::boundary;
    default: return Verdict::violated;
  }
}

bool tends_to_zero(const SequenceFamily& s) { return growth(-s.beta, -s.mu) < 0; }

}  // namespace

TailModel TailModel::bounded(double bound) {
  if (!(bound > 0.0) || !std::isfinite(bound)) throw InputError("bounded tail: bound must be positive");
  return TailModel(TailFamily::bounded, bound);
}

TailModel TailModel::power(double t) {
  if (!(t > 2.0) || !std::isfinite(t)) throw InputError("power tail: exponent t must exceed 2");
  return TailModel(TailFamily::power, t);
}

TailModel TailModel::stretched_exponential(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InputError("stretched-exponential tail: gamma must be positive");
  }
  return TailModel(TailFamily::stretched_exponential, gamma);
}

double TailModel::survival(double u) const {
  switch (family_) {
    case TailFamily::bounded:
      if (u <= 0.0) return 1.0;
      return u >= param_ ? 0.0 : 1.0 - u / param_;
    case TailFamily::power:
      return u <= 1.0 ? 1.0 : std::pow(u, -param_);
    case TailFamily::stretched_exponential:
      return u <= 0.0 ? 1.0 : std::exp(-std::pow(u, param_));
  }
  return 0.0;
}

double TailModel::log_survival(double u) const {
  switch (family_) {
    case TailFamily::bounded:
      if (u <= 0.0) return 0.0;
      return u >= param_ ? kNegInf : std::log1p(-u / param_);
    case TailFamily::power:
      return u <= 1.0 ? 0.0 : -param_ * std::log(u);
    case TailFamily::stretched_exponential:
      return u <= 0.0 ? 0.0 : -std::pow(u, param_);
  }
  return kNegInf;
}

double TailModel::h(double s) const {
  if (!(s > 0.0)) throw InputError("h(s) requires s > 0");
  return survival(1.0 / s);
}

double TailModel::quantile_from_upper(double u) const {
  switch (family_) {
    case TailFamily::bounded: return param_ * (1.0 - u);
    case TailFamily::power: return std::pow(u, -1.0 / param_);
    case TailFamily::stretched_exponential: return std::pow(-std::log(u), 1.0 / param_);
  }
  return 0.0;
}

double TailModel::mean() const {
  switch (family_) {
    case TailFamily::bounded: return 0.5 * param_;
    case TailFamily::power: return param_ / (param_ - 1.0);
    case TailFamily::stretched_exponential: return std::tgamma(1.0 + 1.0 / param_);
  }
  return 0.0;
}

SequenceFamily::SequenceFamily(double scale_, double beta_, double mu_)
    : scale(scale_), beta(beta_), mu(mu_) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InputError("sequence scale A must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InputError("sequence exponent beta must be >= 0");
  if (!std::isfinite(mu)) throw InputError("sequence log exponent mu must be finite");
}

double SequenceFamily::at(double n) const {
  if (!(n >= 2.0)) throw InputError("sequence families are evaluated for n >= 2");
  return scale * std::pow(n, -beta) * std::pow(std::log(n), -mu);
}

double PowerLog::at(double n) const { return std::exp(log_at(n)); }

double PowerLog::log_at(double n) const {
  if (!(n >= 2.0)) throw InputError("sequence families are evaluated for n >= 2");
  if (!(scale > 0.0)) throw InputError("power-log sequence needs a positive scale");
  return std::log(scale) + poly * std::log(n) + log * std::log(std::log(n));
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::satisfied: return "satisfied";
    case Verdict::violated: return "violated";
    case Verdict::boundary: return "boundary";
  }
  return "unknown";
}

Verdict check_phi_membership(const TailModel& tail, const SequenceFamily& b) {
  switch (tail.family()) {
    case TailFamily::bounded:
      return tends_to_zero(b) ? Verdict::satisfied : Verdict::violated;
    case TailFamily::power:
      return Verdict::violated;
    case TailFamily::stretched_exponential: {
      if (b.beta <= kExponentTolerance) return Verdict::violated;
      const double g = tail.parameter();
      // log(n P) / (n b^2) ~ -A^{-g-2} n^{b(g+2)-1} (log n)^{mu(g+2)}
      return classify(b.beta * (g + 2.0) - 1.0, b.mu * (g + 2.0));
    }
  }
  return Verdict::violated;
}

double phi_functional(const TailModel& tail, const SequenceFamily& b, double n) {
  const double bn = b.at(n);
  const double log_p = tail.log_survival(1.0 / bn);
  if (std::isinf(log_p)) return kNegInf;
  return (std::log(n) + log_p) / (n * bn * bn);
}

Verdict check_psi_membership(const TailModel& tail, const SequenceFamily& d) {
  // n d_n = A n^{1-delta} (log n)^{-mu} must grow.
  const bool threshold_grows = growth(1.0 - d.beta, -d.mu) > 0;
  switch (tail.family()) {
    case TailFamily::bounded:
      return threshold_grows ? Verdict::satisfied : Verdict::violated;
    case TailFamily::power:
      return Verdict::violated;
    case TailFamily::stretched_exponential: {
      if (!threshold_grows) return Verdict::violated;
      const double g = tail.parameter();
      // log(n P) / (n d^2) ~ -A^{g-2} n^{(1-delta)g-(1-2delta)} (log n)^{mu(2-g)}
      return classify((1.0 - d.beta) * g - (1.0 - 2.0 * d.beta), d.mu * (2.0 - g));
    }
  }
  return Verdict::violated;
}

double psi_functional(const TailModel& tail, const SequenceFamily& d, double n) {
  const double dn = d.at(n);
  const double log_p = tail.log_survival(n * dn);
  if (std::isinf(log_p)) return kNegInf;
  return (std::log(n) + log_p) / (n * dn * dn);
}

Verdict check_theta_conditions(const TailModel& tail, const SequenceFamily& a, ThetaMode mode) {
  if (!tends_to_zero(a)) return Verdict::violated;
  switch (tail.family()) {
    case TailFamily::bounded:
      return Verdict::satisfied;
    case TailFamily::stretched_exponential: {
      // h(c a_n) = exp{-(cA)^{-g} n^{beta g} (log n)^{mu g}}; for a pure log
      // sequence this is n^{-(cA)^{-g}} at mu g = 1, so the verdict hinges on c.
      if (a.beta > kExponentTolerance) return Verdict::satisfied;
      return classify(0.0, a.mu * tail.parameter() - 1.0);
    }
    case TailFamily::power: {
      const double t = tail.parameter();
      // h(c a_n) = (cA)^t n^{-beta t} (log n)^{-mu t}
      if (mode == ThetaMode::summable) return classify(a.beta * t - 1.0, a.mu * t - 1.0);
      return classify(a.beta * t - 1.0, a.mu * t);
    }
  }
  return Verdict::violated;
}

ZoneReport zone_report(const TailModel& tail) {
  if (tail.family() != TailFamily::stretched_exponential) {
    throw InputError("zone report is defined for stretched-exponential tails only");
  }
  const double g = tail.parameter();
  ZoneReport r;
  r.gamma = g;
  r.b_exponent_stated = 1.0 / (1.0 + g);
  r.b_exponent_from_phi = 1.0 / (2.0 + g);
  if (!near(g, 2.0)) r.d_exponent = (1.0 - g) / (2.0 - g);
  r.d_unbounded = g >= 1.0 - kExponentTolerance;
  r.a_log_exponent_stated = g;
  r.a_log_exponent_from_summability = 1.0 / g;
  return r;
}

InstabilityZone instability_zone(double gamma, double delta, const PowerLog& f) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("instability zone: gamma must lie in (0,1)");
  if (!(delta > 0.0 && delta < gamma / 2.0)) {
    throw InputError("instability zone: delta must lie in (0, gamma/2)");
  }
  if (!(f.scale > 0.0) || !std::isfinite(f.poly) || !std::isfinite(f.log)) {
    throw InputError("instability zone: f_n needs a positive scale and finite exponents");
  }
  const double base = 1.0 / (2.0 + gamma);
  const double rho = gamma / 2.0 - delta;
  InstabilityZone z;
  z.r = PowerLog{f.scale, base + f.poly, f.log};
  z.e = PowerLog{std::pow(f.scale, rho), -base + rho * f.poly, rho * f.log};
  z.lower_log_exponent = 1.0 / (1.0 + rho);
  z.upper_poly_exponent = gamma / ((2.0 + gamma) * (1.0 + delta));
  const bool above = growth(f.poly, f.log - z.lower_log_exponent) > 0;
  const bool below = growth(f.poly - z.upper_poly_exponent, f.log) < 0;
  z.valid = above && below;
  return z;
}

bool instability_hypotheses_hold(const InstabilityZone& zone, const PowerLog& b) {
  const int rb = growth(zone.r.poly + b.poly, zone.r.log + b.log);
  const bool r_exceeds = rb > 0 || (rb == 0 && zone.r.scale * b.scale > 1.0);
  const bool e_over_b = growth(zone.e.poly - b.poly, zone.e.log - b.log) > 0;
  const bool ne_over_r = growth(1.0 + zone.e.poly - zone.r.poly, zone.e.log - zone.r.log) > 0;
  return zone.valid && r_exceeds && e_over_b && ne_over_r;
}

ConvergenceGuard convergence_guard(std::uint64_t n, double t, const TailModel& tail, double a_n,
                                   double eps, double c, double c1, double c2) {
  if (n < 1) throw InputError("convergence guard: n must be positive");
  if (!(t > 2.0)) throw InputError("convergence guard: t must exceed 2");
  if (!(a_n > 0.0) || !(eps > 0.0) || !(c1 > 0.0)) {
    throw InputError("convergence guard: a_n, eps and C1 must be positive");
  }
  if (c < 0.0 || c2 < 0.0) throw InputError("convergence guard: C and C2 must be nonnegative");
  const double nn = static_cast<double>(n);
  ConvergenceGuard g;
  g.beta1 = nn * tail.h(a_n / (eps * c1));
  g.beta2 = c2 * std::pow(nn, 1.0 - t / 2.0);
  g.kappa = std::clamp(1.0 - c * (g.beta1 + g.beta2), 0.0, 1.0);
  return g;
}

}  // namespace mdpboot
