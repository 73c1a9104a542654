#include "mdpboot/rate.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "mdpboot/errors.h"

namespace mdpboot {
namespace {

constexpr double kRankThreshold = 1e-11;

// Var_P f below this (relative to E_P f^2) is treated as zero.
constexpr double kDegenerateVariance = 1e-14;

struct LeastNorm {
  Eigen::VectorXd solution;
  bool consistent = false;
};

// Minimum-norm solution of A x = b with an explicit residual test.
LeastNorm least_norm_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  LeastNorm out;
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    out.solution = Eigen::VectorXd::Zero(a.cols());
    out.consistent = true;
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(kRankThreshold);
  cod.compute(a);
  out.solution = cod.solve(b);
  const double residual = (a * out.solution - b).norm();
  out.consistent = residual <= kLeastNormResidualTolerance * b_norm;
  return out;
}

bool is_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

// 1/2 r' R^+ r, +inf if r is outside the range of R.
double pseudo_quadratic(const Eigen::MatrixXd& r_mat, const Eigen::VectorXd& r) {
  if (r.size() == 0) return 0.0;
  LeastNorm sol = least_norm_solve(r_mat, r);
  if (!sol.consistent) return kInfiniteRate;
  return 0.5 * r.dot(sol.solution);
}

}  // namespace

double rate_of(const SignedMeasureDensity& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * g[i] * g.base().prob(i);
  return 0.5 * s;
}

RateSolution min_rate_halfspace(const FiniteProbabilityMeasure& p, const TestFunction& f, double c) {
  if (!std::isfinite(c)) throw InputError("half-space rate: threshold must be finite");
  if (f.size() != p.size()) throw InputError("half-space rate: test function does not match support");
  RateSolution out;
  if (c <= 0.0) {
    out.rate = 0.0;
    out.argmin = SignedMeasureDensity::zero(p);
    return out;
  }
  const double mu = mean(p, f);
  const double var = variance(p, f);
  double second = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) second += f[i] * f[i] * p.prob(i);
  if (var <= kDegenerateVariance * std::max(1.0, second)) {
    return out;  // f is P-a.s. constant: int f dG = 0 for every G.
  }
  std::vector<double> g(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) g[i] = c * (f[i] - mu) / var;
  out.rate = c * c / (2.0 * var);
  out.argmin = SignedMeasureDensity(p, std::move(g));
  return out;
}

LinearConstraint::LinearConstraint(TestFunction f, ConstraintKind kind, double c)
    : f_(std::move(f)), kind_(kind), c_(c) {
  if (!std::isfinite(c_)) throw InputError("linear constraint: right-hand side must be finite");
  if (kind_ == ConstraintKind::at_least && c_ != 0.0 && f_.is_constant()) {
    throw InputError(
        "linear constraint: an at-least constraint with nonzero right-hand side needs a "
        "nonconstant test function");
  }
}

ConstraintSet::ConstraintSet(FiniteProbabilityMeasure base, std::vector<LinearConstraint> constraints)
    : base_(std::move(base)), constraints_(std::move(constraints)) {
  if (constraints_.empty()) throw InputError("constraint set must not be empty");
  for (std::size_t j = 0; j < constraints_.size(); ++j) {
    if (constraints_[j].f().size() != base_.size()) {
      std::ostringstream os;
      os << "constraint " << j << ": test function has " << constraints_[j].f().size()
         << " values but the support has " << base_.size() << " atoms";
      throw InputError(os.str());
    }
  }
}

RateSolution min_rate_linear(const ConstraintSet& cs, const std::optional<ShiftVector>& shift) {
  const FiniteProbabilityMeasure& p = cs.base();
  const std::size_t m = p.size();
  const std::size_t l = cs.size();
  if (shift && shift->values.size() != l) {
    std::ostringstream os;
    os << "shift vector has " << shift->values.size() << " entries for " << l << " constraints";
    throw InputError(os.str());
  }

  std::vector<std::size_t> equalities;
  std::vector<std::size_t> inequalities;
  for (std::size_t j = 0; j < l; ++j) {
    (cs.constraints()[j].kind() == ConstraintKind::equality ? equalities : inequalities).push_back(j);
  }
  if (inequalities.size() > kMaxInequalityConstraints) {
    std::ostringstream os;
    os << "constraint set has " << inequalities.size() << " inequality constraints; at most "
       << kMaxInequalityConstraints << " are supported";
    throw ComplexityError(os.str());
  }

  // Row j of `weighted` is sqrt(p_i) (f_j(i) - E_P f_j); its Gram matrix is Cov_P.
  Eigen::VectorXd sqrt_p(m);
  for (std::size_t i = 0; i < m; ++i) sqrt_p[i] = std::sqrt(p.prob(i));
  Eigen::MatrixXd weighted(l, m);
  Eigen::VectorXd rhs(l);
  for (std::size_t j = 0; j < l; ++j) {
    const LinearConstraint& con = cs.constraints()[j];
    const double mu = mean(p, con.f());
    double second = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      weighted(j, i) = sqrt_p[i] * (con.f()[i] - mu);
      second += con.f()[i] * con.f()[i] * p.prob(i);
    }
    // A P-a.s. constant f leaves only rounding noise, which the relative rank
    // test would otherwise read as a genuine direction.
    if (weighted.row(j).squaredNorm() <= kDegenerateVariance * std::max(1.0, second)) weighted.row(j).setZero();
    rhs[j] = con.c() - (shift ? shift->values[j] : 0.0);
  }

  RateSolution best;
  const std::size_t patterns = std::size_t{1} << inequalities.size();
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    std::vector<std::size_t> active = equalities;
    for (std::size_t b = 0; b < inequalities.size(); ++b) {
      if (mask & (std::size_t{1} << b)) active.push_back(inequalities[b]);
    }
    Eigen::MatrixXd a(active.size(), m);
    Eigen::VectorXd b(active.size());
    for (std::size_t r = 0; r < active.size(); ++r) {
      a.row(r) = weighted.row(active[r]);
      b[r] = rhs[active[r]];
    }
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
    if (!active.empty()) {
      LeastNorm sol = least_norm_solve(a, b);
      if (!sol.consistent) continue;
      u = sol.solution;
    }
    // Inactive inequalities must hold at the face minimiser.
    const Eigen::VectorXd achieved = weighted * u;
    bool ok = true;
    for (std::size_t idx : inequalities) {
      if (achieved[idx] < rhs[idx] - kLeastNormResidualTolerance * std::max(1.0, std::abs(rhs[idx]))) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    const double rate = 0.5 * u.squaredNorm();
    if (rate < best.rate) {
      std::vector<double> g(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        if (sqrt_p[i] > 0.0) g[i] = u[i] / sqrt_p[i];
      }
      best.rate = rate;
      best.argmin = SignedMeasureDensity(p, std::move(g));
    }
  }
  return best;
}

double joint_rate(const SignedMeasureDensity& g2, const SignedMeasureDensity& g1, double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw InputError("joint rate: nu must be positive");
  if (!g2.base().same_support(g1.base())) {
    throw InputError("joint rate: densities are defined on different supports");
  }
  return nu * rate_of(g2) + rate_of(g1);
}

double finite_dim_rate(const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                       const Eigen::MatrixXd& r_f, const Eigen::MatrixXd& r_g,
                       const Eigen::VectorXd& f_h) {
  if (y.size() != f_h.size() || r_f.rows() != y.size() || r_f.cols() != y.size()) {
    throw InputError("finite-dimensional rate: y, <f,H> and R_f dimensions disagree");
  }
  if (r_g.rows() != z.size() || r_g.cols() != z.size()) {
    throw InputError("finite-dimensional rate: z and R_g dimensions disagree");
  }
  if (!is_symmetric(r_f) || !is_symmetric(r_g)) {
    throw InputError("finite-dimensional rate: covariance matrices must be symmetric");
  }
  const double first = pseudo_quadratic(r_f, y - f_h);
  if (std::isinf(first)) return kInfiniteRate;
  const double second = pseudo_quadratic(r_g, z);
  if (std::isinf(second)) return kInfiniteRate;
  return first + second;
}

Eigen::MatrixXd covariance_matrix(const FiniteProbabilityMeasure& p,
                                  const std::vector<TestFunction>& fs) {
  const std::size_t l = fs.size();
  std::vector<double> mus(l);
  for (std::size_t j = 0; j < l; ++j) {
    if (fs[j].size() != p.size()) throw InputError("covariance: test function does not match support");
    mus[j] = mean(p, fs[j]);
  }
  Eigen::MatrixXd r(l, l);
  for (std::size_t j = 0; j < l; ++j) {
    for (std::size_t k = j; k < l; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        s += (fs[j][i] - mus[j]) * (fs[k][i] - mus[k]) * p.prob(i);
      }
      r(j, k) = s;
      r(k, j) = s;
    }
  }
  return r;
}

}  // namespace mdpboot
