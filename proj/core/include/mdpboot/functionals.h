#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mdpboot/measures.h"

namespace mdpboot {

/// Right-continuous step cdf: F(x) = Fs[i] on [xs[i], xs[i+1]), 0 left of xs[0].
class StepCdf {
 public:
  StepCdf(std::vector<double> xs, std::vector<double> fs);

  static StepCdf from_sample(std::span<const double> sample);
  /// Cdf of a scalar measure (atoms sorted by label).
  static StepCdf from_measure(const FiniteProbabilityMeasure& p);

  double operator()(double x) const;
  std::span<const double> xs() const noexcept { return xs_; }
  std::span<const double> values() const noexcept { return fs_; }

 private:
  std::vector<double> xs_;
  std::vector<double> fs_;
};

/// inf{x : F(x) >= p} for p in (0,1).
double generalized_inverse(const StepCdf& cdf, double p);

/// Values on an increasing one-dimensional grid.
struct GridFunction {
  std::vector<double> grid;
  std::vector<double> values;

  GridFunction(std::vector<double> grid, std::vector<double> values);
  static GridFunction constant(std::vector<double> grid, double value);
  /// Piecewise-linear interpolation; constant beyond the ends.
  double interpolate(double x) const;
};

/// Evenly spaced points lo, ..., hi (count >= 1; count 1 gives {lo}).
std::vector<double> linspace(double lo, double hi, std::size_t count);

/// (Fstar)^-1 - (Fhat)^-1 on the grid of levels, each inside (0,1).
GridFunction quantile_process_diff(const StepCdf& fstar, const StepCdf& fhat,
                                   const std::vector<double>& levels);

/// sup_x |F_Q(x) - F_P(x)| (1 + |x|^kappa); kappa = 0 is the unweighted
/// Kolmogorov-Smirnov distance.
double weighted_ks(const StepCdf& p, const StepCdf& q, double kappa);

/// Values on a rectangular grid; values[i * v.size() + j] sits at (u[i], v[j]).
struct Grid2Function {
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> values;

  Grid2Function(std::vector<double> u, std::vector<double> v, std::vector<double> values);
  static Grid2Function tabulate(std::vector<double> u, std::vector<double> v,
                                const std::function<double(double, double)>& fn);
  double at(std::size_t i, std::size_t j) const { return values[i * v.size() + j]; }
  /// Bilinear interpolation, clamped to the rectangle.
  double interpolate(double s, double t) const;
};

/// Hn((Fn)^-1(u), (Gn)^-1(v)) with plug-in marginal inverses.
Grid2Function empirical_copula(std::span<const Point> sample, std::vector<double> u,
                               std::vector<double> v);

/// Continuous law on [lower, upper] through its cdf and density.
struct ContinuousLaw {
  double lower = 0.0;
  double upper = 1.0;
  std::function<double(double)> cdf;
  std::function<double(double)> density;

  static ContinuousLaw uniform(double lower = 0.0, double upper = 1.0);
};

/// Nodes x_j = lower + j (upper - lower) / resolution, j = 0..resolution, with
/// masses proportional to density times trapezoid weights (normalised to 1).
struct DiscretizedLaw {
  std::vector<double> nodes;
  std::vector<double> masses;
  std::vector<double> cdf;
  std::vector<double> density;
};

DiscretizedLaw discretize(const ContinuousLaw& law, std::size_t resolution);

/// Quadratic rate of the quantile constraint -q(y)/f(y) = phi(F(y)) on levels
/// [p, q]. Off that region the density is the constant restoring zero mass.
/// Returns +inf when no mass lies off the region but the constraint carries mass.
double rate_Iq(const ContinuousLaw& law, double p, double q, const GridFunction& phi,
               std::size_t resolution);

/// Joint law H with margins F, G through the quantities the copula derivative uses.
struct CopulaModel {
  std::function<double(double)> f_inverse;
  std::function<double(double)> g_inverse;
  std::function<double(double)> f_density;
  std::function<double(double)> g_density;
  std::function<double(double, double)> h_dx;
  std::function<double(double, double)> h_dy;

  /// H(x, y) = xy on the unit square.
  static CopulaModel independent_unit_square();
};

/// alpha(s,t) - dH/dx alpha(s,inf)/f(s) - dH/dy alpha(inf,t)/g(t) at s = F^-1(u),
/// t = G^-1(v). alpha(., inf) and alpha(inf, .) are read from the last row and
/// column of the grid.
double copula_hadamard_derivative(const CopulaModel& model, const Grid2Function& alpha, double u,
                                  double v);

/// Atoms of a bivariate grid measure above which rate_Ic refuses to run.
inline constexpr std::size_t kCopulaGridBudget = 10'000;

/// N x N cell-midpoint grid on the unit square with equal masses.
FiniteProbabilityMeasure unit_square_grid(std::size_t cells_per_side);

/// Minimal 1/2 sum q^2 mass over densities q of the bivariate grid measure with
/// Phi'_H(alpha_q)(u,v) = phi(u,v) at every node of phi, alpha_q(s,t) =
/// sum q mass 1{x <= s, y <= t}. +inf when the constraints are inconsistent.
double rate_Ic(const FiniteProbabilityMeasure& grid_measure, const CopulaModel& model,
               const Grid2Function& phi);

}  // namespace mdpboot
