#include "mdpboot/functionals.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mdpboot/errors.h"
#include "mdpboot/rate.h"

namespace mdpboot {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLevelTolerance = 1e-12;

void require_increasing(const std::vector<double>& xs, const char* what) {
  if (xs.empty()) throw InputError(std::string(what) + " must not be empty");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i])) throw InputError(std::string(what) + " must be finite");
    if (i > 0 && !(xs[i] > xs[i - 1])) {
      throw InputError(std::string(what) + " must be strictly increasing");
    }
  }
}

void require_level(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream os;
    os << what << " " << p << " is outside (0,1)";
    throw InputError(os.str());
  }
}

// Index of the cell [grid[i], grid[i+1]] holding x and the weight of grid[i+1].
std::pair<std::size_t, double> locate(const std::vector<double>& grid, double x) {
  if (grid.size() == 1 || x <= grid.front()) return {0, 0.0};
  if (x >= grid.back()) return {grid.size() - 2, 1.0};
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
  return {i, (x - grid[i]) / (grid[i + 1] - grid[i])};
}

}  // namespace

StepCdf::StepCdf(std::vector<double> xs, std::vector<double> fs) : xs_(std::move(xs)), fs_(std::move(fs)) {
  require_increasing(xs_, "cdf jump points");
  if (fs_.size() != xs_.size()) throw InputError("cdf: jump points and values differ in length");
  for (std::size_t i = 0; i < fs_.size(); ++i) {
    if (!(fs_[i] >= 0.0 && fs_[i] <= 1.0 + kLevelTolerance)) throw InputError("cdf values must lie in [0,1]");
    if (i > 0 && fs_[i] < fs_[i - 1]) throw InputError("cdf values must be nondecreasing");
  }
  if (std::abs(fs_.back() - 1.0) > kLevelTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "cdf must end at 1, ends at " << fs_.back();
    throw InputError(os.str());
  }
}

StepCdf StepCdf::from_sample(std::span<const double> sample) {
  if (sample.empty()) throw InputError("cdf of an empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> xs;
  std::vector<double> fs;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    xs.push_back(sorted[i]);
    fs.push_back(static_cast<double>(i + 1) / n);
  }
  return StepCdf(std::move(xs), std::move(fs));
}

StepCdf StepCdf::from_measure(const FiniteProbabilityMeasure& p) {
  if (p.dimension() != 1) throw InputError("cdf needs a scalar measure");
  std::vector<std::size_t> order(p.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p.point(a).x < p.point(b).x; });
  std::vector<double> xs;
  std::vector<double> fs;
  double acc = 0.0;
  for (std::size_t i : order) {
    acc += p.prob(i);
    xs.push_back(p.point(i).x);
    fs.push_back(std::min(acc, 1.0));
  }
  fs.back() = 1.0;
  return StepCdf(std::move(xs), std::move(fs));
}

double StepCdf::operator()(double x) const {
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  if (it == xs_.begin()) return 0.0;
  return fs_[static_cast<std::size_t>(it - xs_.begin()) - 1];
}

double generalized_inverse(const StepCdf& cdf, double p) {
  require_level(p, "quantile level");
  const auto fs = cdf.values();
  const auto it = std::lower_bound(fs.begin(), fs.end(), p);
  if (it == fs.end()) return cdf.xs().back();
  return cdf.xs()[static_cast<std::size_t>(it - fs.begin())];
}

GridFunction::GridFunction(std::vector<double> grid_, std::vector<double> values_)
    : grid(std::move(grid_)), values(std::move(values_)) {
  require_increasing(grid, "grid");
  if (grid.size() != values.size()) throw InputError("grid function: grid and values differ in length");
}

GridFunction GridFunction::constant(std::vector<double> grid, double value) {
  std::vector<double> values(grid.size(), value);
  return GridFunction(std::move(grid), std::move(values));
}

double GridFunction::interpolate(double x) const {
  const auto [i, w] = locate(grid, x);
  if (grid.size() == 1) return values[0];
  return (1.0 - w) * values[i] + w * values[i + 1];
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count == 0) throw InputError("linspace needs at least one point");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double steps = static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * (static_cast<double>(i) / steps);
  }
  out.back() = hi;
  return out;
}

GridFunction quantile_process_diff(const StepCdf& fstar, const StepCdf& fhat,
                                   const std::vector<double>& levels) {
  std::vector<double> values;
  values.reserve(levels.size());
  for (double p : levels) {
    values.push_back(generalized_inverse(fstar, p) - generalized_inverse(fhat, p));
  }
  return GridFunction(levels, std::move(values));
}

double weighted_ks(const StepCdf& p, const StepCdf& q, double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InputError("weighted KS needs kappa >= 0");
  std::vector<double> z(p.xs().begin(), p.xs().end());
  z.insert(z.end(), q.xs().begin(), q.xs().end());
  std::sort(z.begin(), z.end());
  z.erase(std::unique(z.begin(), z.end()), z.end());
  auto weight = [&](double x) { return kappa == 0.0 ? 1.0 : 1.0 + std::pow(std::abs(x), kappa); };
  double best = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double d = std::abs(q(z[j]) - p(z[j]));
    if (j + 1 == z.size()) {
      if (d > kLevelTolerance) best = std::max(best, kappa == 0.0 ? d : kInf);
      break;
    }
    // |D| is constant on [z_j, z_{j+1}); the weight peaks at an endpoint.
    best = std::max(best, d * std::max(weight(z[j]), weight(z[j + 1])));
  }
  return best;
}

Grid2Function::Grid2Function(std::vector<double> u_, std::vector<double> v_, std::vector<double> values_)
    : u(std::move(u_)), v(std::move(v_)), values(std::move(values_)) {
  require_increasing(u, "first grid axis");
  require_increasing(v, "second grid axis");
  if (values.size() != u.size() * v.size()) throw InputError("2-d grid function: value count mismatch");
}

Grid2Function Grid2Function::tabulate(std::vector<double> u, std::vector<double> v,
                                      const std::function<double(double, double)>& fn) {
  std::vector<double> values;
  values.reserve(u.size() * v.size());
  for (double a : u) {
    for (double b : v) values.push_back(fn(a, b));
  }
  return Grid2Function(std::move(u), std::move(v), std::move(values));
}

double Grid2Function::interpolate(double s, double t) const {
  const auto [i, wi] = locate(u, s);
  const auto [j, wj] = locate(v, t);
  const std::size_t i1 = u.size() == 1 ? i : i + 1;
  const std::size_t j1 = v.size() == 1 ? j : j + 1;
  return (1.0 - wi) * ((1.0 - wj) * at(i, j) + wj * at(i, j1)) +
         wi * ((1.0 - wj) * at(i1, j) + wj * at(i1, j1));
}

Grid2Function empirical_copula(std::span<const Point> sample, std::vector<double> u, std::vector<double> v) {
  if (sample.empty()) throw InputError("empirical copula of an empty sample");
  for (double a : u) require_level(a, "copula grid level");
  for (double b : v) require_level(b, "copula grid level");
  std::vector<double> xs;
  std::vector<double> ys;
  for (const Point& pt : sample) {
    xs.push_back(pt.x);
    ys.push_back(pt.y);
  }
  const StepCdf fx = StepCdf::from_sample(xs);
  const StepCdf gy = StepCdf::from_sample(ys);
  const double n = static_cast<double>(sample.size());
  std::vector<double> s(u.size());
  std::vector<double> t(v.size());
  for (std::size_t i = 0; i < u.size(); ++i) s[i] = generalized_inverse(fx, u[i]);
  for (std::size_t j = 0; j < v.size(); ++j) t[j] = generalized_inverse(gy, v[j]);
  std::vector<double> values(u.size() * v.size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) {
      std::size_t c = 0;
      for (const Point& pt : sample) c += (pt.x <= s[i] && pt.y <= t[j]);
      values[i * v.size() + j] = static_cast<double>(c) / n;
    }
  }
  return Grid2Function(std::move(u), std::move(v), std::move(values));
}

ContinuousLaw ContinuousLaw::uniform(double lower, double upper) {
  if (!(upper > lower)) throw InputError("uniform law needs upper > lower");
  ContinuousLaw law;
  law.lower = lower;
  law.upper = upper;
  const double width = upper - lower;
  law.cdf = [=](double x) { return std::clamp((x - lower) / width, 0.0, 1.0); };
  law.density = [=](double x) { return (x < lower || x > upper) ? 0.0 : 1.0 / width; };
  return law;
}

DiscretizedLaw discretize(const ContinuousLaw& law, std::size_t resolution) {
  if (resolution < 1) throw InputError("discretisation needs resolution >= 1");
  if (!(law.upper > law.lower)) throw InputError("law needs upper > lower");
  if (!law.cdf || !law.density) throw InputError("law needs both a cdf and a density");
  DiscretizedLaw d;
  const std::size_t count = resolution + 1;
  const double rd = static_cast<double>(resolution);
  double total = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    const double x = law.lower + (law.upper - law.lower) * (static_cast<double>(j) / rd);
    const double dens = law.density(x);
    if (!(dens >= 0.0) || !std::isfinite(dens)) throw InputError("density must be finite and nonnegative");
    const double trap = (j == 0 || j + 1 == count) ? 0.5 : 1.0;
    d.nodes.push_back(x);
    d.density.push_back(dens);
    d.cdf.push_back(law.cdf(x));
    d.masses.push_back(dens * trap);
    total += dens * trap;
  }
  if (!(total > 0.0)) throw InputError("law has no mass on its interval");
  for (double& m : d.masses) m /= total;
  return d;
}

double rate_Iq(const ContinuousLaw& law, double p, double q, const GridFunction& phi,
               std::size_t resolution) {
  if (!(p >= 0.0 && q <= 1.0 && p < q)) throw InputError("quantile rate needs 0 <= p < q <= 1");
  if (phi.grid.front() > p + kLevelTolerance || phi.grid.back() < q - kLevelTolerance) {
    throw InputError("phi must be tabulated over the whole level interval [p,q]");
  }
  const DiscretizedLaw d = discretize(law, resolution);
  std::vector<double> density(d.nodes.size(), 0.0);
  std::vector<bool> on(d.nodes.size(), false);
  double on_mass = 0.0;
  double on_scale = 0.0;
  double off_mass = 0.0;
  for (std::size_t j = 0; j < d.nodes.size(); ++j) {
    const double level = d.cdf[j];
    if (level >= p - kLevelTolerance && level <= q + kLevelTolerance) {
      if (!(d.density[j] > 0.0)) {
        std::ostringstream os;
        os << "density vanishes at " << d.nodes[j] << " inside the quantile region";
        throw InputError(os.str());
      }
      on[j] = true;
      density[j] = -phi.interpolate(level) * d.density[j];
      on_mass += density[j] * d.masses[j];
      on_scale += std::abs(density[j]) * d.masses[j];
    } else {
      off_mass += d.masses[j];
    }
  }
  const bool balanced = std::abs(on_mass) <= kLevelTolerance * std::max(1.0, on_scale);
  if (!(off_mass > 0.0)) {
    if (!balanced) return kInf;
  } else {
    const double completion = -on_mass / off_mass;
    for (std::size_t j = 0; j < density.size(); ++j) {
      if (!on[j]) density[j] = completion;
    }
  }
  double rate = 0.0;
  for (std::size_t j = 0; j < density.size(); ++j) rate += density[j] * density[j] * d.masses[j];
  return 0.5 * rate;
}

CopulaModel CopulaModel::independent_unit_square() {
  CopulaModel m;
  m.f_inverse = [](double u) { return u; };
  m.g_inverse = [](double v) { return v; };
  m.f_density = [](double x) { return (x < 0.0 || x > 1.0) ? 0.0 : 1.0; };
  m.g_density = [](double y) { return (y < 0.0 || y > 1.0) ? 0.0 : 1.0; };
  m.h_dx = [](double, double y) { return std::clamp(y, 0.0, 1.0); };
  m.h_dy = [](double x, double) { return std::clamp(x, 0.0, 1.0); };
  return m;
}

double copula_hadamard_derivative(const CopulaModel& model, const Grid2Function& alpha, double u,
                                  double v) {
  const double s = model.f_inverse(u);
  const double t = model.g_inverse(v);
  const double fs = model.f_density(s);
  const double gt = model.g_density(t);
  if (!(fs > 0.0) || !(gt > 0.0)) {
    std::ostringstream os;
    os << "copula derivative needs positive marginal densities, got f=" << fs << " g=" << gt;
    throw InputError(os.str());
  }
  const double joint = alpha.interpolate(s, t);
  const double x_margin = alpha.interpolate(s, alpha.v.back());
  const double y_margin = alpha.interpolate(alpha.u.back(), t);
  return joint - model.h_dx(s, t) * x_margin / fs - model.h_dy(s, t) * y_margin / gt;
}

FiniteProbabilityMeasure unit_square_grid(std::size_t cells_per_side) {
  if (cells_per_side < 1) throw InputError("grid needs at least one cell per side");
  const std::size_t total = cells_per_side * cells_per_side;
  if (total > kCopulaGridBudget) {
    std::ostringstream os;
    os << "grid of " << total << " atoms exceeds the budget of " << kCopulaGridBudget;
    throw ComplexityError(os.str());
  }
  const double nd = static_cast<double>(cells_per_side);
  std::vector<Point> points;
  points.reserve(total);
  for (std::size_t a = 0; a < cells_per_side; ++a) {
    for (std::size_t b = 0; b < cells_per_side; ++b) {
      points.push_back(Point{(static_cast<double>(a) + 0.5) / nd, (static_cast<double>(b) + 0.5) / nd});
    }
  }
  std::vector<double> probs(total, 1.0 / static_cast<double>(total));
  double head = 0.0;
  for (std::size_t i = 0; i + 1 < total; ++i) head += probs[i];
  probs.back() = 1.0 - head;
  return FiniteProbabilityMeasure(std::move(points), std::move(probs));
}

double rate_Ic(const FiniteProbabilityMeasure& grid_measure, const CopulaModel& model,
               const Grid2Function& phi) {
  if (grid_measure.dimension() != 2) throw InputError("copula rate needs a bivariate measure");
  if (grid_measure.size() > kCopulaGridBudget) {
    std::ostringstream os;
    os << "grid of " << grid_measure.size() << " atoms exceeds the budget of " << kCopulaGridBudget;
    throw ComplexityError(os.str());
  }
  for (std::size_t i = 0; i < grid_measure.size(); ++i) {
    if (!(grid_measure.prob(i) > 0.0)) throw InputError("copula rate needs a strictly positive grid measure");
  }
  for (double a : phi.u) require_level(a, "copula grid level");
  for (double b : phi.v) require_level(b, "copula grid level");

  std::vector<LinearConstraint> constraints;
  constraints.reserve(phi.values.size());
  for (std::size_t i = 0; i < phi.u.size(); ++i) {
    for (std::size_t j = 0; j < phi.v.size(); ++j) {
      const double s = model.f_inverse(phi.u[i]);
      const double t = model.g_inverse(phi.v[j]);
      const double fs = model.f_density(s);
      const double gt = model.g_density(t);
      if (!(fs > 0.0) || !(gt > 0.0)) throw InputError("copula rate needs positive marginal densities");
      const double cx = model.h_dx(s, t) / fs;
      const double cy = model.h_dy(s, t) / gt;
      std::vector<double> h(grid_measure.size());
      for (std::size_t a = 0; a < h.size(); ++a) {
        const Point& pt = grid_measure.point(a);
        const double below_s = pt.x <= s ? 1.0 : 0.0;
        const double below_t = pt.y <= t ? 1.0 : 0.0;
        h[a] = below_s * below_t - cx * below_s - cy * below_t;
      }
      constraints.emplace_back(TestFunction(std::move(h)), ConstraintKind::equality, phi.at(i, j));
    }
  }
  return min_rate_linear(ConstraintSet(grid_measure, std::move(constraints))).rate;
}

}  // namespace mdpboot
