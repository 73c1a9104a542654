#include "mdpboot/simulate.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>

#include "mdpboot/errors.h"
#include "mdpboot/parallel.h"

namespace mdpboot {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTiltTolerance = 1e-10;
constexpr int kTiltIterations = 200;

class KahanSum {
 public:
  void add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// Inverse-CDF sampler over a fixed weight vector.
class Categorical {
 public:
  explicit Categorical(std::span<const double> weights) : cdf_(weights.size()) {
    double acc = 0.0;
    std::size_t last = weights.size();
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      cdf_[i] = acc;
      if (weights[i] > 0.0) last = i;
    }
    if (last == weights.size()) throw InputError("sampling weights are all zero");
    // u * total never reaches past the last charged atom.
    total_ = acc;
    for (std::size_t i = last; i < cdf_.size(); ++i) cdf_[i] = kInf;
  }

  std::size_t operator()(CounterRng& rng) const {
    const double u = rng.uniform() * total_;
    if (cdf_.size() <= 16) {
      std::size_t i = 0;
      while (!(u < cdf_[i])) ++i;
      return i;
    }
    return static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
  }

  std::size_t size() const { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
  double total_ = 1.0;
};

void draw_counts(const Categorical& cat, std::uint64_t k, CounterRng& rng,
                 std::vector<std::uint64_t>& counts) {
  std::fill(counts.begin(), counts.end(), 0);
  for (std::uint64_t j = 0; j < k; ++j) ++counts[cat(rng)];
}

void require_trials(std::uint64_t trials) {
  if (trials < kMinTrials) {
    std::ostringstream os;
    os << "trials must be at least " << kMinTrials << ", got " << trials;
    throw InputError(os.str());
  }
}

void require_threshold(double theta) {
  if (std::isnan(theta)) throw InputError("threshold must not be NaN");
}

void require_match(const TestFunction& f, std::size_t m) {
  if (f.size() != m) {
    std::ostringstream os;
    os << "test function has " << f.size() << " values but the support has " << m << " atoms";
    throw InputError(os.str());
  }
}

double dot_counts(const TestFunction& f, std::span<const std::uint64_t> counts) {
  double s = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) s += f[i] * static_cast<double>(counts[i]);
  return s;
}

// Sum of multinomial(k; q) probabilities over count vectors whose weighted sum
// of `values` satisfies `event`. Atoms with q = 0 are never drawn.
template <class Event>
double enumerate_multinomial(std::span<const double> q, const TestFunction& values, std::uint64_t k,
                             const Event& event) {
  std::vector<std::size_t> atoms;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) atoms.push_back(i);
  }
  const std::uint64_t outcomes = multinomial_outcomes(k, atoms.size());
  if (outcomes > kEnumerationBudget) {
    std::ostringstream os;
    os << "exact enumeration needs " << outcomes << " outcomes, budget is " << kEnumerationBudget;
    throw ComplexityError(os.str());
  }
  std::vector<double> lfact(k + 1);
  for (std::uint64_t c = 0; c <= k; ++c) lfact[c] = std::lgamma(static_cast<double>(c) + 1.0);
  std::vector<double> logq(atoms.size());
  std::vector<double> fv(atoms.size());
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    logq[j] = std::log(q[atoms[j]]);
    fv[j] = values[atoms[j]];
  }
  const std::size_t last = atoms.size() - 1;
  KahanSum hits;

  // Depth-first over counts c_0..c_last with c_last = remainder. The weighted
  // sum accumulates in atom order, matching dot_counts term for term.
  auto rec = [&](auto&& self, std::size_t j, std::uint64_t remaining, double logp, double s) -> void {
    if (j == last) {
      const double c = static_cast<double>(remaining);
      const double sum = s + fv[j] * c;
      if (event(sum)) hits.add(std::exp(lfact[k] + logp + c * logq[j] - lfact[remaining]));
      return;
    }
    for (std::uint64_t c = 0; c <= remaining; ++c) {
      const double cd = static_cast<double>(c);
      self(self, j + 1, remaining - c, logp + cd * logq[j] - lfact[c], s + fv[j] * cd);
    }
  };
  rec(rec, 0, k, 0.0, 0.0);
  return std::clamp(hits.value(), 0.0, 1.0);
}

TailEstimate tilted_impl(std::span<const double> q, double base_mean, const TestFunction& f,
                         double theta, std::uint64_t k, std::uint64_t trials, RngSpec rng,
                         const SimOptions& opts) {
  require_trials(trials);
  require_threshold(theta);
  if (k < 1) throw InputError("bootstrap size k must be at least 1");
  const Tilt tilt = solve_tilt(q, f, base_mean + theta);
  const Categorical cat(tilt.weights);
  const double kd = static_cast<double>(k);
  // Below the mean the event is typical and its likelihood ratios are
  // unbounded; the complement keeps them below one.
  const bool complement = tilt.z < 0.0;
  std::vector<double> values(trials, 0.0);
  parallel_for(
      trials,
      [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint64_t> counts(q.size());
        for (std::size_t t = begin; t < end; ++t) {
          CounterRng gen(rng, t);
          draw_counts(cat, k, gen, counts);
          const double s = dot_counts(f, counts);
          if ((s / kd - base_mean > theta) != complement) values[t] = std::exp(kd * tilt.cumulant - tilt.z * s);
        }
      },
      opts.workers);
  KahanSum sum;
  for (double v : values) sum.add(v);
  const double td = static_cast<double>(trials);
  const double mean = sum.value() / td;
  KahanSum sq;
  for (double v : values) sq.add((v - mean) * (v - mean));
  TailEstimate out;
  out.p_hat = std::clamp(complement ? 1.0 - mean : mean, 0.0, 1.0);
  out.std_err = std::sqrt(sq.value() / (td - 1.0) / td);
  out.trials = trials;
  out.method = EstimatorMethod::tilted;
  return out;
}

}  // namespace

std::string_view to_string(EstimatorMethod m) {
  switch (m) {
    case EstimatorMethod::naive: return "naive";
    case EstimatorMethod::exact: return "exact";
    case EstimatorMethod::tilted: return "tilted";
  }
  return "unknown";
}

EstimatorMethod parse_method(std::string_view name) {
  if (name == "naive") return EstimatorMethod::naive;
  if (name == "exact") return EstimatorMethod::exact;
  if (name == "tilted") return EstimatorMethod::tilted;
  throw InputError("unknown estimator method '" + std::string(name) + "' (expected naive, exact or tilted)");
}

EmpiricalMeasure draw_sample(const FiniteProbabilityMeasure& p, std::uint64_t n, RngSpec rng) {
  if (n < 1) throw InputError("sample size n must be at least 1");
  const Categorical cat(p.probs());
  CounterRng gen(rng, 0);
  std::vector<std::uint64_t> counts(p.size());
  draw_counts(cat, n, gen, counts);
  return EmpiricalMeasure(p, std::move(counts));
}

EmpiricalMeasure bootstrap_resample(const EmpiricalMeasure& emp, std::uint64_t k, RngSpec rng) {
  if (k < 1) throw InputError("bootstrap size k must be at least 1");
  const std::vector<double> freq = emp.frequencies();
  const Categorical cat(freq);
  CounterRng gen(rng, 0);
  std::vector<std::uint64_t> counts(emp.size());
  draw_counts(cat, k, gen, counts);
  return EmpiricalMeasure(emp.base(), std::move(counts));
}

double bootstrap_deviation(const TestFunction& f, std::span<const std::uint64_t> counts,
                           std::uint64_t k, double base_mean) {
  require_match(f, counts.size());
  return dot_counts(f, counts) / static_cast<double>(k) - base_mean;
}

std::uint64_t multinomial_outcomes(std::uint64_t k, std::size_t m) {
  if (m == 0) return 0;
  // C(k+m-1, r) with r = min(m-1, k), built incrementally; each step is exact.
  const std::uint64_t r = std::min<std::uint64_t>(m - 1, k);
  const std::uint64_t top = k + m - 1;
  uint128 c = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    c = c * (top - r + i) / i;
    if (c > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(c);
}

TailEstimate exact_conditional_tail(const EmpiricalMeasure& emp, const TestFunction& f, double theta,
                                    std::uint64_t k) {
  require_match(f, emp.size());
  require_threshold(theta);
  if (k < 1) throw InputError("bootstrap size k must be at least 1");
  const double base_mean = integrate(f, emp);
  const double kd = static_cast<double>(k);
  const std::vector<double> freq = emp.frequencies();
  TailEstimate out;
  out.p_hat = enumerate_multinomial(freq, f, k,
                                    [&](double s) { return s / kd - base_mean > theta; });
  out.std_err = 0.0;
  out.trials = 0;
  out.method = EstimatorMethod::exact;
  return out;
}

TailEstimate frequency_estimate(std::uint64_t hits, std::uint64_t trials) {
  TailEstimate out;
  const double td = static_cast<double>(trials);
  out.p_hat = static_cast<double>(hits) / td;
  out.std_err = std::sqrt(out.p_hat * (1.0 - out.p_hat) / td);
  out.trials = trials;
  out.method = EstimatorMethod::naive;
  return out;
}

TailEstimate mc_conditional_tail(const EmpiricalMeasure& emp, const TestFunction& f, double theta,
                                 std::uint64_t k, std::uint64_t trials, RngSpec rng,
                                 const SimOptions& opts) {
  require_match(f, emp.size());
  require_trials(trials);
  require_threshold(theta);
  if (k < 1) throw InputError("bootstrap size k must be at least 1");
  const double base_mean = integrate(f, emp);
  const std::vector<double> freq = emp.frequencies();
  const Categorical cat(freq);
  const double kd = static_cast<double>(k);
  std::atomic<std::uint64_t> hits{0};
  parallel_for(
      trials,
      [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint64_t> counts(freq.size());
        std::uint64_t local = 0;
        for (std::size_t t = begin; t < end; ++t) {
          CounterRng gen(rng, t);
          draw_counts(cat, k, gen, counts);
          if (dot_counts(f, counts) / kd - base_mean > theta) ++local;
        }
        hits += local;
      },
      opts.workers);
  return frequency_estimate(hits.load(), trials);
}

Tilt solve_tilt(std::span<const double> q, const TestFunction& f, double target) {
  require_match(f, q.size());
  double fmin = kInf;
  double fmax = -kInf;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) {
      fmin = std::min(fmin, f[i]);
      fmax = std::max(fmax, f[i]);
    }
  }
  if (!(target > fmin && target < fmax)) {
    std::ostringstream os;
    os.precision(17);
    os << "tilt target " << target << " is not strictly inside the achievable range (" << fmin
       << ", " << fmax << ")";
    throw InfeasibleError(os.str());
  }

  // Returns K'(z); fills the tilted weights and K(z) when asked.
  auto evaluate = [&](double z, std::vector<double>* weights, double* cumulant) {
    double shift = -kInf;
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (q[i] > 0.0) shift = std::max(shift, z * f[i]);
    }
    double total = 0.0;
    double first = 0.0;
    std::vector<double> w(q.size(), 0.0);
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (q[i] > 0.0) {
        w[i] = q[i] * std::exp(z * f[i] - shift);
        total += w[i];
        first += w[i] * f[i];
      }
    }
    if (cumulant) *cumulant = shift + std::log(total);
    if (weights) {
      for (double& x : w) x /= total;
      *weights = std::move(w);
    }
    return first / total;
  };

  double lo = 0.0;
  double hi = 0.0;
  const double at_zero = evaluate(0.0, nullptr, nullptr);
  double z = 0.0;
  if (at_zero != target) {
    double step = 1.0;
    int expansions = 0;
    if (at_zero < target) {
      hi = step;
      while (evaluate(hi, nullptr, nullptr) < target) {
        lo = hi;
        step *= 2.0;
        hi += step;
        if (++expansions > kTiltIterations) throw InternalError("tilt bisection failed to bracket the target");
      }
    } else {
      lo = -step;
      while (evaluate(lo, nullptr, nullptr) > target) {
        hi = lo;
        step *= 2.0;
        lo -= step;
        if (++expansions > kTiltIterations) throw InternalError("tilt bisection failed to bracket the target");
      }
    }
    for (int it = 0; it < kTiltIterations; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double v = evaluate(mid, nullptr, nullptr);
      if (v < target) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi - lo <= kTiltTolerance * std::max(1.0, std::abs(mid))) break;
    }
    z = 0.5 * (lo + hi);
  }
  Tilt out;
  out.z = z;
  evaluate(z, &out.weights, &out.cumulant);
  return out;
}

TailEstimate tilted_conditional_tail(const EmpiricalMeasure& emp, const TestFunction& f, double theta,
                                     std::uint64_t k, std::uint64_t trials, RngSpec rng,
                                     const SimOptions& opts) {
  require_match(f, emp.size());
  const std::vector<double> freq = emp.frequencies();
  return tilted_impl(freq, integrate(f, emp), f, theta, k, trials, rng, opts);
}

TailEstimate tilted_conditional_tail(const FiniteProbabilityMeasure& weights, const TestFunction& f,
                                     double theta, std::uint64_t k, std::uint64_t trials, RngSpec rng,
                                     const SimOptions& opts) {
  require_match(f, weights.size());
  return tilted_impl(weights.probs(), integrate(f, weights), f, theta, k, trials, rng, opts);
}

TailEstimate conditional_tail(EstimatorMethod method, const EmpiricalMeasure& emp,
                              const TestFunction& f, double theta, std::uint64_t k,
                              std::uint64_t trials, RngSpec rng, const SimOptions& opts) {
  switch (method) {
    case EstimatorMethod::exact: return exact_conditional_tail(emp, f, theta, k);
    case EstimatorMethod::naive: return mc_conditional_tail(emp, f, theta, k, trials, rng, opts);
    case EstimatorMethod::tilted: return tilted_conditional_tail(emp, f, theta, k, trials, rng, opts);
  }
  throw InternalError("unhandled estimator method");
}

SumDiagnostics heavy_tail_sum_mc_diagnostics(const TailModel& tail, std::uint64_t n, double e_n,
                                             std::uint64_t trials, RngSpec rng,
                                             SumCentering centering, const SimOptions& opts) {
  if (n < 1) throw InputError("sample size n must be at least 1");
  require_trials(trials);
  if (std::isnan(e_n)) throw InputError("e_n must not be NaN");
  SumDiagnostics out;
  if (e_n == kInf) {
    out.estimate = frequency_estimate(0, trials);
    return out;
  }
  const double threshold = static_cast<double>(n) * e_n;
  std::atomic<std::uint64_t> hits{0};
  std::mutex max_mutex;
  parallel_for(
      trials,
      [&](std::size_t begin, std::size_t end) {
        std::vector<double> y(n);
        std::uint64_t local = 0;
        double local_max = 0.0;
        for (std::size_t t = begin; t < end; ++t) {
          CounterRng gen(rng, t);
          double total = 0.0;
          for (std::uint64_t i = 0; i < n; ++i) {
            y[i] = tail.quantile_from_upper(gen.uniform_open_closed());
            total += y[i];
            local_max = std::max(local_max, std::abs(y[i]));
          }
          double s = 0.0;
          for (std::uint64_t i = 0; i < n; ++i) s += y[gen.below(n)];
          if (centering == SumCentering::sample_mean) s -= total;
          if (s > threshold) ++local;
        }
        hits += local;
        std::lock_guard<std::mutex> lock(max_mutex);
        out.max_observation = std::max(out.max_observation, local_max);
      },
      opts.workers);
  out.estimate = frequency_estimate(hits.load(), trials);
  return out;
}

TailEstimate heavy_tail_sum_mc(const TailModel& tail, std::uint64_t n, double e_n,
                               std::uint64_t trials, RngSpec rng, SumCentering centering,
                               const SimOptions& opts) {
  return heavy_tail_sum_mc_diagnostics(tail, n, e_n, trials, rng, centering, opts).estimate;
}

GaussianSandwich gaussian_sandwich(std::uint64_t k, double a, double omega) {
  if (!(omega > 1.0)) throw InputError("sandwich bounds need omega > 1");
  if (k < 1) throw InputError("sandwich bounds need k >= 1");
  if (!(a > 0.0) || !std::isfinite(a)) throw InputError("sandwich bounds need a > 0");
  const double kd = static_cast<double>(k);
  const double ka2 = kd * a * a;
  const double x = std::sqrt(kd) * a;
  GaussianSandwich s;
  s.l_low = -ka2 / (3.0 * omega);
  s.l_high = ka2 / (2.0 * (1.0 + omega));
  if (std::isinf(omega)) {
    s.l_low = 0.0;
    s.l_high = 0.0;
  }
  if (omega > 16.0 && x > 100.0) {
    s.err_factor = 6.0;
  } else {
    const double delta = omega * x;
    const double shrink = 1.0 - 1.0 / omega;
    const double f1 = 60.0 * (1.0 + 10.0 * delta * delta * std::exp(-shrink * std::sqrt(delta))) / shrink;
    s.err_factor = f1 * (x + 1.0) / delta;
  }
  return s;
}

double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

SandwichEnvelope sandwich_envelope(std::uint64_t k, double a, double omega) {
  const GaussianSandwich s = gaussian_sandwich(k, a, omega);
  SandwichEnvelope e;
  e.gaussian_tail = normal_upper_tail(std::sqrt(static_cast<double>(k)) * a);
  e.lower_unwidened = e.gaussian_tail * std::exp(s.l_low);
  e.upper_unwidened = e.gaussian_tail * std::exp(s.l_high);
  e.lower = e.lower_unwidened * std::max(0.0, 1.0 - s.err_factor);
  e.upper = e.upper_unwidened * (1.0 + s.err_factor);
  return e;
}

JointTailCounts joint_tail_counts(const FiniteProbabilityMeasure& p, std::uint64_t n, std::uint64_t k,
                                  const TestFunction& f, const TestFunction& g, double theta_boot,
                                  double theta_emp, std::uint64_t trials, RngSpec rng,
                                  const SimOptions& opts) {
  require_match(f, p.size());
  require_match(g, p.size());
  require_trials(trials);
  require_threshold(theta_boot);
  require_threshold(theta_emp);
  if (n < 1 || k < 1) throw InputError("joint tail needs n >= 1 and k >= 1");
  const Categorical outer(p.probs());
  const double mean_f = integrate(f, p);
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  std::atomic<std::uint64_t> boot_hits{0}, emp_hits{0}, joint_hits{0};
  parallel_for(
      trials,
      [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint64_t> counts(p.size());
        std::vector<std::uint64_t> star(p.size());
        std::vector<double> freq(p.size());
        std::uint64_t b = 0, e = 0, j = 0;
        for (std::size_t t = begin; t < end; ++t) {
          CounterRng gen(rng, t);
          draw_counts(outer, n, gen, counts);
          for (std::size_t i = 0; i < freq.size(); ++i) freq[i] = static_cast<double>(counts[i]) / nd;
          const bool emp_event = dot_counts(f, counts) / nd - mean_f > theta_emp;
          const double g_hat = dot_counts(g, counts) / nd;
          const Categorical inner(freq);
          draw_counts(inner, k, gen, star);
          const bool boot_event = dot_counts(g, star) / kd - g_hat > theta_boot;
          b += boot_event;
          e += emp_event;
          j += boot_event && emp_event;
        }
        boot_hits += b;
        emp_hits += e;
        joint_hits += j;
      },
      opts.workers);
  return JointTailCounts{trials, boot_hits.load(), emp_hits.load(), joint_hits.load()};
}

TailEstimate joint_tail_mc(const FiniteProbabilityMeasure& p, std::uint64_t n, std::uint64_t k,
                           const TestFunction& f, const TestFunction& g, double theta_boot,
                           double theta_emp, std::uint64_t trials, RngSpec rng,
                           const SimOptions& opts) {
  const JointTailCounts c = joint_tail_counts(p, n, k, f, g, theta_boot, theta_emp, trials, rng, opts);
  return frequency_estimate(c.joint_hits, c.trials);
}

TailEstimate exact_joint_tail(const FiniteProbabilityMeasure& p, std::uint64_t n, std::uint64_t k,
                              const TestFunction& f, const TestFunction& g, double theta_boot,
                              double theta_emp) {
  require_match(f, p.size());
  require_match(g, p.size());
  require_threshold(theta_boot);
  require_threshold(theta_emp);
  if (n < 1 || k < 1) throw InputError("joint tail needs n >= 1 and k >= 1");
  std::size_t charged = 0;
  for (double q : p.probs()) charged += q > 0.0;
  const std::uint64_t outer = multinomial_outcomes(n, charged);
  const std::uint64_t inner = multinomial_outcomes(k, charged);
  if (outer > kEnumerationBudget || inner > kEnumerationBudget || outer * inner > kEnumerationBudget) {
    std::ostringstream os;
    os << "nested enumeration needs " << outer << " x " << inner << " outcomes, budget is "
       << kEnumerationBudget;
    throw ComplexityError(os.str());
  }
  const double mean_f = integrate(f, p);
  const double nd = static_cast<double>(n);

  std::vector<std::size_t> atoms;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.prob(i) > 0.0) atoms.push_back(i);
  }
  std::vector<double> lfact(n + 1);
  for (std::uint64_t c = 0; c <= n; ++c) lfact[c] = std::lgamma(static_cast<double>(c) + 1.0);
  std::vector<std::uint64_t> counts(p.size(), 0);
  KahanSum total;
  auto rec = [&](auto&& self, std::size_t j, std::uint64_t remaining, double logp) -> void {
    const std::size_t atom = atoms[j];
    if (j + 1 == atoms.size()) {
      counts[atom] = remaining;
      const double lp = lfact[n] + logp + static_cast<double>(remaining) * std::log(p.prob(atom)) -
                        lfact[remaining];
      if (dot_counts(f, counts) / nd - mean_f > theta_emp) {
        const EmpiricalMeasure emp(p, counts);
        const double cond = exact_conditional_tail(emp, g, theta_boot, k).p_hat;
        total.add(std::exp(lp) * cond);
      }
      return;
    }
    for (std::uint64_t c = 0; c <= remaining; ++c) {
      counts[atom] = c;
      self(self, j + 1, remaining - c,
           logp + static_cast<double>(c) * std::log(p.prob(atom)) - lfact[c]);
    }
  };
  rec(rec, 0, n, 0.0);
  TailEstimate out;
  out.p_hat = std::clamp(total.value(), 0.0, 1.0);
  out.method = EstimatorMethod::exact;
  return out;
}

}  // namespace mdpboot
