#include "mdpboot/measures.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "mdpboot/errors.h"

namespace mdpboot {
namespace {

std::vector<Point> to_points(const std::vector<double>& xs) {
  std::vector<Point> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(Point{x, 0.0});
  return out;
}

void check_same_support(const FiniteProbabilityMeasure& a, const FiniteProbabilityMeasure& b,
                        const char* what) {
  if (!a.same_support(b)) {
    throw InputError(std::string(what) + ": measures are defined on different supports");
  }
}

void check_length(std::size_t f_size, std::size_t m_size, const char* what) {
  if (f_size != m_size) {
    std::ostringstream os;
    os << what << ": test function has " << f_size << " values but the support has " << m_size
       << " atoms";
    throw InputError(os.str());
  }
}

}  // namespace

std::shared_ptr<const FiniteProbabilityMeasure::Data> FiniteProbabilityMeasure::make(
    std::vector<Point> points, std::vector<double> probs, int dimension) {
  if (points.empty()) throw InputError("probability measure needs at least one atom");
  if (points.size() != probs.size()) {
    std::ostringstream os;
    os << "probability measure: " << points.size() << " points but " << probs.size()
       << " probabilities";
    throw InputError(os.str());
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      std::ostringstream os;
      os << "probability measure: probability " << p << " at atom " << i << " is outside [0,1]";
      throw InputError(os.str());
    }
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y)) {
      throw InputError("probability measure: atom labels must be finite");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "probability measure: probabilities sum to " << sum << ", expected 1";
    throw InputError(os.str());
  }
  std::vector<Point> sorted = points;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InputError("probability measure: atoms must be pairwise distinct");
  }
  auto data = std::make_shared<Data>();
  data->points = std::move(points);
  data->probs = std::move(probs);
  data->dimension = dimension;
  return data;
}

FiniteProbabilityMeasure::FiniteProbabilityMeasure(std::vector<double> points,
                                                   std::vector<double> probs)
    : data_(make(to_points(points), std::move(probs), 1)) {}

FiniteProbabilityMeasure::FiniteProbabilityMeasure(std::vector<Point> points,
                                                   std::vector<double> probs)
    : data_(make(std::move(points), std::move(probs), 2)) {}

FiniteProbabilityMeasure FiniteProbabilityMeasure::uniform(std::vector<double> points) {
  const std::size_t m = points.size();
  if (m == 0) throw InputError("uniform measure needs at least one atom");
  std::vector<double> probs(m, 1.0 / static_cast<double>(m));
  // Push rounding residue into the last atom so the sum is exact.
  const double head = std::accumulate(probs.begin(), probs.end() - 1, 0.0);
  probs.back() = 1.0 - head;
  return FiniteProbabilityMeasure(std::move(points), std::move(probs));
}

bool FiniteProbabilityMeasure::same_support(const FiniteProbabilityMeasure& other) const noexcept {
  if (data_ == other.data_) return true;
  return data_->dimension == other.data_->dimension && data_->points == other.data_->points;
}

FiniteProbabilityMeasure FiniteProbabilityMeasure::reweighted(std::vector<double> probs) const {
  return FiniteProbabilityMeasure(make(data_->points, std::move(probs), data_->dimension));
}

TestFunction::TestFunction(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw InputError("test function values must be finite");
  }
}

TestFunction TestFunction::on(const FiniteProbabilityMeasure& base,
                              const std::function<double(const Point&)>& fn) {
  std::vector<double> values;
  values.reserve(base.size());
  for (const Point& p : base.points()) values.push_back(fn(p));
  return TestFunction(std::move(values));
}

double TestFunction::min() const {
  if (values_.empty()) throw InputError("empty test function");
  return *std::min_element(values_.begin(), values_.end());
}

double TestFunction::max() const {
  if (values_.empty()) throw InputError("empty test function");
  return *std::max_element(values_.begin(), values_.end());
}

bool TestFunction::is_constant() const {
  return values_.empty() || min() == max();
}

EmpiricalMeasure::EmpiricalMeasure(FiniteProbabilityMeasure base, std::vector<std::uint64_t> counts)
    : base_(std::move(base)), counts_(std::move(counts)) {
  if (counts_.size() != base_.size()) {
    std::ostringstream os;
    os << "empirical measure: " << counts_.size() << " counts for " << base_.size() << " atoms";
    throw InputError(os.str());
  }
  n_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
  if (n_ == 0) throw InputError("empirical measure: total count must be at least 1");
}

std::vector<double> EmpiricalMeasure::frequencies() const {
  std::vector<double> out(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) out[i] = frequency(i);
  return out;
}

FiniteProbabilityMeasure EmpiricalMeasure::as_measure() const {
  std::vector<double> freq = frequencies();
  // Frequencies are correctly rounded quotients; renormalise the residue so the
  // probability-sum invariant holds to the last bit we can control.
  double sum = std::accumulate(freq.begin(), freq.end(), 0.0);
  if (sum != 1.0) {
    auto it = std::max_element(freq.begin(), freq.end());
    *it += 1.0 - sum;
  }
  return base_.reweighted(std::move(freq));
}

SignedMeasureDensity::SignedMeasureDensity(FiniteProbabilityMeasure base, std::vector<double> density)
    : base_(std::move(base)), density_(std::move(density)) {
  if (density_.size() != base_.size()) {
    std::ostringstream os;
    os << "signed measure density: " << density_.size() << " values for " << base_.size()
       << " atoms";
    throw InputError(os.str());
  }
  double total = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < density_.size(); ++i) {
    if (!std::isfinite(density_[i])) throw InputError("signed measure density must be finite");
    total += density_[i] * base_.prob(i);
    scale += std::abs(density_[i]) * base_.prob(i);
  }
  if (std::abs(total) > kZeroMassTolerance * std::max(1.0, scale)) {
    std::ostringstream os;
    os.precision(17);
    os << "signed measure density: total mass " << total << " is not zero";
    throw InputError(os.str());
  }
}

SignedMeasureDensity SignedMeasureDensity::zero(const FiniteProbabilityMeasure& base) {
  return SignedMeasureDensity(base, std::vector<double>(base.size(), 0.0));
}

EmpiricalMeasure empirical_from_sample(std::span<const std::size_t> sample,
                                       const FiniteProbabilityMeasure& base) {
  if (sample.empty()) throw InputError("empirical measure: sample is empty");
  std::vector<std::uint64_t> counts(base.size(), 0);
  for (std::size_t idx : sample) {
    if (idx >= base.size()) {
      std::ostringstream os;
      os << "empirical measure: atom index " << idx << " out of range for support of size "
         << base.size();
      throw InputError(os.str());
    }
    ++counts[idx];
  }
  return EmpiricalMeasure(base, std::move(counts));
}

double integrate(const TestFunction& f, const FiniteProbabilityMeasure& m) {
  check_length(f.size(), m.size(), "integrate");
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += f[i] * m.prob(i);
  return s;
}

double integrate(const TestFunction& f, const EmpiricalMeasure& m) {
  check_length(f.size(), m.size(), "integrate");
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += f[i] * static_cast<double>(m.count(i));
  return s / static_cast<double>(m.n());
}

double integrate(const TestFunction& f, const SignedMeasureDensity& m) {
  check_length(f.size(), m.size(), "integrate");
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += f[i] * m[i] * m.base().prob(i);
  return s;
}

namespace {

SignedMeasureDensity deviation_density(const EmpiricalMeasure& num,
                                       const FiniteProbabilityMeasure& ref, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw InputError("scaled deviation: scale must be positive");
  check_same_support(num.base(), ref, "scaled deviation");
  const std::size_t m = ref.size();
  std::vector<double> g(m, 0.0);
  double mass = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ref.prob(i);
    const double q = num.frequency(i);
    if (r == 0.0) {
      if (num.count(i) > 0) {
        std::ostringstream os;
        os << "scaled deviation: atom " << i
           << " carries sample mass but has zero reference mass (not absolutely continuous)";
        throw AbsoluteContinuityError(os.str());
      }
      continue;
    }
    g[i] = (q - r) / (a * r);
    mass += g[i] * r;
  }
  // Remove the rounding residue of sum(q) - sum(r) so G(S) = 0 holds exactly.
  for (std::size_t i = 0; i < m; ++i) {
    if (ref.prob(i) > 0.0) g[i] -= mass;
  }
  return SignedMeasureDensity(ref, std::move(g));
}

}  // namespace

SignedMeasureDensity scaled_deviation(const EmpiricalMeasure& num,
                                      const FiniteProbabilityMeasure& den, double a) {
  return deviation_density(num, den, a);
}

SignedMeasureDensity scaled_deviation(const EmpiricalMeasure& num, const EmpiricalMeasure& den,
                                      double a) {
  check_same_support(num.base(), den.base(), "scaled deviation");
  return deviation_density(num, den.as_measure(), a);
}

double mean(const FiniteProbabilityMeasure& p, const TestFunction& f) { return integrate(f, p); }

double variance(const FiniteProbabilityMeasure& p, const TestFunction& f) {
  const double mu = mean(p, f);
  double v = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = f[i] - mu;
    v += d * d * p.prob(i);
  }
  return v;
}

}  // namespace mdpboot
