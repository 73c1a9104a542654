#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace mdpboot {

/// Atom label. Scalar measures leave `y` at zero.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend auto operator<=>(const Point&, const Point&) = default;
};

inline constexpr double kProbabilitySumTolerance = 1e-12;
inline constexpr double kZeroMassTolerance = 1e-10;

/// Probability measure on a finite set of distinct atoms.
///
/// Cheap to copy: the atom table is shared and immutable, so copies of a
/// measure (and every density or empirical measure built over it) refer to
/// the same support.
class FiniteProbabilityMeasure {
 public:
  FiniteProbabilityMeasure(std::vector<double> points, std::vector<double> probs);
  FiniteProbabilityMeasure(std::vector<Point> points, std::vector<double> probs);

  static FiniteProbabilityMeasure uniform(std::vector<double> points);

  std::size_t size() const noexcept { return data_->probs.size(); }
  int dimension() const noexcept { return data_->dimension; }
  std::span<const Point> points() const noexcept { return data_->points; }
  std::span<const double> probs() const noexcept { return data_->probs; }
  const Point& point(std::size_t i) const { return data_->points.at(i); }
  double prob(std::size_t i) const { return data_->probs.at(i); }

  /// Same atoms in the same order (probabilities may differ).
  bool same_support(const FiniteProbabilityMeasure& other) const noexcept;

  /// A measure over the same atoms with different weights.
  FiniteProbabilityMeasure reweighted(std::vector<double> probs) const;

 private:
  struct Data {
    std::vector<Point> points;
    std::vector<double> probs;
    int dimension = 1;
  };

  FiniteProbabilityMeasure(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  static std::shared_ptr<const Data> make(std::vector<Point> points, std::vector<double> probs,
                                          int dimension);

  std::shared_ptr<const Data> data_;
};

/// Real function tabulated on the atoms of a support.
class TestFunction {
 public:
  explicit TestFunction(std::vector<double> values);

  static TestFunction on(const FiniteProbabilityMeasure& base,
                         const std::function<double(const Point&)>& fn);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double min() const;
  double max() const;
  bool is_constant() const;

 private:
  std::vector<double> values_;
};

/// Counts over the atoms of a reference support, as produced by sampling.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(FiniteProbabilityMeasure base, std::vector<std::uint64_t> counts);

  const FiniteProbabilityMeasure& base() const noexcept { return base_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t count(std::size_t i) const { return counts_.at(i); }
  std::uint64_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return counts_.size(); }

  double frequency(std::size_t i) const { return static_cast<double>(counts_.at(i)) / static_cast<double>(n_); }
  std::vector<double> frequencies() const;

  /// The empirical measure as a probability measure on the reference atoms.
  FiniteProbabilityMeasure as_measure() const;

 private:
  FiniteProbabilityMeasure base_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

/// Signed measure G with G(S) = 0, stored as its density g = dG/dP.
class SignedMeasureDensity {
 public:
  SignedMeasureDensity(FiniteProbabilityMeasure base, std::vector<double> density);

  static SignedMeasureDensity zero(const FiniteProbabilityMeasure& base);

  const FiniteProbabilityMeasure& base() const noexcept { return base_; }
  std::span<const double> density() const noexcept { return density_; }
  double operator[](std::size_t i) const { return density_[i]; }
  std::size_t size() const noexcept { return density_.size(); }

 private:
  FiniteProbabilityMeasure base_;
  std::vector<double> density_;
};

EmpiricalMeasure empirical_from_sample(std::span<const std::size_t> sample,
                                       const FiniteProbabilityMeasure& base);

double integrate(const TestFunction& f, const FiniteProbabilityMeasure& m);
double integrate(const TestFunction& f, const EmpiricalMeasure& m);
double integrate(const TestFunction& f, const SignedMeasureDensity& m);

/// (num - den) / a as a density with respect to `den`.
///
/// Throws AbsoluteContinuityError when `num` charges an atom `den` does not.
SignedMeasureDensity scaled_deviation(const EmpiricalMeasure& num,
                                      const FiniteProbabilityMeasure& den, double a);
SignedMeasureDensity scaled_deviation(const EmpiricalMeasure& num, const EmpiricalMeasure& den,
                                      double a);

/// E_P f and Var_P f.
double mean(const FiniteProbabilityMeasure& p, const TestFunction& f);
double variance(const FiniteProbabilityMeasure& p, const TestFunction& f);

}  // namespace mdpboot
