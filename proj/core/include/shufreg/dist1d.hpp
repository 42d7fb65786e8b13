#pragma once

// One-dimensional distributions: empirical measures, tabulated CDFs,
// monotone step functions, generalized inverses and Wasserstein distances.
// All types are immutable after construction.

#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

namespace shufreg {

/// Sorted sample with equal atom masses 1/size().
class EmpiricalMeasure {
 public:
  /// Sorts (stable) the given values. Throws std::invalid_argument when empty
  /// or when a value is NaN.
  explicit EmpiricalMeasure(std::vector<double> atoms);

  [[nodiscard]] std::span<const double> atoms() const noexcept { return atoms_; }
  [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return atoms_[i]; }

  /// Left-continuous quantile: atoms[i-1] for u in ((i-1)/n, i/n].
  /// Throws std::invalid_argument for u outside (0, 1].
  [[nodiscard]] double quantile(double u) const;

  /// Fraction of atoms <= x.
  [[nodiscard]] double cdf(double x) const noexcept;

 private:
  std::vector<double> atoms_;
};

/// CDF values on a uniform grid over [lo, hi]. Below lo the CDF is 0, above hi
/// it is 1, and inside it interpolates linearly between grid points.
class TabulatedDistribution {
 public:
  /// Validates: lo < hi, at least two points, values nondecreasing in [0, 1],
  /// cdf.front() <= 0.01 and cdf.back() >= 0.99 (coverage). Throws
  /// std::invalid_argument otherwise.
  TabulatedDistribution(double lo, double hi, std::vector<double> cdf);

  /// Tabulates a CDF callable on `points` equispaced grid points.
  template <class Cdf>
    requires std::invocable<const Cdf&, double>
  static TabulatedDistribution tabulate(double lo, double hi, std::size_t points, const Cdf& cdf) {
    std::vector<double> values(points);
    const double step = points > 1 ? (hi - lo) / static_cast<double>(points - 1) : 0.0;
    for (std::size_t i = 0; i < points; ++i) values[i] = cdf(lo + step * static_cast<double>(i));
    return TabulatedDistribution(lo, hi, std::move(values));
  }

  [[nodiscard]] double lo() const noexcept { return lo_; }
  [[nodiscard]] double hi() const noexcept { return hi_; }
  [[nodiscard]] std::size_t size() const noexcept { return cdf_.size(); }
  [[nodiscard]] double step() const noexcept { return step_; }
  [[nodiscard]] double point(std::size_t i) const noexcept;
  [[nodiscard]] std::span<const double> values() const noexcept { return cdf_; }

  [[nodiscard]] double cdf(double x) const noexcept;
  /// lim_{y -> x-} F(y)
  [[nodiscard]] double left_limit(double x) const noexcept;

 private:
  double interpolate(double x) const noexcept;

  double lo_;
  double hi_;
  double step_;
  std::vector<double> cdf_;
};

/// Left-continuous nondecreasing step function on [0, 1]: values[0] holds on
/// [0, knots[0]], values[i] on (knots[i-1], knots[i]], and values.back()
/// extends to (knots[n-2], 1] (and beyond the last knot).
class MonotoneStepFn {
 public:
  /// Throws std::invalid_argument unless sizes match and are >= 1, knots are
  /// strictly increasing within [0, 1], and values are nondecreasing.
  MonotoneStepFn(std::vector<double> knots, std::vector<double> values);

  [[nodiscard]] double operator()(double t) const noexcept;

  [[nodiscard]] std::span<const double> knots() const noexcept { return knots_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return knots_.size(); }

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

/// sup{t in [0, 1] : m(t) <= x}, with sup of the empty set equal to 0.
double generalized_inverse(const MonotoneStepFn& m, double x) noexcept;

/// W1 between empirical measures. Equal sizes use sorted matching; unequal
/// sizes integrate |F_a - F_b| over the merged atom set.
double w1_empirical(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// (1/n) Σ |a_(i) - b_(i)|; requires equal sizes.
double w1_sorted_matching(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// ∫ |F_a(x) - F_b(x)| dx, exact for step CDFs; any sizes.
double w1_cdf_area(const EmpiricalMeasure& a, const EmpiricalMeasure& b) noexcept;

/// sqrt((1/n) Σ (a_(i) - b_(i))²). Throws std::invalid_argument on size
/// mismatch.
double w2_empirical(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// ∫ |F_a - F_b| over the merged grid. Both CDFs are piecewise linear between
/// merged breakpoints, so the integral of the absolute difference is computed
/// exactly on each piece (trapezoid with sign-change splitting).
double w1_tabulated(const TabulatedDistribution& a, const TabulatedDistribution& b);

/// W1 between a tabulated distribution and an empirical measure, exact for the
/// piecewise-linear / step representation.
double w1_mixed(const TabulatedDistribution& a, const EmpiricalMeasure& b);

/// Smallest t with F(t) >= u, linearly interpolated between the bracketing
/// grid points. Throws std::invalid_argument for u outside (0, 1).
double quantile(const TabulatedDistribution& d, double u);

/// Empirical measure of {m(x_i)}.
template <class Fn>
  requires std::invocable<const Fn&, double>
EmpiricalMeasure pushforward(const Fn& m, const EmpiricalMeasure& xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs.atoms()) out.push_back(static_cast<double>(m(x)));
  return EmpiricalMeasure(std::move(out));
}

/// (1/n) Σ |a_i|^p. Throws std::invalid_argument for p <= 0.
double empirical_moment(const EmpiricalMeasure& a, double p);
double empirical_moment(std::span<const double> values, double p);

}  // namespace shufreg
