#include "shufreg/dist1d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace shufreg {

// ---------------------------------------------------------------------------
// EmpiricalMeasure

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("empirical measure needs at least one atom");
  for (double a : atoms_) {
    if (std::isnan(a)) throw std::invalid_argument("empirical measure atom is NaN");
  }
  std::stable_sort(atoms_.begin(), atoms_.end());
}

double EmpiricalMeasure::quantile(double u) const {
  if (!(u > 0.0 && u <= 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1]");
  const auto n = static_cast<double>(atoms_.size());
  auto k = static_cast<std::size_t>(std::ceil(u * n));
  if (k > 1 && static_cast<double>(k - 1) / n >= u) --k;
  k = std::clamp<std::size_t>(k, 1, atoms_.size());
  return atoms_[k - 1];
}

double EmpiricalMeasure::cdf(double x) const noexcept {
  const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
  return static_cast<double>(it - atoms_.begin()) / static_cast<double>(atoms_.size());
}

namespace {

double empirical_left_limit(const EmpiricalMeasure& m, double x) noexcept {
  const auto atoms = m.atoms();
  const auto it = std::lower_bound(atoms.begin(), atoms.end(), x);
  return static_cast<double>(it - atoms.begin()) / static_cast<double>(atoms.size());
}

// ∫_0^len |d0 + (d1 - d0) s/len| ds
double abs_linear_integral(double d0, double d1, double len) noexcept {
  if ((d0 >= 0.0 && d1 >= 0.0) || (d0 <= 0.0 && d1 <= 0.0)) {
    return 0.5 * len * (std::abs(d0) + std::abs(d1));
  }
  const double a0 = std::abs(d0);
  const double a1 = std::abs(d1);
  return 0.5 * len * (a0 * a0 + a1 * a1) / (a0 + a1);
}

// Integrates |F - G| over consecutive merged breakpoints. Both functions must
// be linear on each open interval between breakpoints.
template <class RightF, class LeftF, class RightG, class LeftG>
double integrate_abs_difference(const std::vector<double>& points, RightF f_right, LeftF f_left,
                                RightG g_right, LeftG g_left) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const double p = points[k];
    const double q = points[k + 1];
    if (!(q > p)) continue;
    const double d0 = f_right(p) - g_right(p);
    const double d1 = f_left(q) - g_left(q);
    total += abs_linear_integral(d0, d1, q - p);
  }
  return total;
}

std::vector<double> grid_points(const TabulatedDistribution& d) {
  std::vector<double> pts(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) pts[i] = d.point(i);
  return pts;
}

std::vector<double> merge_sorted(const std::vector<double>& a, std::span<const double> b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// TabulatedDistribution

TabulatedDistribution::TabulatedDistribution(double lo, double hi, std::vector<double> cdf)
    : lo_(lo), hi_(hi), step_(0.0), cdf_(std::move(cdf)) {
  if (!(lo_ < hi_) || !std::isfinite(lo_) || !std::isfinite(hi_)) {
    throw std::invalid_argument("degenerate grid: need finite lo < hi");
  }
  if (cdf_.size() < 2) throw std::invalid_argument("tabulated distribution needs >= 2 grid points");
  step_ = (hi_ - lo_) / static_cast<double>(cdf_.size() - 1);
  double prev = 0.0;
  for (double v : cdf_) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("CDF value outside [0, 1]");
    if (v < prev) throw std::invalid_argument("CDF values must be nondecreasing");
    prev = v;
  }
  if (cdf_.front() > 0.01 || cdf_.back() < 0.99) {
    throw std::invalid_argument("grid does not cover the distribution (cdf[first] = " +
                                std::to_string(cdf_.front()) +
                                ", cdf[last] = " + std::to_string(cdf_.back()) + ")");
  }
}

double TabulatedDistribution::point(std::size_t i) const noexcept {
  return i + 1 == cdf_.size() ? hi_ : lo_ + step_ * static_cast<double>(i);
}

double TabulatedDistribution::interpolate(double x) const noexcept {
  const double pos = (x - lo_) / step_;
  const std::size_t last = cdf_.size() - 1;
  auto i = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, static_cast<double>(last - 1)));
  const double frac = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
  return cdf_[i] + frac * (cdf_[i + 1] - cdf_[i]);
}

double TabulatedDistribution::cdf(double x) const noexcept {
  if (x < lo_) return 0.0;
  if (x >= hi_) return 1.0;
  return interpolate(x);
}

double TabulatedDistribution::left_limit(double x) const noexcept {
  if (x <= lo_) return 0.0;
  if (x > hi_) return 1.0;
  return interpolate(x);
}

// ---------------------------------------------------------------------------
// MonotoneStepFn

MonotoneStepFn::MonotoneStepFn(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.empty() || knots_.size() != values_.size()) {
    throw std::invalid_argument("step function needs matching, nonempty knots and values");
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!(knots_[i] >= 0.0 && knots_[i] <= 1.0)) throw std::invalid_argument("knot outside [0, 1]");
    if (std::isnan(values_[i])) throw std::invalid_argument("step value is NaN");
    if (i > 0 && !(knots_[i] > knots_[i - 1])) {
      throw std::invalid_argument("knots must be strictly increasing");
    }
    if (i > 0 && values_[i] < values_[i - 1]) {
      throw std::invalid_argument("step values must be nondecreasing");
    }
  }
}

double MonotoneStepFn::operator()(double t) const noexcept {
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - knots_.begin()), knots_.size() - 1);
  return values_[idx];
}

double generalized_inverse(const MonotoneStepFn& m, double x) noexcept {
  const auto values = m.values();
  const auto j = static_cast<std::size_t>(std::upper_bound(values.begin(), values.end(), x) - values.begin());
  if (j == 0) return 0.0;
  if (j == values.size()) return 1.0;
  return m.knots()[j - 1];
}

// ---------------------------------------------------------------------------
// Wasserstein distances

double w1_sorted_matching(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sorted matching needs equal sample sizes");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

double w1_cdf_area(const EmpiricalMeasure& a, const EmpiricalMeasure& b) noexcept {
  // Both CDFs are constant between merged atoms; walk the merge once.
  const auto xa = a.atoms();
  const auto xb = b.atoms();
  const auto na = static_cast<double>(xa.size());
  const auto nb = static_cast<double>(xb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double x = std::min(xa[0], xb[0]);
  double total = 0.0;
  while (i < xa.size() || j < xb.size()) {
    while (i < xa.size() && xa[i] <= x) ++i;
    while (j < xb.size() && xb[j] <= x) ++j;
    if (i == xa.size() && j == xb.size()) break;
    double next = i < xa.size() ? xa[i] : xb[j];
    if (j < xb.size()) next = std::min(next, xb[j]);
    total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - x);
    x = next;
  }
  return total;
}

double w1_empirical(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  return a.size() == b.size() ? w1_sorted_matching(a, b) : w1_cdf_area(a, b);
}

double w2_empirical(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("w2_empirical: incompatible sample sizes " + std::to_string(a.size()) +
                                " and " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum / static_cast<double>(a.size()));
}

double w1_tabulated(const TabulatedDistribution& a, const TabulatedDistribution& b) {
  const auto points = merge_sorted(grid_points(a), grid_points(b));
  return integrate_abs_difference(
      points, [&](double x) { return a.cdf(x); }, [&](double x) { return a.left_limit(x); },
      [&](double x) { return b.cdf(x); }, [&](double x) { return b.left_limit(x); });
}

double w1_mixed(const TabulatedDistribution& a, const EmpiricalMeasure& b) {
  const auto points = merge_sorted(grid_points(a), b.atoms());
  return integrate_abs_difference(
      points, [&](double x) { return a.cdf(x); }, [&](double x) { return a.left_limit(x); },
      [&](double x) { return b.cdf(x); }, [&](double x) { return empirical_left_limit(b, x); });
}

double quantile(const TabulatedDistribution& d, double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
  const auto values = d.values();
  const auto it = std::lower_bound(values.begin(), values.end(), u);
  if (it == values.end()) return d.hi();
  const auto i = static_cast<std::size_t>(it - values.begin());
  if (i == 0) return d.lo();
  const double c0 = values[i - 1];
  const double c1 = values[i];
  const double frac = (u - c0) / (c1 - c0);
  return d.point(i - 1) + frac * (d.point(i) - d.point(i - 1));
}

double empirical_moment(std::span<const double> values, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("moment order must be positive");
  if (values.empty()) throw std::invalid_argument("moment of an empty sample");
  double sum = 0.0;
  for (double v : values) sum += std::pow(std::abs(v), p);
  return sum / static_cast<double>(values.size());
}

double empirical_moment(const EmpiricalMeasure& a, double p) { return empirical_moment(a.atoms(), p); }

}  // namespace shufreg
