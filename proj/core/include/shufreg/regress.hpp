#pragma once

// Minimum-contrast monotone link estimators for shuffled and unlinked data.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "shufreg/deconv.hpp"
#include "shufreg/dist1d.hpp"
#include "shufreg/synth.hpp"

namespace shufreg {

/// How the contrast slack is chosen: sigma² for shuffled data, n^{-1/2} for
/// unlinked data.
enum class EtaMode { shuffled, unlinked };

struct FitConfig {
  double M = 1.0;
  double a = 1.0;
  double c_x = 1.0;  // known lower bound on the covariate density
  EtaMode eta_mode = EtaMode::shuffled;
  BandwidthRule rule{};

  void validate() const;
  /// Bound on the empirical (a+2)-th absolute moment of the fitted values.
  [[nodiscard]] double moment_bound() const noexcept { return M / c_x; }
  [[nodiscard]] double moment_order() const noexcept { return a + 2.0; }
  [[nodiscard]] double slack(std::size_t n, double sigma) const noexcept;
};

struct FitResult {
  MonotoneStepFn fn;
  std::vector<double> knot_values;  // fitted values at the sorted covariates
  double eta = 0.0;
  bool projection_activated = false;
  /// W2(mu_Y, mu_fit) for shuffled fits; W1(deconvolved signal, mu_fit) for
  /// unlinked fits.
  double contrast = 0.0;
  std::size_t n = 0;
  double sigma = 0.0;
  /// Unlinked fits only.
  std::optional<TabulatedDistribution> signal;
  std::optional<Bandwidth> bandwidth;
};

/// Monotone rearrangement: sorted(y) assigned to x_ordered, then moment
/// projection and piecewise-constant extension. Throws std::invalid_argument
/// on length mismatch, empty input, or unsorted covariates.
FitResult fit_shuffled(std::span<const double> x_ordered, std::span<const double> y, double sigma,
                       const FitConfig& cfg);

/// Deconvolves y, assigns the (2i-1)/(2n) quantile of the estimate to the i-th
/// covariate order statistic, projects and extends. Uses
/// GridSpec::covering(y, sigma) when no grid is given.
FitResult fit_unlinked(std::span<const double> x, std::span<const double> y, const NoiseSpec& noise,
                       double sigma, const FitConfig& cfg, std::optional<GridSpec> grid = std::nullopt);

struct Projection {
  std::vector<double> values;
  bool activated = false;
  double threshold = 0.0;  // tau; +inf when not activated
};

/// Symmetric winsorization at the largest tau with
/// (1/n) Σ min(|v_i|, tau)^p <= bound. Unchanged when already within bound.
Projection project_moment(std::span<const double> values, double bound, double p);

/// values[i] on (x[i-1], x[i]], values[0] on [0, x[0]], values.back() beyond.
/// Throws std::invalid_argument on duplicate knots or length mismatch.
MonotoneStepFn extend_piecewise(std::span<const double> x_ordered, std::span<const double> values);

/// "# key=value" metadata lines, then a "knot,value" table.
void write_fit_csv(std::ostream& out, const FitResult& fit);

}  // namespace shufreg
