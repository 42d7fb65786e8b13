#pragma once

// Wasserstein deconvolution: Fourier-inversion estimate of the signal CDF from
// Y = Z + sigma delta with known supersmooth noise, and the regime-dependent
// bandwidth rule.

#include <cstddef>
#include <span>
#include <vector>

#include "shufreg/dist1d.hpp"
#include "shufreg/synth.hpp"

namespace shufreg {

/// Free constant C of the bandwidth h = sigma (C gamma2 log(n sigma² log n))^{-1/beta}
/// and the log-exponent eta of the rate regimes. Requires 0 < C < 1/2 and
/// eta > C / (1 - 2C).
struct BandwidthRule {
  double c_const = 0.1;
  double eta = 0.2;

  void validate() const;
};

/// Uniform evaluation grid; `points` must be a power of two >= 2.
struct GridSpec {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t points = std::size_t{1} << 14;

  void validate() const;

  /// [min y - 6(1 + sigma), max y + 6(1 + sigma)].
  static GridSpec covering(std::span<const double> ys, double sigma,
                           std::size_t points = std::size_t{1} << 14);
};

enum class BandwidthBranch { root_n, noise_scaled };

struct Bandwidth {
  double h = 1.0;
  BandwidthBranch branch = BandwidthBranch::root_n;
  /// The inner logarithm was nonpositive and h fell back to n^{-1/2}.
  bool fallback = false;
};

/// sigma >= n^{-1/2}: h = sigma (C gamma2 log(n sigma² log n))^{-1/beta};
/// sigma < n^{-1/2}: h = n^{-1/2}. Clamped into (0, 1). Throws
/// std::invalid_argument for n < 2 or sigma < 0.
Bandwidth select_bandwidth(std::size_t n, double sigma, const NoiseSpec& noise, const BandwidthRule& rule);

/// The five noise-level ranges of the minimax rate table, in increasing sigma:
/// (0, r], (r, r L^eta], (r L^eta, r L^{1/beta}], (r L^{1/beta}, n^{-1/2+eta}],
/// (n^{-1/2+eta}, A], with r = n^{-1/2} and L = log n.
enum class NoiseRegime { below_root, root_to_log_eta, log_eta_to_log_beta, log_beta_to_power, above_power };

struct RegimeRange {
  double lower;  // exclusive
  double upper;  // inclusive
};

RegimeRange regime_range(NoiseRegime regime, std::size_t n, double eta, double beta, double sigma_max = 1.0);
NoiseRegime classify_regime(std::size_t n, double sigma, double eta, double beta);

/// Cases of the attainable upper rate v_n.
enum class UpperRateCase { noise_dominated, transition, root_n };

UpperRateCase upper_rate_case(std::size_t n, double sigma, double eta);

/// v_n: sigma (log(n sigma² log n))^{-1/beta}, n^{-1/2} (log log n)^{-1/beta}
/// (log n)^eta, or n^{-1/2} depending on the case.
double upper_rate(std::size_t n, double sigma, double eta, double beta);

/// Fourier transform of the smoothing kernel: (1 - t²)³ on [-1, 1], 0 outside.
double kernel_ft(double t) noexcept;

/// Half-line trapezoid intervals on [0, 1/h]: at least 2^11 (2^12 over the
/// symmetric range), doubled until the alias period 2 pi N h is at least twice
/// the grid width.
std::size_t frequency_intervals(double h, const GridSpec& grid);

/// max over |t| <= 1/h of 1 / charfn(sigma t), evaluated on the frequency grid.
double max_amplification(const NoiseSpec& noise, double sigma, double h, const GridSpec& grid);

/// Running maximum followed by clipping to [0, 1]. Idempotent.
std::vector<double> isotonize_cdf(std::vector<double> raw);

/// Raw density estimate on the grid points:
/// f(x) = (1/2 pi) ∫_{|t| <= 1/h} e^{-itx} K*(h t) phi_Y(t) / charfn(sigma t) dt.
/// Throws std::invalid_argument when h is outside (0, 1], sigma < 0, or the
/// grid does not cover the padded data range.
std::vector<double> deconvolve_density(const EmpiricalMeasure& ys, const NoiseSpec& noise, double sigma,
                                       double h, const GridSpec& grid);

/// deconvolve_density integrated by cumulative trapezoid and isotonized.
TabulatedDistribution deconvolve_cdf(const EmpiricalMeasure& ys, const NoiseSpec& noise, double sigma, double h,
                                     const GridSpec& grid);

}  // namespace shufreg
