#include "shufreg/deconv.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace shufreg {

void BandwidthRule::validate() const {
  if (!(c_const > 0.0 && c_const < 0.5)) throw std::invalid_argument("bandwidth constant must lie in (0, 1/2)");
  if (!(eta > c_const / (1.0 - 2.0 * c_const))) {
    throw std::invalid_argument("eta must exceed C / (1 - 2C)");
  }
}

void GridSpec::validate() const {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("degenerate grid: need finite lo < hi");
  }
  if (points < 2 || !std::has_single_bit(points)) {
    throw std::invalid_argument("grid point count must be a power of two >= 2");
  }
}

GridSpec GridSpec::covering(std::span<const double> ys, double sigma, std::size_t points) {
  if (ys.empty()) throw std::invalid_argument("cannot size a grid for an empty sample");
  const auto [mn, mx] = std::minmax_element(ys.begin(), ys.end());
  const double pad = 6.0 * (1.0 + sigma);
  return GridSpec{*mn - pad, *mx + pad, points};
}

Bandwidth select_bandwidth(std::size_t n, double sigma, const NoiseSpec& noise, const BandwidthRule& rule) {
  if (n < 2) throw std::invalid_argument("bandwidth selection needs n >= 2");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  rule.validate();
  const auto nd = static_cast<double>(n);
  const double root = 1.0 / std::sqrt(nd);
  constexpr double kMaxH = 1.0 - 1e-12;
  if (sigma < root) return {std::min(root, kMaxH), BandwidthBranch::root_n, false};

  const double inner = rule.c_const * noise.gamma2 * std::log(nd * sigma * sigma * std::log(nd));
  if (!(inner > 0.0) || !std::isfinite(inner)) {
    return {std::min(root, kMaxH), BandwidthBranch::noise_scaled, true};
  }
  const double h = sigma * std::pow(inner, -1.0 / noise.beta);
  return {std::clamp(h, std::numeric_limits<double>::min(), kMaxH), BandwidthBranch::noise_scaled, false};
}

RegimeRange regime_range(NoiseRegime regime, std::size_t n, double eta, double beta, double sigma_max) {
  const auto nd = static_cast<double>(n);
  const double root = 1.0 / std::sqrt(nd);
  const double log_n = std::log(nd);
  const double b1 = root * std::pow(log_n, eta);
  const double b2 = root * std::pow(log_n, 1.0 / beta);
  const double b3 = std::pow(nd, -0.5 + eta);
  switch (regime) {
    case NoiseRegime::below_root:
      return {0.0, root};
    case NoiseRegime::root_to_log_eta:
      return {root, b1};
    case NoiseRegime::log_eta_to_log_beta:
      return {b1, b2};
    case NoiseRegime::log_beta_to_power:
      return {b2, b3};
    case NoiseRegime::above_power:
      return {b3, sigma_max};
  }
  throw std::invalid_argument("unknown regime");
}

NoiseRegime classify_regime(std::size_t n, double sigma, double eta, double beta) {
  for (auto r : {NoiseRegime::below_root, NoiseRegime::root_to_log_eta, NoiseRegime::log_eta_to_log_beta,
                 NoiseRegime::log_beta_to_power}) {
    const auto range = regime_range(r, n, eta, beta);
    if (sigma <= range.upper) return r;
  }
  return NoiseRegime::above_power;
}

UpperRateCase upper_rate_case(std::size_t n, double sigma, double eta) {
  const auto nd = static_cast<double>(n);
  const double root = 1.0 / std::sqrt(nd);
  if (sigma <= root) return UpperRateCase::root_n;
  if (sigma >= root * std::pow(std::log(nd), eta)) return UpperRateCase::noise_dominated;
  return UpperRateCase::transition;
}

double upper_rate(std::size_t n, double sigma, double eta, double beta) {
  const auto nd = static_cast<double>(n);
  const double root = 1.0 / std::sqrt(nd);
  switch (upper_rate_case(n, sigma, eta)) {
    case UpperRateCase::root_n:
      return root;
    case UpperRateCase::transition:
      return root * std::pow(std::log(std::log(nd)), -1.0 / beta) * std::pow(std::log(nd), eta);
    case UpperRateCase::noise_dominated:
      return sigma * std::pow(std::log(nd * sigma * sigma * std::log(nd)), -1.0 / beta);
  }
  return root;
}

double kernel_ft(double t) noexcept {
  if (std::abs(t) >= 1.0) return 0.0;
  const double s = 1.0 - t * t;
  return s * s * s;
}

std::size_t frequency_intervals(double h, const GridSpec& grid) {
  std::size_t intervals = std::size_t{1} << 11;
  const double width = grid.hi - grid.lo;
  while (2.0 * std::numbers::pi * static_cast<double>(intervals) * h < 2.0 * width &&
         intervals < (std::size_t{1} << 24)) {
    intervals *= 2;
  }
  return intervals;
}

double max_amplification(const NoiseSpec& noise, double sigma, double h, const GridSpec& grid) {
  const std::size_t intervals = frequency_intervals(h, grid);
  const double dt = (1.0 / h) / static_cast<double>(intervals);
  double worst = 1.0;
  for (std::size_t k = 0; k <= intervals; ++k) {
    worst = std::max(worst, 1.0 / noise_charfn(noise, sigma * dt * static_cast<double>(k)));
  }
  return worst;
}

std::vector<double> isotonize_cdf(std::vector<double> raw) {
  if (raw.empty()) return raw;
  double running = raw.front();
  for (auto& v : raw) {
    running = std::max(running, v);
    v = std::clamp(running, 0.0, 1.0);
  }
  return raw;
}

std::vector<double> deconvolve_density(const EmpiricalMeasure& ys, const NoiseSpec& noise, double sigma, double h,
                                       const GridSpec& grid) {
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("bandwidth must lie in (0, 1]");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  grid.validate();
  const auto atoms = ys.atoms();
  const double pad = 6.0 * (1.0 + sigma);
  const double slack = 1e-12 * (1.0 + std::abs(grid.lo) + std::abs(grid.hi));
  if (grid.lo > atoms.front() - pad + slack || grid.hi < atoms.back() + pad - slack) {
    throw std::invalid_argument("grid too narrow: must cover the data range padded by 6(1 + sigma)");
  }

  using cplx = std::complex<double>;
  const std::size_t intervals = frequency_intervals(h, grid);
  const double dt = (1.0 / h) / static_cast<double>(intervals);
  constexpr std::size_t kResync = 256;

  // Empirical characteristic function of Y - lo at t_k = k dt.
  std::vector<cplx> phi(intervals + 1, cplx(0.0, 0.0));
  for (double y : atoms) {
    const double shift = y - grid.lo;
    const cplx rot = std::polar(1.0, dt * shift);
    cplx z(1.0, 0.0);
    for (std::size_t k = 0; k <= intervals; ++k) {
      if (k % kResync == 0) z = std::polar(1.0, dt * static_cast<double>(k) * shift);
      phi[k] += z;
      z *= rot;
    }
  }

  // Half-line trapezoid: f(x) = (dt/pi) Σ_k w_k Re(A_k e^{-i t_k (x - lo)}).
  const auto n = static_cast<double>(atoms.size());
  std::vector<cplx> weight(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) {
    const double t = dt * static_cast<double>(k);
    const double w = (k == 0 || k == intervals) ? 0.5 : 1.0;
    weight[k] = phi[k] * (w * kernel_ft(h * t) / noise_charfn(noise, sigma * t) / n);
  }

  const std::size_t m_points = grid.points;
  const double dx = (grid.hi - grid.lo) / static_cast<double>(m_points - 1);
  std::vector<double> density(m_points, 0.0);
  for (std::size_t k = 0; k < intervals; ++k) {
    if (weight[k] == cplx(0.0, 0.0)) continue;
    const double t = dt * static_cast<double>(k);
    const cplx rot = std::polar(1.0, -t * dx);
    cplx z = weight[k];
    for (std::size_t m = 0; m < m_points; ++m) {
      if (m % kResync == 0) z = weight[k] * std::polar(1.0, -t * dx * static_cast<double>(m));
      density[m] += z.real();
      z *= rot;
    }
  }
  for (auto& v : density) v *= dt / std::numbers::pi;
  return density;
}

TabulatedDistribution deconvolve_cdf(const EmpiricalMeasure& ys, const NoiseSpec& noise, double sigma, double h,
                                     const GridSpec& grid) {
  const auto density = deconvolve_density(ys, noise, sigma, h, grid);
  const double dx = (grid.hi - grid.lo) / static_cast<double>(grid.points - 1);
  std::vector<double> cdf(density.size());
  cdf[0] = 0.0;
  for (std::size_t m = 1; m < density.size(); ++m) {
    cdf[m] = cdf[m - 1] + 0.5 * dx * (density[m - 1] + density[m]);
  }
  try {
    return TabulatedDistribution(grid.lo, grid.hi, isotonize_cdf(std::move(cdf)));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("grid too narrow for the deconvolved distribution: ") + e.what());
  }
}

}  // namespace shufreg
