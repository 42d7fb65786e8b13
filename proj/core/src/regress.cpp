#include "shufreg/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "shufreg/csv.hpp"

namespace shufreg {

void FitConfig::validate() const {
  if (!(M > 0.0) || !(a > 0.0) || !(c_x > 0.0)) {
    throw std::invalid_argument("fit config needs M, a, c_x > 0");
  }
}

double FitConfig::slack(std::size_t n, double sigma) const noexcept {
  return eta_mode == EtaMode::shuffled ? sigma * sigma : 1.0 / std::sqrt(static_cast<double>(n));
}

Projection project_moment(std::span<const double> values, double bound, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("moment order must be positive");
  if (!(bound >= 0.0)) throw std::invalid_argument("moment bound must be >= 0");
  Projection out{std::vector<double>(values.begin(), values.end()), false,
                 std::numeric_limits<double>::infinity()};
  if (values.empty()) return out;
  const auto n = static_cast<double>(values.size());
  auto clipped_moment = [&](double tau) {
    double sum = 0.0;
    for (double v : values) sum += std::pow(std::min(std::abs(v), tau), p);
    return sum / n;
  };
  double top = 0.0;
  for (double v : values) top = std::max(top, std::abs(v));
  if (clipped_moment(top) <= bound) return out;

  double lo = 0.0;  // feasible
  double hi = top;  // infeasible
  if (bound > 0.0) {
    for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (clipped_moment(mid) <= bound ? lo : hi) = mid;
    }
  }
  for (auto& v : out.values) v = std::clamp(v, -lo, lo);
  out.activated = true;
  out.threshold = lo;
  return out;
}

MonotoneStepFn extend_piecewise(std::span<const double> x_ordered, std::span<const double> values) {
  if (x_ordered.size() != values.size()) throw std::invalid_argument("knots and values differ in length");
  for (std::size_t i = 1; i < x_ordered.size(); ++i) {
    if (x_ordered[i] == x_ordered[i - 1]) {
      throw std::invalid_argument("duplicate covariate value " + csv::format_double(x_ordered[i]));
    }
  }
  return MonotoneStepFn(std::vector<double>(x_ordered.begin(), x_ordered.end()),
                        std::vector<double>(values.begin(), values.end()));
}

namespace {

void check_sorted_unit(std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0 && x[i] <= 1.0)) throw std::invalid_argument("covariate outside [0, 1]");
    if (i > 0 && x[i] < x[i - 1]) throw std::invalid_argument("covariates must be sorted");
  }
}

}  // namespace

FitResult fit_shuffled(std::span<const double> x_ordered, std::span<const double> y, double sigma,
                       const FitConfig& cfg) {
  cfg.validate();
  if (x_ordered.size() != y.size()) {
    throw std::invalid_argument("fit_shuffled: " + std::to_string(x_ordered.size()) + " covariates but " +
                                std::to_string(y.size()) + " responses");
  }
  if (y.empty()) throw std::invalid_argument("fit_shuffled: empty sample");
  check_sorted_unit(x_ordered);

  const EmpiricalMeasure mu_y(std::vector<double>(y.begin(), y.end()));
  auto proj = project_moment(mu_y.atoms(), cfg.moment_bound(), cfg.moment_order());
  const EmpiricalMeasure mu_fit(proj.values);
  const double contrast = w2_empirical(mu_y, mu_fit);
  auto fn = extend_piecewise(x_ordered, proj.values);
  return FitResult{std::move(fn), std::move(proj.values), cfg.slack(y.size(), sigma), proj.activated,
                   contrast, y.size(), sigma, std::nullopt, std::nullopt};
}

FitResult fit_unlinked(std::span<const double> x, std::span<const double> y, const NoiseSpec& noise,
                       double sigma, const FitConfig& cfg, std::optional<GridSpec> grid) {
  cfg.validate();
  if (x.size() != y.size()) {
    throw std::invalid_argument("fit_unlinked: " + std::to_string(x.size()) + " covariates but " +
                                std::to_string(y.size()) + " responses");
  }
  if (y.size() < 2) throw std::invalid_argument("fit_unlinked: need at least two observations");
  std::vector<double> xs(x.begin(), x.end());
  std::sort(xs.begin(), xs.end());
  check_sorted_unit(xs);

  const EmpiricalMeasure mu_y(std::vector<double>(y.begin(), y.end()));
  const std::size_t n = y.size();
  const Bandwidth bw = select_bandwidth(n, sigma, noise, cfg.rule);
  const GridSpec g = grid ? *grid : GridSpec::covering(y, sigma);
  auto signal = deconvolve_cdf(mu_y, noise, sigma, bw.h, g);

  std::vector<double> values(n);
  const auto nd = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = quantile(signal, (2.0 * static_cast<double>(i) + 1.0) / (2.0 * nd));
  }
  auto proj = project_moment(values, cfg.moment_bound(), cfg.moment_order());
  const double contrast = w1_mixed(signal, EmpiricalMeasure(proj.values));
  auto fn = extend_piecewise(xs, proj.values);
  return FitResult{std::move(fn), std::move(proj.values), cfg.slack(n, sigma), proj.activated,
                   contrast, n, sigma, std::move(signal), bw};
}

void write_fit_csv(std::ostream& out, const FitResult& fit) {
  out << "# n=" << fit.n << '\n'
      << "# sigma=" << csv::format_double(fit.sigma) << '\n'
      << "# eta=" << csv::format_double(fit.eta) << '\n'
      << "# projection_activated=" << (fit.projection_activated ? "true" : "false") << '\n';
  csv::Table table{{"knot", "value"}, {}};
  const auto knots = fit.fn.knots();
  const auto values = fit.fn.values();
  table.rows.reserve(knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i) {
    table.rows.push_back({csv::format_double(knots[i]), csv::format_double(values[i])});
  }
  csv::write(out, table);
}

}  // namespace shufreg
