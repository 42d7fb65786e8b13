#pragma once

#include <cstddef>
#include <span>

namespace shufreg::stats {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample sd / sqrt(count); 0 for a single value
};

MeanStderr mean_stderr(std::span<const double> values);

double median(std::span<const double> values);

double normal_cdf(double x) noexcept;

/// Kolmogorov limiting survival function Q(λ) = 2 Σ (-1)^{k-1} exp(-2 k² λ²).
double kolmogorov_survival(double lambda) noexcept;

struct KsResult {
  double statistic = 0.0;  // sup |F_a - F_b|
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value and the
/// usual small-sample correction (√m + 0.12 + 0.11/√m) on the effective size.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

}  // namespace shufreg::stats
