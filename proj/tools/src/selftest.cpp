#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "shufreg/cli.hpp"
#include "shufreg/deconv.hpp"
#include "shufreg/dist1d.hpp"
#include "shufreg/experiments.hpp"
#include "shufreg/regress.hpp"
#include "shufreg/synth.hpp"

namespace shufreg::cli {

namespace {

struct Check {
  bool ok = true;
  std::string first_failure;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) first_failure = what;
    ok = ok && cond;
  }
};

Check dist1d_suite() {
  Check c;
  CounterRng rng(StreamKey::derive(7, "selftest-dist1d"));
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + rng.below(50);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.normal();
      b[i] = std::round(4.0 * rng.normal()) / 4.0;
    }
    const EmpiricalMeasure ma(a), mb(b);
    c.expect(std::abs(w1_sorted_matching(ma, mb) - w1_cdf_area(ma, mb)) < 1e-9, "W1 quantile and CDF formulas differ");
    c.expect(w2_empirical(ma, mb) + 1e-12 >= w1_sorted_matching(ma, mb), "W2 below W1");
  }
  const MonotoneStepFn m({0.25, 0.5, 1.0}, {-1.0, 0.0, 2.0});
  c.expect(m(0.1) == -1.0 && m(0.25) == -1.0 && m(0.3) == 0.0 && m(1.0) == 2.0, "step function is not LCRR");
  c.expect(generalized_inverse(m, -2.0) == 0.0 && generalized_inverse(m, 0.5) == 0.5, "generalized inverse");
  return c;
}

Check synth_suite() {
  Check c;
  for (const auto& e : link_catalog(1000)) {
    const auto d = sample_dataset(Mode::shuffled, 200, e.link, NoiseSpec::gaussian(), 0.1, 3);
    c.expect(std::is_sorted(d.x_ordered.begin(), d.x_ordered.end()), "covariates not sorted");
    c.expect(d.y.size() == 200 && d.noise.size() == 200, "dataset sizes");
    std::stringstream io;
    write_dataset_csv(io, d);
    const auto back = read_dataset_csv(io);
    c.expect(back.y == d.y && back.x == d.x_ordered, "dataset CSV round trip");
  }
  const auto dc = sample_dataset(Mode::deconv, 50, IdentityLink{}, NoiseSpec::gaussian(), 0.1, 3);
  c.expect(dc.x_ordered.empty(), "deconv dataset exposes covariates");
  return c;
}

Check deconv_suite() {
  Check c;
  const auto iso = isotonize_cdf({0.1, 0.05, 0.2, 1.3});
  c.expect(iso == std::vector<double>({0.1, 0.1, 0.2, 1.0}), "isotonize");
  c.expect(isotonize_cdf(iso) == iso, "isotonize not idempotent");
  const auto h = select_bandwidth(10000, 0.5, NoiseSpec::gaussian(), BandwidthRule{});
  c.expect(std::abs(h.h - 0.35277) < 1e-4, "bandwidth closed form");
  c.expect(select_bandwidth(10000, 0.0, NoiseSpec::gaussian(), BandwidthRule{}).h == 0.01, "root-n bandwidth");
  const auto d = sample_dataset(Mode::deconv, 500, IdentityLink{}, NoiseSpec::gaussian(), 0.05, 5);
  const auto est = deconvolve_cdf(EmpiricalMeasure(d.y), NoiseSpec::gaussian(), 0.05, 0.05,
                                  GridSpec::covering(d.y, 0.05, 1 << 12));
  const auto v = est.values();
  c.expect(std::is_sorted(v.begin(), v.end()) && v.front() >= 0.0 && v.back() <= 1.0, "deconvolved CDF invalid");
  const auto truth = link_signal_cdf(IdentityLink{}, CovariateLaw::uniform());
  c.expect(w1_tabulated(est, truth) < 0.1, "deconvolution far from truth");
  return c;
}

Check regress_suite() {
  Check c;
  for (const auto& e : link_catalog(1000)) {
    const auto d = sample_dataset(Mode::shuffled, 1000, e.link, NoiseSpec::gaussian(), 0.0, 9);
    const auto fit = fit_shuffled(d.x_ordered, d.y, 0.0, FitConfig{e.M, e.a});
    c.expect(risk_empirical(fit.fn, e.link, d.x_ordered) < 1e-12, "noiseless recovery for " + e.name);
    c.expect(empirical_moment(fit.knot_values, e.a + 2.0) <= e.M * (1.0 + 1e-12), "moment bound for " + e.name);
  }
  const auto p = project_moment(std::vector<double>(5, 10.0), 1.0, 2.0);
  c.expect(p.activated && std::abs(p.values[0] - 1.0) < 1e-9, "winsorization closed form");
  return c;
}

Check experiments_suite() {
  Check c;
  const std::vector<std::uint32_t> ones(100, 1);
  c.expect(std::abs(conjecture_product(ones, 100, 1.0, 20.0) - 1.0) < 1e-12, "all-ones occupancy product");
  c.expect(conjecture_product(std::vector<std::uint32_t>{1}, 1, 1.0, 20.0) == 0.0, "n = 1 product");
  const auto grid = log_spaced_grid(100, 1'000'000, 30);
  c.expect(grid.size() == 30 && grid.front() == 100 && grid.back() == 1'000'000, "log grid endpoints");
  CounterRng rng(StreamKey::derive(3, "selftest-multinomial"));
  std::vector<std::uint32_t> counts;
  sample_uniform_multinomial(1000, rng, counts);
  std::uint64_t total = 0;
  for (auto k : counts) total += k;
  c.expect(total == 1000, "multinomial counts do not sum to n");
  const std::vector<std::pair<double, double>> pts{{100, 0.1}, {10000, 0.01}};
  c.expect(std::abs(fit_loglog_slope(pts).slope + 0.5) < 1e-12, "log-log slope");
  const MonotoneStepFn zero({1.0}, {0.0});
  c.expect(std::abs(risk_population(zero, IdentityLink{}, CovariateLaw::uniform()) - 0.5) < 1e-9, "population risk");
  return c;
}

}  // namespace

bool run_selftest(std::ostream& out) {
  const std::vector<std::pair<std::string, std::function<Check()>>> suites{
      {"dist1d", dist1d_suite},   {"synth", synth_suite},           {"deconv", deconv_suite},
      {"regress", regress_suite}, {"experiments", experiments_suite},
  };
  bool all = true;
  for (const auto& [name, suite] : suites) {
    Check result;
    try {
      result = suite();
    } catch (const std::exception& e) {
      result.ok = false;
      result.first_failure = std::string("exception: ") + e.what();
    }
    out << (result.ok ? "PASS " : "FAIL ") << name;
    if (!result.ok) out << ": " << result.first_failure;
    out << '\n';
    all = all && result.ok;
  }
  return all;
}

}  // namespace shufreg::cli
