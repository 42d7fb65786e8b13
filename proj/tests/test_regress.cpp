#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "shufreg/deconv.hpp"
#include "shufreg/experiments.hpp"
#include "shufreg/regress.hpp"
#include "shufreg/synth.hpp"

using namespace shufreg;

namespace {

const NoiseSpec kGauss = NoiseSpec::gaussian();

FitConfig loose() { return FitConfig{1e6, 1.0, 1.0}; }

// Random nondecreasing candidate values.
std::vector<double> random_monotone(CounterRng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * rng.uniform();
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_SUITE("regress") {
  TEST_CASE("project_moment") {
    const std::vector<double> inside{-0.5, 0.0, 0.5};
    const auto same = project_moment(inside, 1.0, 2.0);
    CHECK_FALSE(same.activated);
    CHECK(same.values == inside);

    const auto tens = project_moment(std::vector<double>(4, 10.0), 1.0, 2.0);
    CHECK(tens.activated);
    CHECK(tens.threshold == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : tens.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> zeros(5, 0.0);
    CHECK(project_moment(zeros, 1.0, 3.0).values == zeros);
    const auto flat = project_moment(std::vector<double>{-2.0, 1.0, 3.0}, 0.0, 3.0);
    for (double v : flat.values) CHECK(v == 0.0);

    CounterRng rng(StreamKey::derive(31, "projection"));
    for (int rep = 0; rep < 100; ++rep) {
      auto v = random_monotone(rng, 1 + rng.below(200), -20.0, 30.0);
      const double p = 1.0 + 3.0 * rng.uniform();
      const double bound = 0.5 + 10.0 * rng.uniform();
      const auto proj = project_moment(v, bound, p);
      CHECK(std::is_sorted(proj.values.begin(), proj.values.end()));
      if (proj.activated) {
        CHECK(oracle::clipped_moment(v, proj.threshold, p) == doctest::Approx(bound).epsilon(1e-12));
        CHECK(empirical_moment(proj.values, p) <= bound * (1.0 + 1e-12));
      } else {
        CHECK(empirical_moment(v, p) <= bound);
      }
    }
  }

  TEST_CASE("extend_piecewise") {
    const std::vector<double> x{0.2, 0.5, 0.8};
    const std::vector<double> v{1.0, 2.0, 3.0};
    const auto m = extend_piecewise(x, v);
    CHECK(m(0.0) == 1.0);
    CHECK(m(0.2) == 1.0);
    CHECK(m(0.3) == 2.0);
    CHECK(m(0.5) == 2.0);
    CHECK(m(0.7) == 3.0);
    CHECK(m(0.95) == 3.0);
    CHECK_THROWS(extend_piecewise(std::vector<double>{0.2, 0.2}, std::vector<double>{1.0, 2.0}));
    CHECK_THROWS(extend_piecewise(std::vector<double>{0.2}, std::vector<double>{1.0, 2.0}));
  }

  TEST_CASE("shuffled fit recovers noiseless links exactly") {
    for (std::size_t n : {1u, 7u, 100u, 10000u}) {
      for (const auto& e : link_catalog(n)) {
        const auto d = sample_dataset(Mode::shuffled, n, e.link, kGauss, 0.0, 40 + n);
        const auto fit = fit_shuffled(d.x_ordered, d.y, 0.0, FitConfig{e.M, e.a});
        // A small sample can exceed the population moment bound; then the
        // projection legitimately moves the fit.
        if (empirical_moment(d.y, e.a + 2.0) > e.M) {
          CHECK(fit.projection_activated);
          continue;
        }
        for (std::size_t i = 0; i < n; ++i) REQUIRE(fit.fn(d.x_ordered[i]) == eval_link(e.link, d.x_ordered[i]));
        CHECK(risk_empirical(fit.fn, e.link, d.x_ordered) == 0.0);
      }
    }
  }

  TEST_CASE("sorted assignment is the brute-force optimum") {
    CounterRng rng(StreamKey::derive(32, "assign"));
    for (int rep = 0; rep < 40; ++rep) {
      const std::size_t n = 1 + rep % 6;
      const auto d = sample_dataset(Mode::shuffled, n, CubeLink{}, kGauss, 0.3, 500 + rep);
      const auto fit = fit_shuffled(d.x_ordered, d.y, 0.3, loose());
      const double achieved = fit.contrast * fit.contrast;
      CHECK(achieved == doctest::Approx(0.0));  // exact rearrangement without projection
      // Cost of assigning the fitted knot values to the responses.
      CHECK(oracle::brute_force_assignment(fit.knot_values, d.y, 2.0) == doctest::Approx(0.0));
      // Any candidate's best assignment costs at least as much as its sorted one.
      const auto cand = random_monotone(rng, n, -1.0, 1.0);
      double sorted_cost = 0.0;
      auto ys = d.y;
      std::sort(ys.begin(), ys.end());
      for (std::size_t i = 0; i < n; ++i) sorted_cost += (cand[i] - ys[i]) * (cand[i] - ys[i]);
      CHECK(sorted_cost / n == doctest::Approx(oracle::brute_force_assignment(cand, d.y, 2.0)));
    }
  }

  TEST_CASE("shuffled contrast is near-minimal over random candidates") {
    CounterRng rng(StreamKey::derive(33, "candidates"));
    const double sigma = 0.1;
    const auto d = sample_dataset(Mode::shuffled, 200, IdentityLink{}, kGauss, sigma, 77);
    const auto fit = fit_shuffled(d.x_ordered, d.y, sigma, FitConfig{1.0, 1.0});
    const EmpiricalMeasure mu_y(d.y);
    double best = 1e300;
    for (int k = 0; k < 1000; ++k) {
      auto cand = random_monotone(rng, 200, -0.5, 1.5);
      if (empirical_moment(cand, 3.0) > 1.0) cand = project_moment(cand, 1.0, 3.0).values;
      best = std::min(best, w2_empirical(mu_y, EmpiricalMeasure(cand)));
    }
    CHECK(fit.contrast <= best + sigma * sigma);
    CHECK(fit.eta == doctest::Approx(sigma * sigma));
  }

  TEST_CASE("shuffled fit is invariant under permutations of y") {
    const auto d = sample_dataset(Mode::shuffled, 300, CubeLink{}, kGauss, 0.2, 5);
    const auto a = fit_shuffled(d.x_ordered, d.y, 0.2, FitConfig{1.0, 1.0});
    auto y = d.y;
    std::reverse(y.begin(), y.end());
    std::rotate(y.begin(), y.begin() + 17, y.end());
    const auto b = fit_shuffled(d.x_ordered, y, 0.2, FitConfig{1.0, 1.0});
    CHECK(a.knot_values == b.knot_values);
  }

  TEST_CASE("empirical oracle inequality") {
    for (int inst = 0; inst < 40; ++inst) {
      const double sigma = 0.02 * (1 + inst % 10);
      const auto d = sample_dataset(Mode::shuffled, 500, AffineLink{2.0, -1.0}, kGauss, sigma, 600 + inst);
      const auto fit = fit_shuffled(d.x_ordered, d.y, sigma, FitConfig{1.0, 1.0});
      double lhs = 0.0;
      double d2 = 0.0;
      for (std::size_t i = 0; i < 500; ++i) {
        const double e = fit.fn(d.x_ordered[i]) - eval_link(AffineLink{2.0, -1.0}, d.x_ordered[i]);
        lhs += e * e / 500.0;
        d2 += d.noise[i] * d.noise[i];
      }
      CHECK(lhs <= 4.0 * sigma * sigma * d2 / 500.0 + 2.0 * sigma * sigma);
    }
  }

  TEST_CASE("fits belong to the moment-constrained class") {
    for (const auto& e : link_catalog(300)) {
      for (Mode mode : {Mode::shuffled, Mode::unlinked}) {
        const auto d = sample_dataset(mode, 300, e.link, kGauss, 0.05, 9);
        FitConfig cfg{e.M, e.a, 1.0, mode == Mode::shuffled ? EtaMode::shuffled : EtaMode::unlinked};
        const auto fit = mode == Mode::shuffled ? fit_shuffled(d.x_ordered, d.y, 0.05, cfg)
                                                : fit_unlinked(d.x_ordered, d.y, kGauss, 0.05, cfg);
        const auto v = fit.fn.values();
        CHECK(std::is_sorted(v.begin(), v.end()));
        CHECK(empirical_moment(fit.knot_values, e.a + 2.0) <= cfg.moment_bound() * (1.0 + 1e-12));
      }
    }
  }

  TEST_CASE("unlinked fit takes quantiles of the smoothed responses") {
    const std::size_t n = 400;
    const auto d = sample_dataset(Mode::unlinked, n, IdentityLink{}, kGauss, 0.0, 12);
    const auto fit = fit_unlinked(d.x_ordered, d.y, kGauss, 0.0, FitConfig{1.0, 1.0, 1.0, EtaMode::unlinked});
    REQUIRE(fit.bandwidth.has_value());
    REQUIRE(fit.signal.has_value());
    CHECK_FALSE(fit.projection_activated);
    const auto& sig = *fit.signal;
    const auto f = oracle::smoothed_density(d.y, fit.bandwidth->h, sig.lo(), sig.hi(), sig.size());
    const TabulatedDistribution direct(sig.lo(), sig.hi(), oracle::cdf_from_density(f, sig.step()));
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (2.0 * i + 1.0) / (2.0 * n);
      CHECK(std::abs(fit.knot_values[i] - quantile(direct, u)) <= 2.0 * sig.step());
    }
    CHECK(fit.eta == doctest::Approx(1.0 / std::sqrt(double(n))));
  }

  TEST_CASE("unlinked contrast is near-minimal over random candidates") {
    CounterRng rng(StreamKey::derive(34, "unlinked-candidates"));
    const std::size_t n = 200;
    const auto d = sample_dataset(Mode::unlinked, n, IdentityLink{}, kGauss, 0.01, 13);
    const auto fit = fit_unlinked(d.x_ordered, d.y, kGauss, 0.01, FitConfig{1.0, 1.0, 1.0, EtaMode::unlinked});
    double best = 1e300;
    for (int k = 0; k < 1000; ++k) {
      const auto cand = random_monotone(rng, n, -0.2, 1.2);
      best = std::min(best, w1_mixed(*fit.signal, EmpiricalMeasure(cand)));
    }
    CHECK(fit.contrast <= best + 1.0 / std::sqrt(double(n)));
  }

  TEST_CASE("unlinked identity at root-n noise") {
    const std::size_t n = 10000;
    const auto d = sample_dataset(Mode::unlinked, n, IdentityLink{}, kGauss, 0.0, 2024);
    const auto fit = fit_unlinked(d.x_ordered, d.y, kGauss, 0.0, FitConfig{1.0, 1.0, 1.0, EtaMode::unlinked});
    CHECK(risk_empirical(fit.fn, IdentityLink{}, d.x_ordered) <= 0.05);
  }

  TEST_CASE("fit CSV carries metadata") {
    const auto d = sample_dataset(Mode::shuffled, 10, IdentityLink{}, kGauss, 0.1, 3);
    const auto fit = fit_shuffled(d.x_ordered, d.y, 0.1, FitConfig{1.0, 1.0});
    std::stringstream io;
    write_fit_csv(io, fit);
    const auto text = io.str();
    CHECK(text.find("# n=10\n") == 0);
    CHECK(text.find("# projection_activated=false\n") != std::string::npos);
    const auto table = csv::read(io);
    CHECK(table.header == std::vector<std::string>{"knot", "value"});
    CHECK(table.rows.size() == 10);
  }

  TEST_CASE("input validation") {
    const std::vector<double> x{0.1, 0.2};
    const std::vector<double> y{1.0};
    CHECK_THROWS(fit_shuffled(x, y, 0.1, FitConfig{}));
    CHECK_THROWS(fit_shuffled(std::vector<double>{0.3, 0.2}, std::vector<double>{1.0, 2.0}, 0.1, FitConfig{}));
    CHECK_THROWS(fit_shuffled(x, std::vector<double>{1.0, 2.0}, 0.1, FitConfig{0.0, 1.0}));
    CHECK_THROWS(fit_unlinked(std::vector<double>{0.1, 1.5}, std::vector<double>{1.0, 2.0}, kGauss, 0.1, FitConfig{}));
  }
}
