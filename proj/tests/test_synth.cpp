#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "shufreg/dist1d.hpp"
#include "shufreg/experiments.hpp"
#include "shufreg/stats.hpp"
#include "shufreg/synth.hpp"

using namespace shufreg;

TEST_SUITE("synth") {
  TEST_CASE("noise characteristic function") {
    const auto g = NoiseSpec::gaussian();
    CHECK(noise_charfn(g, 0.0) == 1.0);
    CHECK(noise_charfn(g, 1.0) == doctest::Approx(0.60653).epsilon(1e-5));
    for (double t = -30.0; t <= 30.0; t += 0.37) CHECK(noise_charfn(g, t) >= 0.0);
    CHECK(g.beta == 2.0);
    CHECK(g.gamma2 == 2.0);
    // The reciprocal stays under its envelope.
    for (double t = 0.0; t <= 8.0; t += 0.25) CHECK(1.0 / noise_charfn(g, t) <= noise_reciprocal_envelope(g, t));
  }

  TEST_CASE("noise draws are standardized") {
    CounterRng rng(StreamKey::derive(1, "noise-moments"));
    std::vector<double> d(200000);
    for (auto& v : d) v = sample_noise(NoiseSpec::gaussian(), rng);
    const auto m = stats::mean_stderr(d);
    CHECK(std::abs(m.mean) < 5.0 * m.stderr_);
    std::vector<double> sq(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) sq[i] = d[i] * d[i];
    const auto v = stats::mean_stderr(sq);
    CHECK(std::abs(v.mean - 1.0) < 5.0 * v.stderr_);
  }

  TEST_CASE("link evaluation") {
    CHECK(eval_link(IdentityLink{}, 0.3) == 0.3);
    CHECK(eval_link(AffineLink{2.0, -1.0}, 0.75) == 0.5);
    CHECK(eval_link(CubeLink{}, 0.5) == doctest::Approx(0.125));
    CHECK_THROWS(eval_link(IdentityLink{}, 1.5));
    CHECK_THROWS(eval_link(IdentityLink{}, -0.1));

    const StepLink step{{-1.0, 0.0, 0.5, 2.0}};
    CHECK(eval_link(step, 0.0) == -1.0);
    CHECK(eval_link(step, 0.25) == -1.0);
    CHECK(eval_link(step, 0.2500001) == 0.0);
    CHECK(eval_link(step, 1.0) == 2.0);

    const UnboundedTailLink u{0.1, 1.0, 0.5, 1000};
    CHECK(eval_link(u, 0.5 / 1000 + 1e-9) == 0.0);
    CHECK(eval_link(u, 0.9) == 0.0);
    const double x = 0.5 / 2000.0;
    const double direct = -std::pow(x * std::pow(std::log(1.0 / x), 1.1), -1.0 / 3.0);
    CHECK(eval_link(u, x) == doctest::Approx(direct).epsilon(1e-14));
  }

  TEST_CASE("catalog links are nondecreasing and satisfy the moment bound") {
    for (const auto& e : link_catalog(100000)) {
      double prev = -INFINITY;
      for (int i = 1; i <= 10000; ++i) {
        const double v = eval_link(e.link, i / 10000.0);
        CHECK(v >= prev);
        prev = v;
      }
      const auto d = sample_dataset(Mode::shuffled, 100000, e.link, NoiseSpec::gaussian(), 0.0, 17);
      const auto pf = pushforward([&](double t) { return eval_link(e.link, t); }, EmpiricalMeasure(d.x_ordered));
      CHECK_MESSAGE(empirical_moment(pf, e.a + 2.0) <= e.M, e.name);
    }
  }

  TEST_CASE("link text round trip") {
    for (const auto& e : link_catalog(500)) {
      const auto text = link_to_string(e.link);
      CHECK(link_to_string(parse_link(text)) == text);
    }
    CHECK_THROWS(parse_link("wiggle"));
    CHECK_THROWS(parse_link("step:2,1"));
  }

  TEST_CASE("link generalized inverse") {
    CHECK(link_generalized_inverse(IdentityLink{}, 0.4) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(link_generalized_inverse(IdentityLink{}, -1.0) == 0.0);
    CHECK(link_generalized_inverse(StepLink{{0.0, 1.0}}, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("covariate laws") {
    const auto lin = CovariateLaw::linear(1.5);
    for (double u = 0.01; u < 1.0; u += 0.07) CHECK(lin.cdf(lin.inverse_cdf(u)) == doctest::Approx(u).epsilon(1e-12));
    CHECK(lin.density_lower() == doctest::Approx(0.25));
    CHECK_THROWS(CovariateLaw::linear(2.0));
    const auto signal = link_signal_cdf(IdentityLink{}, CovariateLaw::uniform());
    CHECK(signal.cdf(0.3) == doctest::Approx(0.3).epsilon(1e-3));
  }

  TEST_CASE("noiseless shuffled data recovers the link on the order statistics") {
    for (const auto& e : link_catalog(1000)) {
      const auto d = sample_dataset(Mode::shuffled, 1000, e.link, NoiseSpec::gaussian(), 0.0, 5);
      auto y = d.y;
      std::sort(y.begin(), y.end());
      for (std::size_t i = 0; i < y.size(); ++i) REQUIRE(y[i] == eval_link(e.link, d.x_ordered[i]));
    }
  }

  TEST_CASE("datasets are deterministic and use separate streams") {
    const auto a = sample_dataset(Mode::unlinked, 300, CubeLink{}, NoiseSpec::gaussian(), 0.2, 99);
    const auto b = sample_dataset(Mode::unlinked, 300, CubeLink{}, NoiseSpec::gaussian(), 0.2, 99);
    CHECK(a.y == b.y);
    CHECK(a.x_ordered == b.x_ordered);
    CHECK(std::is_sorted(a.x_ordered.begin(), a.x_ordered.end()));

    const StreamUsage* cov = nullptr;
    const StreamUsage* resp = nullptr;
    for (const auto& s : a.streams) {
      if (s.purpose == "covariates") cov = &s;
      if (s.purpose == "response_covariates") resp = &s;
    }
    REQUIRE(cov != nullptr);
    REQUIRE(resp != nullptr);
    CHECK_FALSE(cov->key == resp->key);
    CHECK(cov->draws == 300);
    CHECK(resp->draws == 300);

    const auto c = sample_dataset(Mode::unlinked, 300, CubeLink{}, NoiseSpec::gaussian(), 0.2, 100);
    CHECK(a.y != c.y);
    CHECK_THROWS(sample_dataset(Mode::shuffled, 0, IdentityLink{}, NoiseSpec::gaussian(), 0.1, 1));
    CHECK_THROWS(sample_dataset(Mode::shuffled, 5, IdentityLink{}, NoiseSpec::gaussian(), -0.1, 1));
  }

  TEST_CASE("shuffled responses are permuted away from the covariate order") {
    const auto d = sample_dataset(Mode::shuffled, 2000, IdentityLink{}, NoiseSpec::gaussian(), 0.0, 3);
    // Noiseless identity: y is a permutation of x; a uniform permutation has
    // rank correlation near zero.
    std::vector<double> y = d.y;
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (static_cast<double>(i) - 999.5) * (y[i] - 0.5);
    CHECK(std::abs(s / (2000.0 * 577.0 * 0.2887)) < 0.1);
  }

  TEST_CASE("dataset CSV round trip") {
    for (Mode mode : {Mode::shuffled, Mode::unlinked, Mode::deconv}) {
      const auto d = sample_dataset(mode, 50, IdentityLink{}, NoiseSpec::gaussian(), 0.3, 8);
      std::stringstream io;
      write_dataset_csv(io, d);
      const auto back = read_dataset_csv(io);
      CHECK(back.mode == mode);
      CHECK(back.y == d.y);
      CHECK(back.x == d.x_ordered);
    }
  }

  TEST_CASE("uniform order statistics") {
    constexpr int n = 10000;
    constexpr int reps = 10000;
    CounterRng rng(StreamKey::derive(12, "order-stats"));
    std::vector<double> first(reps);
    std::vector<double> first_sq(reps);
    for (int r = 0; r < reps; ++r) {
      double mn = 1.0;
      for (int i = 0; i < n; ++i) mn = std::min(mn, CovariateLaw::uniform().inverse_cdf(rng.uniform()));
      first[r] = n * mn;
      first_sq[r] = first[r] * first[r];
    }
    const auto m1 = stats::mean_stderr(first);
    const auto m2 = stats::mean_stderr(first_sq);
    CHECK(std::abs(m1.mean - 1.0) < 5.0 * m1.stderr_);
    CHECK(std::abs(m2.mean - 2.0) < 5.0 * m2.stderr_);
  }

  TEST_CASE("normalized spacings match Exp(1)") {
    CounterRng rng(StreamKey::derive(13, "spacings"));
    std::vector<double> s;
    for (int r = 0; r < 2000; ++r) {
      const auto g = normalized_uniform_spacings(1000, rng);
      s.insert(s.end(), g.begin(), g.end());
    }
    CounterRng erng(StreamKey::derive(13, "exp"));
    std::vector<double> e(s.size());
    for (auto& v : e) v = erng.exponential();
    CHECK(stats::ks_two_sample(s, e).p_value > 1e-3);
  }
}
