#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "shufreg/csv.hpp"
#include "shufreg/parallel.hpp"
#include "shufreg/rng.hpp"
#include "shufreg/stats.hpp"

using namespace shufreg;

TEST_SUITE("support") {
  TEST_CASE("double formatting") {
    CHECK(csv::format_double(0.1) == "0.10000000000000001");
    CHECK(csv::format_double(1.0) == "1");
    CHECK(csv::format_double(-2.5e-300) == "-2.5e-300");
    CHECK(csv::format_double(1.0 / 3.0) == "0.33333333333333331");
    CounterRng rng(StreamKey::derive(51, "format"));
    for (int k = 0; k < 10000; ++k) {
      std::uint64_t bits = rng();
      double v = 0.0;
      std::memcpy(&v, &bits, sizeof v);
      if (!std::isfinite(v)) continue;
      const double back = csv::parse_double(csv::format_double(v));
      CHECK(std::memcmp(&back, &v, sizeof v) == 0);
    }
    CHECK_THROWS(csv::parse_double(""));
    CHECK_THROWS(csv::parse_double("1.5x"));
  }

  TEST_CASE("table round trip with quoting") {
    csv::Table t{{"name", "value"}, {{"plain", "1"}, {"a,b", "say \"hi\""}, {"line\nbreak", ""}}};
    std::stringstream io;
    csv::write(io, t);
    CHECK(io.str().find("\"a,b\",\"say \"\"hi\"\"\"\n") != std::string::npos);
    const auto back = csv::read(io);
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
    CHECK(back.column("value") == 1);
    CHECK_THROWS((void)back.column("missing"));
  }

  TEST_CASE("header-only, metadata and ragged input") {
    std::stringstream only("a,b\n");
    const auto t = csv::read(only);
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    CHECK(t.rows.empty());
    std::stringstream meta("# k=v\n# x=1\na\n1\n");
    CHECK(csv::read(meta).rows.size() == 1);
    std::stringstream ragged("a,b\n1\n");
    CHECK_THROWS(csv::read(ragged));
  }

  TEST_CASE("file errors name the path") {
    const csv::Table t{{"a"}, {{"1"}}};
    try {
      csv::write_file("/proc/definitely/not/writable.csv", t);
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("/proc/definitely/not/writable.csv") != std::string::npos);
    }
    CHECK_THROWS(csv::read_file("/nonexistent/input.csv"));
    const auto dir = std::filesystem::temp_directory_path() / "shufreg-csv-test" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    csv::write_file(dir / "t.csv", t);
    CHECK(csv::read_file(dir / "t.csv").rows == t.rows);
    std::filesystem::remove_all(dir.parent_path());
  }

  TEST_CASE("summary statistics") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto m = stats::mean_stderr(v);
    CHECK(m.mean == 2.5);
    CHECK(m.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(stats::median(v) == 2.5);
    CHECK(stats::median(std::vector<double>{3.0, 1.0, 2.0}) == 2.0);
    CHECK_THROWS(stats::mean_stderr(std::vector<double>{}));
    CHECK(stats::normal_cdf(0.0) == 0.5);
    CHECK(stats::normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(stats::kolmogorov_survival(1.3580986393225505) == doctest::Approx(0.05).epsilon(1e-6));
    const auto same = stats::ks_two_sample(v, v);
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == doctest::Approx(1.0));
  }

  TEST_CASE("counter streams") {
    const auto a = StreamKey::derive(1, "x");
    CHECK(a.value == StreamKey::derive(1, "x").value);
    CHECK(a.value != StreamKey::derive(1, "y").value);
    CHECK(a.value != StreamKey::derive(2, "x").value);
    CHECK(a.child(0).value != a.child(1).value);
    CounterRng r1(a), r2(a);
    for (int k = 0; k < 100; ++k) CHECK(r1() == r2());
    CounterRng r(a);
    for (int k = 0; k < 100000; ++k) {
      const auto b = r.below(7);
      REQUIRE(b < 7);
      const double u = r.uniform();
      REQUIRE(u > 0.0);
      REQUIRE(u < 1.0);
    }
  }

  TEST_CASE("parallel_for") {
    for (unsigned workers : {1u, 2u, 8u}) {
      std::vector<std::size_t> slots(1000, 0);
      std::atomic<bool> bad_worker{false};
      parallel_for(slots.size(), workers, [&](std::size_t i, unsigned w) {
        if (w >= std::max(workers, 1u)) bad_worker = true;
        slots[i] = i * i;
      });
      CHECK_FALSE(bad_worker);
      for (std::size_t i = 0; i < slots.size(); ++i) CHECK(slots[i] == i * i);
    }
    CHECK_THROWS_AS(parallel_for(100, 4,
                                 [](std::size_t i, unsigned) {
                                   if (i == 37) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
    std::atomic<int> calls{0};
    parallel_for(0, 4, [&](std::size_t, unsigned) { ++calls; });
    CHECK(calls == 0);
  }
}
