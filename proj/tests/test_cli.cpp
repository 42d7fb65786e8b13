#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "shufreg/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::initializer_list<std::string> args) {
  const std::vector<std::string> v(args);
  std::ostringstream out, err;
  const int code = shufreg::cli::run(v, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("shufreg-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 2") {
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"--bogus"}).code == 2);
    const auto bad = invoke({"conjecture", "--bogus"});
    CHECK(bad.code == 2);
    CHECK_FALSE(bad.err.empty());
    CHECK(invoke({"conjecture", "--reps", "abc"}).code == 2);
    CHECK(invoke({"estimate", "--sigma", "0.1"}).code == 2);
    CHECK(invoke({"rates", "--sigma-rule", "preset:nowhere"}).code == 2);
    CHECK(invoke({"--help"}).code == 0);
    CHECK(invoke({"conjecture", "--help"}).code == 0);
  }

  TEST_CASE("runtime failures exit with 1") {
    const auto dir = scratch("missing");
    CHECK(invoke({"estimate", "--input", (dir / "nope.csv").string(), "--sigma", "0.1"}).code == 1);
  }

  TEST_CASE("conjecture output is deterministic") {
    const auto dir = scratch("conj");
    const std::vector<std::string> common{"--n-min", "10", "--n-max", "300", "--grid-points", "4", "--reps", "10",
                                          "--C",     "1,2"};
    auto run_into = [&](const fs::path& out, const std::string& workers) {
      std::vector<std::string> args{"conjecture"};
      args.insert(args.end(), common.begin(), common.end());
      args.insert(args.end(), {"--out", out.string(), "--workers", workers});
      std::ostringstream o, e;
      return shufreg::cli::run(args, o, e);
    };
    REQUIRE(run_into(dir / "a", "1") == 0);
    REQUIRE(run_into(dir / "b", "3") == 0);
    const auto csv_a = slurp(dir / "a" / "conjecture.csv");
    CHECK(csv_a.rfind("n,C,mean,stderr\n", 0) == 0);
    CHECK(csv_a == slurp(dir / "b" / "conjecture.csv"));
    std::size_t lines = 0;
    for (char ch : csv_a) lines += ch == '\n';
    CHECK(lines == 1 + 4 * 2);
    for (const char* svg : {"conjecture_C1.svg", "conjecture_C2.svg"}) {
      REQUIRE(fs::exists(dir / "a" / svg));
      CHECK(slurp(dir / "a" / svg) == slurp(dir / "b" / svg));
    }
    fs::remove_all(dir);
  }

  TEST_CASE("config file values are overridden by flags") {
    const auto dir = scratch("config");
    {
      std::ofstream cfg(dir / "run.ini");
      cfg << "[conjecture]\nreps = 3\nn-min = 10\nn-max = 20\ngrid-points = 2\nC = 1\nno-plots = true\n";
    }
    REQUIRE(invoke({"--config", (dir / "run.ini").string(), "conjecture", "--out", (dir / "one").string()}).code == 0);
    REQUIRE(invoke({"--config", (dir / "run.ini").string(), "conjecture", "--reps", "1", "--out",
                    (dir / "two").string()})
                .code == 0);
    const auto one = shufreg::csv::read_file(dir / "one" / "conjecture.csv");
    const auto two = shufreg::csv::read_file(dir / "two" / "conjecture.csv");
    REQUIRE(one.rows.size() == 2);
    CHECK_FALSE(fs::exists(dir / "one" / "conjecture_C1.svg"));
    // One replication has zero standard error; three do not, in general.
    CHECK(two.rows[0][3] == "0");
    CHECK(one.rows[0][2] != two.rows[0][2]);
    fs::remove_all(dir);
  }

  TEST_CASE("simulate, estimate and rates") {
    const auto dir = scratch("pipeline");
    const auto data = (dir / "data.csv").string();
    REQUIRE(invoke({"simulate", "--mode", "unlinked", "--n", "200", "--sigma", "0.05", "--out", data}).code == 0);
    const auto fit = (dir / "fit.csv").string();
    REQUIRE(invoke({"estimate", "--input", data, "--sigma", "0.05", "--out", fit}).code == 0);
    CHECK(slurp(fit).rfind("# n=200\n", 0) == 0);
    REQUIRE(invoke({"rates", "--problem", "shuffled", "--n", "50,100", "--reps", "2", "--sigma-rule",
                    "constant:0.1", "--out", (dir / "r").string()})
                .code == 0);
    const auto risks = shufreg::csv::read_file(dir / "r" / "risks.csv");
    CHECK(risks.header == std::vector<std::string>{"problem", "n", "sigma", "seed", "risk_kind", "value"});
    CHECK(risks.rows.size() == 2 * 2 * 2);
    fs::remove_all(dir);
  }

  TEST_CASE("plots") {
    const std::vector<shufreg::ConjectureRow> one{{100, 1.0, 0.5, 0.0}};
    const auto svg = shufreg::cli::plot_svg(one, "single");
    CHECK(svg.find("<circle") != std::string::npos);
    CHECK(svg.find("nan") == std::string::npos);
    CHECK(svg == shufreg::cli::plot_svg(one, "single"));
    CHECK_THROWS(shufreg::cli::plot_svg(std::vector<shufreg::ConjectureRow>{}, "empty"));
  }

  TEST_CASE("selftest") {
    const auto r = invoke({"selftest"});
    CHECK(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
  }
}
