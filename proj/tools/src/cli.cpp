#include "shufreg/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "shufreg/deconv.hpp"
#include "shufreg/parallel.hpp"
#include "shufreg/regress.hpp"
#include "shufreg/synth.hpp"

namespace shufreg::cli {

void write_records(const std::filesystem::path& path, const csv::Table& records) { csv::write_file(path, records); }

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Converts an option value, turning parse failures into usage errors.
template <class F>
auto parse_option(const char* name, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--") + name + ": " + e.what());
  }
}

CovariateLaw covariate_law(double slope) {
  return parse_option("covariate-slope",
                      [&] { return slope == 0.0 ? CovariateLaw::uniform() : CovariateLaw::linear(slope); });
}

struct CommonOptions {
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 0;
  std::string out;
};

struct ConjectureOptions {
  ConjectureConfig cfg;
  bool plots = true;
};

struct RatesOptions {
  std::string problem = "shuffled";
  std::vector<std::uint64_t> n_grid{100, 316, 1000, 3162, 10000};
  std::string sigma_rule = "preset:below-root";
  std::size_t reps = 30;
  std::string link = "identity";
  double M = 1.0;
  double a = 1.0;
  double c_x = 1.0;
  double c_const = 0.1;
  double eta = 0.2;
  double covariate_slope = 0.0;
  std::size_t grid_points = std::size_t{1} << 14;
};

struct EstimateOptions {
  std::string input;
  double sigma = 0.0;
  double M = 1.0;
  double a = 1.0;
  double c_x = 1.0;
  double c_const = 0.1;
  double eta = 0.2;
  std::size_t grid_points = std::size_t{1} << 14;
  std::string signal_out;
};

struct SimulateOptions {
  std::string mode = "shuffled";
  std::size_t n = 1000;
  std::string link = "identity";
  double sigma = 0.1;
  double covariate_slope = 0.0;
};

void add_common(CLI::App* sub, CommonOptions& common, const std::string& out_help, const std::string& out_default) {
  common.out = out_default;
  sub->add_option("--seed", common.seed, "Random seed")->capture_default_str();
  sub->add_option("--out", common.out, out_help)->capture_default_str();
}

void add_workers(CLI::App* sub, CommonOptions& common) {
  sub->add_option("--workers", common.workers, "Worker threads (default: SHUFREG_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);
}

unsigned workers_of(const CommonOptions& common) { return common.workers > 0 ? common.workers : default_workers(); }

void cmd_conjecture(const ConjectureOptions& opt, const CommonOptions& common, std::ostream& out) {
  ConjectureConfig cfg = opt.cfg;
  cfg.seed = common.seed;
  parse_option("conjecture", [&] { cfg.validate(); return 0; });
  const auto rows = conjecture_sweep(cfg, workers_of(common));
  const std::filesystem::path dir(common.out);
  const auto csv_path = dir / "conjecture.csv";
  write_records(csv_path, conjecture_table(rows));
  out << "wrote " << csv_path.string() << " (" << rows.size() << " rows)\n";
  if (opt.plots) {
    for (const auto& p : render_plots(rows, cfg.c, dir)) out << "wrote " << p.string() << '\n';
  }
}

FitConfig fit_config(double M, double a, double c_x, double c_const, double eta) {
  FitConfig cfg{M, a, c_x, EtaMode::shuffled, BandwidthRule{c_const, eta}};
  parse_option("fit parameters", [&] {
    cfg.validate();
    cfg.rule.validate();
    return 0;
  });
  return cfg;
}

void cmd_rates(const RatesOptions& opt, const CommonOptions& common, std::ostream& out) {
  RateSweepConfig cfg;
  cfg.problem = parse_option("problem", [&] { return parse_mode(opt.problem); });
  cfg.n_grid = opt.n_grid;
  cfg.sigma_rule = parse_option("sigma-rule", [&] { return SigmaRule::parse(opt.sigma_rule); });
  cfg.reps = opt.reps;
  cfg.seed = common.seed;
  cfg.link = parse_option("link", [&] {
    auto link = parse_link(opt.link);
    validate_link(link);
    return link;
  });
  cfg.fit = fit_config(opt.M, opt.a, opt.c_x, opt.c_const, opt.eta);
  cfg.law = covariate_law(opt.covariate_slope);
  cfg.grid_points = opt.grid_points;
  parse_option("sigma-rule", [&] {
    for (auto n : cfg.n_grid) (void)cfg.sigma_rule.sigma(n, cfg.fit.rule.eta, cfg.noise.beta);
    return 0;
  });

  const auto records = rate_sweep(cfg, workers_of(common));
  const auto path = std::filesystem::path(common.out) / "risks.csv";
  write_records(path, risk_table(records));
  out << "wrote " << path.string() << " (" << records.size() << " records)\n";
  if (cfg.n_grid.size() >= 2) {
    for (RiskKind kind : risk_kinds(cfg.problem)) {
      const auto means = mean_by_n(records, kind);
      bool positive = true;
      for (const auto& [n, m] : means) positive = positive && m > 0.0;
      if (!positive) continue;
      const auto fit = fit_loglog_slope(means);
      out << to_string(kind) << ": log-log slope " << csv::format_double(fit.slope) << ", r^2 "
          << csv::format_double(fit.r_squared) << '\n';
    }
  }
}

void cmd_estimate(const EstimateOptions& opt, const CommonOptions& common, std::ostream& out) {
  std::ifstream in(opt.input);
  if (!in) throw std::runtime_error("cannot open " + opt.input);
  const auto obs = read_dataset_csv(in);
  if (!(opt.sigma >= 0.0)) throw UsageError("--sigma must be >= 0");
  FitConfig cfg = fit_config(opt.M, opt.a, opt.c_x, opt.c_const, opt.eta);
  const auto noise = NoiseSpec::gaussian();
  const std::filesystem::path path(common.out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());

  auto write_cdf = [](const std::filesystem::path& p, const TabulatedDistribution& d) {
    csv::Table t{{"x", "cdf"}, {}};
    for (std::size_t i = 0; i < d.size(); ++i) {
      t.rows.push_back({csv::format_double(d.point(i)), csv::format_double(d.values()[i])});
    }
    write_records(p, t);
  };

  if (obs.mode == Mode::deconv) {
    const auto bw = select_bandwidth(obs.y.size(), opt.sigma, noise, cfg.rule);
    const auto grid = GridSpec::covering(obs.y, opt.sigma, opt.grid_points);
    const auto est = deconvolve_cdf(EmpiricalMeasure(obs.y), noise, opt.sigma, bw.h, grid);
    write_cdf(path, est);
    out << "n=" << obs.y.size() << " sigma=" << csv::format_double(opt.sigma) << " h=" << csv::format_double(bw.h)
        << (bw.fallback ? " (fallback)" : "") << '\n';
    out << "wrote " << path.string() << '\n';
    return;
  }

  FitResult fit = [&] {
    if (obs.mode == Mode::shuffled) {
      std::vector<double> xs = obs.x;
      std::sort(xs.begin(), xs.end());
      return fit_shuffled(xs, obs.y, opt.sigma, cfg);
    }
    cfg.eta_mode = EtaMode::unlinked;
    return fit_unlinked(obs.x, obs.y, noise, opt.sigma, cfg, GridSpec::covering(obs.y, opt.sigma, opt.grid_points));
  }();
  {
    std::ofstream f(path, std::ios::binary);
    write_fit_csv(f, fit);
    if (!f) throw std::runtime_error("cannot write " + path.string());
  }
  out << "mode=" << to_string(obs.mode) << " n=" << fit.n << " sigma=" << csv::format_double(fit.sigma)
      << " eta=" << csv::format_double(fit.eta) << " contrast=" << csv::format_double(fit.contrast)
      << " projection_activated=" << (fit.projection_activated ? "true" : "false") << '\n';
  out << "wrote " << path.string() << '\n';
  if (!opt.signal_out.empty() && fit.signal) {
    write_cdf(opt.signal_out, *fit.signal);
    out << "wrote " << opt.signal_out << '\n';
  }
}

void cmd_simulate(const SimulateOptions& opt, const CommonOptions& common, std::ostream& out) {
  const Mode mode = parse_option("mode", [&] { return parse_mode(opt.mode); });
  const LinkSpec link = parse_option("link", [&] {
    auto l = parse_link(opt.link);
    validate_link(l);
    return l;
  });
  if (!(opt.sigma >= 0.0)) throw UsageError("--sigma must be >= 0");
  if (opt.n < 1) throw UsageError("--n must be >= 1");
  const auto data =
      sample_dataset(mode, opt.n, link, NoiseSpec::gaussian(), opt.sigma, common.seed, covariate_law(opt.covariate_slope));
  const std::filesystem::path path(common.out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  write_dataset_csv(f, data);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  out << "wrote " << path.string() << " (" << data.y.size() << " observations)\n";
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shuffled and unlinked monotone regression, deconvolution and occupancy experiments"};
  app.name("shufreg");
  app.set_config("--config", "", "INI/TOML file; [section] per subcommand, flags override file values");
  app.require_subcommand(1, 1);

  ConjectureOptions conj;
  CommonOptions conj_common;
  auto* conj_cmd = app.add_subcommand("conjecture", "Monte-Carlo sweep of the multinomial occupancy product");
  add_common(conj_cmd, conj_common, "Output directory", "runs");
  add_workers(conj_cmd, conj_common);
  conj_cmd->add_option("--c", conj.cfg.c, "Exponent constant c")->capture_default_str();
  conj_cmd->add_option("--reps", conj.cfg.reps, "Monte-Carlo replications per n")->capture_default_str();
  conj_cmd->add_option("--n-min", conj.cfg.n_min, "Smallest n")->capture_default_str();
  conj_cmd->add_option("--n-max", conj.cfg.n_max, "Largest n")->capture_default_str();
  conj_cmd->add_option("--grid-points", conj.cfg.grid_points, "Log-spaced n values")->capture_default_str();
  conj_cmd->add_option("--C", conj.cfg.C_list, "Comma-separated C values")->delimiter(',')->capture_default_str();
  conj_cmd->add_flag("!--no-plots", conj.plots, "Skip SVG plots");

  RatesOptions rates;
  CommonOptions rates_common;
  auto* rates_cmd = app.add_subcommand("rates", "Risk sweep over n for one problem and noise rule");
  add_common(rates_cmd, rates_common, "Output directory", "runs");
  add_workers(rates_cmd, rates_common);
  rates_cmd->add_option("--problem", rates.problem, "shuffled, unlinked or deconv")->capture_default_str();
  rates_cmd->add_option("--n", rates.n_grid, "Comma-separated sample sizes")->delimiter(',')->capture_default_str();
  rates_cmd->add_option("--sigma-rule", rates.sigma_rule, "constant:<s>, power:<kappa> or preset:<row>")
      ->capture_default_str();
  rates_cmd->add_option("--reps", rates.reps, "Replications per n")->capture_default_str()->check(CLI::PositiveNumber);
  rates_cmd->add_option("--link", rates.link, "True link, e.g. identity, cube, step:-1,0,2")->capture_default_str();
  rates_cmd->add_option("--M", rates.M, "Moment bound M")->capture_default_str();
  rates_cmd->add_option("--a", rates.a, "Moment exponent a")->capture_default_str();
  rates_cmd->add_option("--c-x", rates.c_x, "Covariate density lower bound")->capture_default_str();
  rates_cmd->add_option("--bandwidth-c", rates.c_const, "Bandwidth constant C")->capture_default_str();
  rates_cmd->add_option("--eta", rates.eta, "Log exponent eta")->capture_default_str();
  rates_cmd->add_option("--covariate-slope", rates.covariate_slope, "Covariate density 1 + s(x - 1/2)")
      ->capture_default_str();
  rates_cmd->add_option("--grid-points", rates.grid_points, "Deconvolution grid size (power of two)")
      ->capture_default_str();

  EstimateOptions est;
  CommonOptions est_common;
  auto* est_cmd = app.add_subcommand("estimate", "Fit one dataset read from CSV");
  add_common(est_cmd, est_common, "Output CSV", "fit.csv");
  est_cmd->add_option("--input", est.input, "Dataset CSV (mode,index,x,y)")->required();
  est_cmd->add_option("--sigma", est.sigma, "Known noise level")->required();
  est_cmd->add_option("--M", est.M, "Moment bound M")->capture_default_str();
  est_cmd->add_option("--a", est.a, "Moment exponent a")->capture_default_str();
  est_cmd->add_option("--c-x", est.c_x, "Covariate density lower bound")->capture_default_str();
  est_cmd->add_option("--bandwidth-c", est.c_const, "Bandwidth constant C")->capture_default_str();
  est_cmd->add_option("--eta", est.eta, "Log exponent eta")->capture_default_str();
  est_cmd->add_option("--grid-points", est.grid_points, "Deconvolution grid size (power of two)")
      ->capture_default_str();
  est_cmd->add_option("--signal-out", est.signal_out, "Also write the deconvolved signal CDF (unlinked mode)");

  SimulateOptions sim;
  CommonOptions sim_common;
  auto* sim_cmd = app.add_subcommand("simulate", "Write a synthetic dataset as CSV");
  add_common(sim_cmd, sim_common, "Output CSV", "data.csv");
  sim_cmd->add_option("--mode", sim.mode, "shuffled, unlinked or deconv")->capture_default_str();
  sim_cmd->add_option("--n", sim.n, "Sample size")->capture_default_str();
  sim_cmd->add_option("--link", sim.link, "True link")->capture_default_str();
  sim_cmd->add_option("--sigma", sim.sigma, "Noise level")->capture_default_str();
  sim_cmd->add_option("--covariate-slope", sim.covariate_slope, "Covariate density 1 + s(x - 1/2)")
      ->capture_default_str();

  auto* self_cmd = app.add_subcommand("selftest", "Run the built-in invariant suites");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    if (chosen == conj_cmd) cmd_conjecture(conj, conj_common, out);
    if (chosen == rates_cmd) cmd_rates(rates, rates_common, out);
    if (chosen == est_cmd) cmd_estimate(est, est_common, out);
    if (chosen == sim_cmd) cmd_simulate(sim, sim_common, out);
    if (chosen == self_cmd) return run_selftest(out) ? 0 : 1;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << chosen->help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace shufreg::cli
