#include "shufreg/experiments.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "shufreg/parallel.hpp"
#include "shufreg/stats.hpp"

namespace shufreg {

// ---------------------------------------------------------------------------
// Occupancy product

void ConjectureConfig::validate() const {
  if (n_min < 1 || n_max < n_min) throw std::invalid_argument("need 1 <= n_min <= n_max");
  if (grid_points < 1) throw std::invalid_argument("grid needs at least one point");
  if (grid_points == 1 && n_min != n_max) throw std::invalid_argument("a one-point grid needs n_min == n_max");
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  if (C_list.empty()) throw std::invalid_argument("C list is empty");
  for (double C : C_list) {
    if (!(C > 0.0)) throw std::invalid_argument("every C must be positive");
  }
}

std::vector<std::uint64_t> log_spaced_grid(std::uint64_t lo, std::uint64_t hi, std::size_t points) {
  if (lo < 1 || hi < lo || points < 1) throw std::invalid_argument("invalid log grid");
  std::vector<std::uint64_t> out;
  out.reserve(points);
  if (points == 1) return {lo};
  const double a = std::log10(static_cast<double>(lo));
  const double b = std::log10(static_cast<double>(hi));
  for (std::size_t k = 0; k < points; ++k) {
    const double e = a + (b - a) * static_cast<double>(k) / static_cast<double>(points - 1);
    out.push_back(static_cast<std::uint64_t>(std::llround(std::pow(10.0, e))));
  }
  out.front() = lo;
  out.back() = hi;
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// log |1 - C n^{-c/k}|, or -inf when the factor is exactly zero.
double log_abs_factor(std::uint64_t n, std::uint64_t k, double C, double c) noexcept {
  const double x = C * std::exp(-c * std::log(static_cast<double>(n)) / static_cast<double>(k));
  if (x == 1.0) return -std::numeric_limits<double>::infinity();
  return x < 1.0 ? std::log1p(-x) : std::log(x - 1.0);
}

double finite_exp(double log_value) noexcept {
  if (log_value == -std::numeric_limits<double>::infinity()) return 0.0;
  return std::min(std::exp(log_value), std::numeric_limits<double>::max());
}

}  // namespace

double conjecture_product(std::span<const std::uint32_t> counts, std::uint64_t n, double C, double c) {
  double log_sum = 0.0;
  for (std::uint32_t k : counts) {
    if (k == 0) continue;
    const double term = log_abs_factor(n, k, C, c);
    if (std::isinf(term) && term < 0.0) return 0.0;
    log_sum += 2.0 * term;
  }
  return finite_exp(log_sum);
}

double conjecture_product_occupancy(std::span<const std::uint64_t> occupancy, std::uint64_t n, double C,
                                    double c) {
  double log_sum = 0.0;
  for (std::size_t k = 1; k < occupancy.size(); ++k) {
    if (occupancy[k] == 0) continue;
    const double term = log_abs_factor(n, k, C, c);
    if (std::isinf(term) && term < 0.0) return 0.0;
    log_sum += 2.0 * static_cast<double>(occupancy[k]) * term;
  }
  return finite_exp(log_sum);
}

void sample_uniform_multinomial(std::uint64_t n, CounterRng& rng, std::vector<std::uint32_t>& counts) {
  counts.assign(n, 0);
  for (std::uint64_t i = 0; i < n; ++i) ++counts[rng.below(n)];
}

std::vector<std::uint64_t> occupancy_histogram(std::span<const std::uint32_t> counts) {
  std::vector<std::uint64_t> occ(1, 0);
  for (std::uint32_t k : counts) {
    if (k >= occ.size()) occ.resize(k + 1, 0);
    ++occ[k];
  }
  return occ;
}

std::vector<ConjectureRow> conjecture_sweep(const ConjectureConfig& cfg, unsigned workers) {
  cfg.validate();
  const auto grid = log_spaced_grid(cfg.n_min, cfg.n_max, cfg.grid_points);
  const std::size_t nc = cfg.C_list.size();
  const std::size_t tasks = grid.size() * cfg.reps;
  std::vector<double> values(tasks * nc);
  std::vector<std::vector<std::uint32_t>> buffers(std::max(workers, 1u));
  const StreamKey base = StreamKey::derive(cfg.seed, "conjecture");

  parallel_for(tasks, workers, [&](std::size_t task, unsigned worker) {
    const std::uint64_t n = grid[task / cfg.reps];
    const std::uint64_t rep = task % cfg.reps;
    CounterRng rng(base.child(n).child(rep));
    auto& counts = buffers[worker];
    sample_uniform_multinomial(n, rng, counts);
    const auto occ = occupancy_histogram(counts);
    for (std::size_t j = 0; j < nc; ++j) {
      values[task * nc + j] = conjecture_product_occupancy(occ, n, cfg.C_list[j], cfg.c);
    }
  });

  std::vector<ConjectureRow> rows;
  rows.reserve(grid.size() * nc);
  std::vector<double> column(cfg.reps);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t j = 0; j < nc; ++j) {
      for (std::size_t r = 0; r < cfg.reps; ++r) column[r] = values[((g * cfg.reps) + r) * nc + j];
      const auto ms = stats::mean_stderr(column);
      rows.push_back({grid[g], cfg.C_list[j], ms.mean, ms.stderr_});
    }
  }
  return rows;
}

csv::Table conjecture_table(std::span<const ConjectureRow> rows) {
  csv::Table table{{"n", "C", "mean", "stderr"}, {}};
  table.rows.reserve(rows.size());
  for (const auto& r : rows) {
    table.rows.push_back({std::to_string(r.n), csv::format_double(r.C), csv::format_double(r.mean),
                          csv::format_double(r.stderr_)});
  }
  return table;
}

namespace {

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a nonnegative integer: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::vector<ConjectureRow> parse_conjecture_table(const csv::Table& table) {
  const auto in = table.column("n");
  const auto ic = table.column("C");
  const auto im = table.column("mean");
  const auto is = table.column("stderr");
  std::vector<ConjectureRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    rows.push_back({parse_u64(r[in]), csv::parse_double(r[ic]), csv::parse_double(r[im]),
                    csv::parse_double(r[is])});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Risks

std::string_view to_string(RiskKind kind) noexcept {
  switch (kind) {
    case RiskKind::empirical_L1:
      return "empirical_L1";
    case RiskKind::population_L1:
      return "population_L1";
    case RiskKind::W1_measure:
      return "W1_measure";
  }
  return "?";
}

RiskKind parse_risk_kind(std::string_view text) {
  for (auto k : {RiskKind::empirical_L1, RiskKind::population_L1, RiskKind::W1_measure}) {
    if (text == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown risk kind '" + std::string(text) + "'");
}

double risk_empirical(const MonotoneStepFn& mhat, const LinkSpec& m0, std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("empirical risk over an empty sample");
  double sum = 0.0;
  for (double x : xs) sum += std::abs(mhat(x) - eval_link(m0, x));
  return sum / static_cast<double>(xs.size());
}

namespace {

template <class F>
double composite_gauss(const F& f, double a, double b) {
  constexpr int kPanels = 4;
  const double w = (b - a) / kPanels;
  double sum = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    sum += boost::math::quadrature::gauss<double, 16>::integrate(f, a + w * p, p + 1 == kPanels ? b : a + w * (p + 1));
  }
  return sum;
}

template <class F>
double adaptive_gauss(const F& f, double a, double b, double whole, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = composite_gauss(f, a, mid);
  const double right = composite_gauss(f, mid, b);
  const double halves = left + right;
  if (depth >= 60 || !(mid > a && mid < b) || std::abs(halves - whole) <= 1e-6 * std::abs(halves) + 1e-15 * (b - a)) {
    return halves;
  }
  return adaptive_gauss(f, a, mid, left, depth + 1) + adaptive_gauss(f, mid, b, right, depth + 1);
}

}  // namespace

double risk_population(const MonotoneStepFn& mhat, const LinkSpec& m0, const CovariateLaw& law) {
  std::vector<double> cuts{0.0, 1.0};
  for (double k : mhat.knots()) cuts.push_back(k);
  for (double k : link_breakpoints(m0)) cuts.push_back(k);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    if (!(a >= 0.0 && b <= 1.0 && b > a)) continue;
    const double level = mhat(0.5 * (a + b));  // constant on (a, b]
    auto f = [&](double x) { return std::abs(level - eval_link(m0, x)) * law.density(x); };
    total += adaptive_gauss(f, a, b, composite_gauss(f, a, b), 0);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Rate sweeps

std::string_view to_string(NoiseRegime row) noexcept {
  switch (row) {
    case NoiseRegime::below_root:
      return "below-root";
    case NoiseRegime::root_to_log_eta:
      return "root-to-log-eta";
    case NoiseRegime::log_eta_to_log_beta:
      return "log-eta-to-log-beta";
    case NoiseRegime::log_beta_to_power:
      return "log-beta-to-power";
    case NoiseRegime::above_power:
      return "above-power";
  }
  return "?";
}

NoiseRegime parse_regime(std::string_view text) {
  for (auto r : {NoiseRegime::below_root, NoiseRegime::root_to_log_eta, NoiseRegime::log_eta_to_log_beta,
                 NoiseRegime::log_beta_to_power, NoiseRegime::above_power}) {
    if (text == to_string(r)) return r;
  }
  throw std::invalid_argument("unknown noise regime preset '" + std::string(text) + "'");
}

SigmaRule SigmaRule::constant(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("constant sigma must be finite, >= 0");
  return SigmaRule(Kind::constant, sigma, NoiseRegime::below_root);
}

SigmaRule SigmaRule::power(double kappa) {
  if (!std::isfinite(kappa)) throw std::invalid_argument("sigma exponent must be finite");
  return SigmaRule(Kind::power, kappa, NoiseRegime::below_root);
}

SigmaRule SigmaRule::preset(NoiseRegime row) { return SigmaRule(Kind::preset, 0.0, row); }

SigmaRule SigmaRule::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("sigma rule must look like constant:<s>, power:<kappa> or preset:<row>");
  }
  const auto head = text.substr(0, colon);
  const auto tail = text.substr(colon + 1);
  if (head == "constant") return constant(csv::parse_double(tail));
  if (head == "power") return power(csv::parse_double(tail));
  if (head == "preset") return preset(parse_regime(tail));
  throw std::invalid_argument("unknown sigma rule '" + std::string(head) + "'");
}

double SigmaRule::sigma(std::uint64_t n, double eta, double beta) const {
  const auto nd = static_cast<double>(n);
  switch (kind_) {
    case Kind::constant:
      return value_;
    case Kind::power:
      return std::pow(nd, -value_);
    case Kind::preset:
      break;
  }
  const auto range = regime_range(row_, n, eta, beta);
  const double s = row_ == NoiseRegime::below_root ? 0.1 * std::pow(nd, -0.6) : std::sqrt(range.lower * range.upper);
  if (!(s > range.lower && s <= range.upper)) {
    throw std::invalid_argument("preset " + std::string(shufreg::to_string(row_)) + " is empty or violated at n = " +
                                std::to_string(n));
  }
  return s;
}

std::string SigmaRule::to_string() const {
  switch (kind_) {
    case Kind::constant:
      return "constant:" + csv::format_double(value_);
    case Kind::power:
      return "power:" + csv::format_double(value_);
    case Kind::preset:
      break;
  }
  return "preset:" + std::string(shufreg::to_string(row_));
}

std::vector<RiskKind> risk_kinds(Mode problem) {
  if (problem == Mode::deconv) return {RiskKind::W1_measure};
  return {RiskKind::empirical_L1, RiskKind::population_L1};
}

std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t n, std::uint64_t rep) noexcept {
  return StreamKey::derive(seed, "rate_sweep").child(n).child(rep).value;
}

std::vector<RiskRecord> rate_sweep(const RateSweepConfig& cfg, unsigned workers) {
  if (cfg.n_grid.empty()) throw std::invalid_argument("empty n grid");
  if (cfg.reps < 1) throw std::invalid_argument("reps must be >= 1");
  for (auto n : cfg.n_grid) {
    if (n < 2) throw std::invalid_argument("every n in the grid must be >= 2");
  }
  validate_link(cfg.link);
  cfg.fit.validate();
  cfg.fit.rule.validate();
  const double eta = cfg.fit.rule.eta;
  const double beta = cfg.noise.beta;
  // Validate every sigma up front so a bad preset fails before any work.
  for (auto n : cfg.n_grid) (void)cfg.sigma_rule.sigma(n, eta, beta);

  std::optional<TabulatedDistribution> truth;
  if (cfg.problem == Mode::deconv) truth = link_signal_cdf(cfg.link, cfg.law);

  const auto kinds = risk_kinds(cfg.problem);
  const std::size_t tasks = cfg.n_grid.size() * cfg.reps;
  std::vector<RiskRecord> records(tasks * kinds.size());

  parallel_for(tasks, workers, [&](std::size_t task, unsigned) {
    const std::uint64_t n = cfg.n_grid[task / cfg.reps];
    const std::uint64_t rep = task % cfg.reps;
    const std::uint64_t seed = replication_seed(cfg.seed, n, rep);
    const double sigma = cfg.sigma_rule.sigma(n, eta, beta);
    const auto data = sample_dataset(cfg.problem, n, cfg.link, cfg.noise, sigma, seed, cfg.law);
    const auto grid = GridSpec::covering(data.y, sigma, cfg.grid_points);

    std::vector<double> values;
    switch (cfg.problem) {
      case Mode::shuffled: {
        FitConfig fc = cfg.fit;
        fc.eta_mode = EtaMode::shuffled;
        const auto fit = fit_shuffled(data.x_ordered, data.y, sigma, fc);
        values = {risk_empirical(fit.fn, cfg.link, data.x_ordered), risk_population(fit.fn, cfg.link, cfg.law)};
        break;
      }
      case Mode::unlinked: {
        FitConfig fc = cfg.fit;
        fc.eta_mode = EtaMode::unlinked;
        const auto fit = fit_unlinked(data.x_ordered, data.y, cfg.noise, sigma, fc, grid);
        values = {risk_empirical(fit.fn, cfg.link, data.x_ordered), risk_population(fit.fn, cfg.link, cfg.law)};
        break;
      }
      case Mode::deconv: {
        const auto bw = select_bandwidth(n, sigma, cfg.noise, cfg.fit.rule);
        const auto est = deconvolve_cdf(EmpiricalMeasure(data.y), cfg.noise, sigma, bw.h, grid);
        values = {w1_tabulated(est, *truth)};
        break;
      }
    }
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      records[task * kinds.size() + k] = RiskRecord{cfg.problem, n, sigma, seed, kinds[k], values[k]};
    }
  });
  return records;
}

csv::Table risk_table(std::span<const RiskRecord> records) {
  csv::Table table{{"problem", "n", "sigma", "seed", "risk_kind", "value"}, {}};
  table.rows.reserve(records.size());
  for (const auto& r : records) {
    table.rows.push_back({std::string(to_string(r.problem)), std::to_string(r.n), csv::format_double(r.sigma),
                          std::to_string(r.seed), std::string(to_string(r.risk_kind)),
                          csv::format_double(r.value)});
  }
  return table;
}

std::vector<RiskRecord> parse_risk_table(const csv::Table& table) {
  const auto ip = table.column("problem");
  const auto in = table.column("n");
  const auto is = table.column("sigma");
  const auto iseed = table.column("seed");
  const auto ik = table.column("risk_kind");
  const auto iv = table.column("value");
  std::vector<RiskRecord> out;
  out.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    out.push_back({parse_mode(r[ip]), parse_u64(r[in]), csv::parse_double(r[is]), parse_u64(r[iseed]),
                   parse_risk_kind(r[ik]), csv::parse_double(r[iv])});
  }
  return out;
}

std::vector<std::pair<double, double>> mean_by_n(std::span<const RiskRecord> records, RiskKind kind) {
  std::map<std::uint64_t, std::pair<double, std::size_t>> acc;
  for (const auto& r : records) {
    if (r.risk_kind != kind) continue;
    auto& [sum, count] = acc[r.n];
    sum += r.value;
    ++count;
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(acc.size());
  for (const auto& [n, sc] : acc) out.emplace_back(static_cast<double>(n), sc.first / static_cast<double>(sc.second));
  return out;
}

LogLogFit fit_loglog_slope(std::span<const std::pair<double, double>> points) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw std::invalid_argument("log-log fit needs positive values");
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
  }
  const auto k = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (lx.size() < 2 || !(sxx > 0.0)) throw std::invalid_argument("log-log fit needs two distinct x values");
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? std::min(1.0, (sxy * sxy) / (sxx * syy)) : 1.0;
  return {slope, my - slope * mx, r2};
}

std::vector<double> normalized_uniform_spacings(std::size_t n, CounterRng& rng) {
  std::vector<double> u(n);
  for (auto& v : u) v = rng.uniform();
  std::sort(u.begin(), u.end());
  std::vector<double> gaps(n + 1);
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    gaps[i] = u[i] - prev;
    prev = u[i];
  }
  gaps[n] = 1.0 - prev;
  const auto scale = static_cast<double>(n + 1);
  for (auto& g : gaps) g *= scale;
  return gaps;
}

}  // namespace shufreg
