#pragma once

// Monte-Carlo studies: the multinomial occupancy product sweep, L1 risk
// evaluation, and noise-regime rate sweeps.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shufreg/csv.hpp"
#include "shufreg/deconv.hpp"
#include "shufreg/dist1d.hpp"
#include "shufreg/regress.hpp"
#include "shufreg/rng.hpp"
#include "shufreg/synth.hpp"

namespace shufreg {

// ---------------------------------------------------------------------------
// Occupancy product

struct ConjectureConfig {
  std::uint64_t n_min = 100;
  std::uint64_t n_max = 1'000'000;
  std::size_t grid_points = 30;
  std::size_t reps = 500;
  double c = 20.0;
  std::vector<double> C_list{1, 2, 5, 10, 100, 200, 500, 1000};
  std::uint64_t seed = 1;

  void validate() const;
};

/// round(10^(log10 lo + k (log10 hi - log10 lo) / (points - 1))), deduplicated.
std::vector<std::uint64_t> log_spaced_grid(std::uint64_t lo, std::uint64_t hi, std::size_t points);

/// Π_{j : n_j > 0} (1 - C exp(-c log(n) / n_j))², evaluated as a sum of logs
/// with an exact zero short-circuit.
double conjecture_product(std::span<const std::uint32_t> counts, std::uint64_t n, double C, double c);

/// Same product from the occupancy histogram: occupancy[k] cells hold k balls.
double conjecture_product_occupancy(std::span<const std::uint64_t> occupancy, std::uint64_t n, double C,
                                    double c);

/// Multinomial(n; 1/n, ..., 1/n) by binning n uniform draws into n cells.
/// `counts` is resized to n and overwritten.
void sample_uniform_multinomial(std::uint64_t n, CounterRng& rng, std::vector<std::uint32_t>& counts);

std::vector<std::uint64_t> occupancy_histogram(std::span<const std::uint32_t> counts);

struct ConjectureRow {
  std::uint64_t n = 0;
  double C = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Rows ordered by n, then by position in C_list. Every C is evaluated on the
/// same multinomial draws. Rep r at size n uses the stream
/// (seed, "conjecture").child(n).child(r), so output is independent of the
/// worker count.
std::vector<ConjectureRow> conjecture_sweep(const ConjectureConfig& cfg, unsigned workers);

csv::Table conjecture_table(std::span<const ConjectureRow> rows);
std::vector<ConjectureRow> parse_conjecture_table(const csv::Table& table);

// ---------------------------------------------------------------------------
// Risks

enum class RiskKind { empirical_L1, population_L1, W1_measure };

std::string_view to_string(RiskKind kind) noexcept;
RiskKind parse_risk_kind(std::string_view text);

struct RiskRecord {
  Mode problem = Mode::shuffled;
  std::uint64_t n = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  RiskKind risk_kind = RiskKind::empirical_L1;
  double value = 0.0;
};

/// (1/n) Σ |mhat(x_i) - m0(x_i)|.
double risk_empirical(const MonotoneStepFn& mhat, const LinkSpec& m0, std::span<const double> xs);

/// ∫ |mhat - m0| dmu_X by adaptive 64-point composite Gauss-Legendre on each
/// interval between the knots of mhat and the breakpoints of m0; relative
/// tolerance 1e-6 per interval.
double risk_population(const MonotoneStepFn& mhat, const LinkSpec& m0, const CovariateLaw& law);

// ---------------------------------------------------------------------------
// Rate sweeps

/// Noise level as a function of n: constant, n^{-kappa}, or a preset inside
/// one of the five noise regimes.
class SigmaRule {
 public:
  enum class Kind { constant, power, preset };

  static SigmaRule constant(double sigma);
  static SigmaRule power(double kappa);
  static SigmaRule preset(NoiseRegime row);
  /// "constant:<s>", "power:<kappa>", or "preset:<row>" with row one of
  /// below-root, root-to-log-eta, log-eta-to-log-beta, log-beta-to-power,
  /// above-power.
  static SigmaRule parse(std::string_view text);

  /// Presets: 0.1 n^{-0.6} for the lowest row, the geometric mean of the row
  /// endpoints otherwise. Throws std::invalid_argument when a preset falls
  /// outside its row (or the row is empty) at this n.
  [[nodiscard]] double sigma(std::uint64_t n, double eta, double beta) const;
  [[nodiscard]] std::string to_string() const;
  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  SigmaRule(Kind kind, double value, NoiseRegime row) : kind_(kind), value_(value), row_(row) {}
  Kind kind_;
  double value_;
  NoiseRegime row_;
};

std::string_view to_string(NoiseRegime row) noexcept;
NoiseRegime parse_regime(std::string_view text);

struct RateSweepConfig {
  Mode problem = Mode::shuffled;
  std::vector<std::uint64_t> n_grid{100, 316, 1000, 3162, 10000};
  SigmaRule sigma_rule = SigmaRule::constant(0.01);
  std::size_t reps = 30;
  std::uint64_t seed = 1;
  LinkSpec link = IdentityLink{};
  NoiseSpec noise = NoiseSpec::gaussian();
  FitConfig fit{};
  CovariateLaw law = CovariateLaw::uniform();
  std::size_t grid_points = std::size_t{1} << 14;
};

/// Risk kinds emitted per replication for a problem.
std::vector<RiskKind> risk_kinds(Mode problem);

/// Per-replication seed of rep `rep` at size n.
std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t n, std::uint64_t rep) noexcept;

/// Records ordered by (n, rep, kind); each replication is a pure function of
/// (config, n, rep).
std::vector<RiskRecord> rate_sweep(const RateSweepConfig& cfg, unsigned workers);

csv::Table risk_table(std::span<const RiskRecord> records);
std::vector<RiskRecord> parse_risk_table(const csv::Table& table);

/// Mean value per n for one (problem, kind), ordered by n.
std::vector<std::pair<double, double>> mean_by_n(std::span<const RiskRecord> records, RiskKind kind);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

/// Least squares of log(value) on log(x). Throws std::invalid_argument for
/// nonpositive entries or fewer than two distinct x.
LogLogFit fit_loglog_slope(std::span<const std::pair<double, double>> points);

// ---------------------------------------------------------------------------
// Order statistics

/// (n + 1) times the n + 1 spacings of n sorted uniforms (including the two
/// boundary gaps).
std::vector<double> normalized_uniform_spacings(std::size_t n, CounterRng& rng);

}  // namespace shufreg
