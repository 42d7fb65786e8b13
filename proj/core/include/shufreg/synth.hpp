#pragma once

// Synthetic data for the shuffled, unlinked and deconvolution observation
// schemes Y = m0(X) + sigma * delta, together with the link and noise catalog.

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "shufreg/dist1d.hpp"
#include "shufreg/rng.hpp"

namespace shufreg {

enum class NoiseFamily { gaussian };

/// Supersmooth noise parameters. |charfn(t)| (1+|t|)^{-beta_tilde}
/// exp(|t|^beta / gamma1) <= c1, and the reciprocal characteristic function
/// with its first two derivatives is bounded by
/// c2 (1 + |t|^beta_tilde) exp(|t|^beta / gamma2).
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::gaussian;
  double beta = 2.0;
  double gamma1 = 2.0;
  double gamma2 = 2.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double beta_tilde = 2.0;

  /// Standard normal: beta = 2, gamma1 = gamma2 = 2, c1 = c2 = 1,
  /// beta_tilde = 2 (covers r'' = (1 + t²) exp(t²/2)).
  static NoiseSpec gaussian() noexcept { return {}; }
};

/// Characteristic function of the standardized noise delta.
double noise_charfn(const NoiseSpec& spec, double t) noexcept;

/// c2 (1 + |t|^beta_tilde) exp(|t|^beta / gamma2): the envelope of the
/// reciprocal characteristic function.
double noise_reciprocal_envelope(const NoiseSpec& spec, double t) noexcept;

/// One standardized noise draw (mean 0, variance 1).
double sample_noise(const NoiseSpec& spec, CounterRng& rng) noexcept;

// ---------------------------------------------------------------------------
// Links: nondecreasing, left-continuous functions on [0, 1].

struct IdentityLink {};
struct AffineLink {
  double slope = 1.0;  // >= 0
  double intercept = 0.0;
};
struct CubeLink {};
/// levels[k] on (k/K, (k+1)/K], levels[0] on [0, 1/K].
struct StepLink {
  std::vector<double> levels;
};
/// -(x log^{1+eps}(1/x))^{-1/(a+2)} on (0, C/n] and 0 on (C/n, 1]: the
/// nondecreasing mirror of an unbounded link whose (a+2)-moment is
/// (log(n/C))^{-eps} / eps under Uniform[0, 1].
struct UnboundedTailLink {
  double eps = 0.1;
  double a = 1.0;
  double C = 0.5;
  std::uint64_t n = 1000;
};

using LinkSpec = std::variant<IdentityLink, AffineLink, CubeLink, StepLink, UnboundedTailLink>;

/// Throws std::invalid_argument for x outside [0, 1] or an invalid spec.
double eval_link(const LinkSpec& link, double x);

/// Validates the parameters (monotone, finite). Throws std::invalid_argument.
void validate_link(const LinkSpec& link);

/// Points in (0, 1) where the link is discontinuous or not smooth.
std::vector<double> link_breakpoints(const LinkSpec& link);

/// sup{t in [0, 1] : m(t) <= z} by bisection; 0 for the empty set.
double link_generalized_inverse(const LinkSpec& link, double z);

/// "identity", "affine:<slope>:<intercept>", "cube", "step:<l1>,<l2>,...",
/// "unbounded:<eps>:<a>:<C>:<n>".
LinkSpec parse_link(std::string_view text);
std::string link_to_string(const LinkSpec& link);

struct CatalogEntry {
  std::string name;
  LinkSpec link;
  double M;  // moment bound for the (a+2)-th absolute moment under Uniform[0, 1]
  double a;
};

/// The link catalog used across tests and experiments; `n` parameterizes the
/// unbounded tail.
std::vector<CatalogEntry> link_catalog(std::uint64_t n);

// ---------------------------------------------------------------------------
// Covariate law on [0, 1] with a density bounded in [c_X, C_X].

class CovariateLaw {
 public:
  static CovariateLaw uniform() noexcept { return CovariateLaw(0.0); }
  /// Density 1 + slope (x - 1/2); requires |slope| < 2.
  static CovariateLaw linear(double slope);

  [[nodiscard]] double density(double x) const noexcept;
  [[nodiscard]] double cdf(double x) const noexcept;
  [[nodiscard]] double inverse_cdf(double u) const noexcept;
  [[nodiscard]] double density_lower() const noexcept { return 1.0 - std::abs(slope_) / 2.0; }
  [[nodiscard]] double density_upper() const noexcept { return 1.0 + std::abs(slope_) / 2.0; }
  [[nodiscard]] double slope() const noexcept { return slope_; }

 private:
  explicit CovariateLaw(double slope) noexcept : slope_(slope) {}
  double slope_;
};

/// Tabulated CDF of Z = m(X), F_Z(z) = F_X(m^{-1}(z)).
TabulatedDistribution link_signal_cdf(const LinkSpec& link, const CovariateLaw& law,
                                      std::size_t points = std::size_t{1} << 14);

// ---------------------------------------------------------------------------
// Datasets

enum class Mode { shuffled, unlinked, deconv };

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view text);

struct StreamUsage {
  std::string purpose;
  StreamKey key;
  std::uint64_t draws = 0;
};

struct Dataset {
  Mode mode = Mode::shuffled;
  std::vector<double> x_ordered;  // empty in deconv mode
  std::vector<double> y;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  LinkSpec truth;
  /// The standardized noise draws behind y, in generation order. Hidden
  /// ground truth; not serialized.
  std::vector<double> noise;
  std::vector<StreamUsage> streams;
};

/// Draws X i.i.d. from `law`, delta i.i.d. from `noise`, and forms
/// Y = m0(X) + sigma delta. Shuffled: y is uniformly permuted and x is exposed
/// only through its order statistics. Unlinked: y is built from a second,
/// independent covariate sample. Deconv: only y is exposed. Every purpose uses
/// its own stream derived from (seed, purpose). Throws std::invalid_argument
/// for n == 0 or sigma < 0.
Dataset sample_dataset(Mode mode, std::size_t n, const LinkSpec& link, const NoiseSpec& noise,
                       double sigma, std::uint64_t seed,
                       const CovariateLaw& law = CovariateLaw::uniform());

/// Observable part of a dataset, as read back from CSV.
struct Observations {
  Mode mode = Mode::shuffled;
  std::vector<double> x;
  std::vector<double> y;
};

/// CSV with header "mode,index,x,y"; x is empty in deconv mode.
void write_dataset_csv(std::ostream& out, const Dataset& data);
Observations read_dataset_csv(std::istream& in);

}  // namespace shufreg
