#include "shufreg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "shufreg/csv.hpp"

namespace shufreg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double unbounded_threshold(const UnboundedTailLink& u) { return u.C / static_cast<double>(u.n); }

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

// ---------------------------------------------------------------------------
// Noise

double noise_charfn(const NoiseSpec& spec, double t) noexcept {
  switch (spec.family) {
    case NoiseFamily::gaussian:
      return std::exp(-0.5 * t * t);
  }
  return 1.0;
}

double noise_reciprocal_envelope(const NoiseSpec& spec, double t) noexcept {
  const double at = std::abs(t);
  return spec.c2 * (1.0 + std::pow(at, spec.beta_tilde)) * std::exp(std::pow(at, spec.beta) / spec.gamma2);
}

double sample_noise(const NoiseSpec& spec, CounterRng& rng) noexcept {
  switch (spec.family) {
    case NoiseFamily::gaussian:
      return rng.normal();
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Links

void validate_link(const LinkSpec& link) {
  std::visit(overloaded{
                 [](const IdentityLink&) {},
                 [](const CubeLink&) {},
                 [](const AffineLink& l) {
                   if (!(l.slope >= 0.0) || !std::isfinite(l.slope) || !std::isfinite(l.intercept)) {
                     throw std::invalid_argument("affine link needs a finite nonnegative slope");
                   }
                 },
                 [](const StepLink& l) {
                   if (l.levels.empty()) throw std::invalid_argument("step link needs at least one level");
                   if (!std::is_sorted(l.levels.begin(), l.levels.end())) {
                     throw std::invalid_argument("step link levels must be nondecreasing");
                   }
                 },
                 [](const UnboundedTailLink& l) {
                   if (!(l.eps > 0.0) || !(l.a > 0.0) || !(l.C > 0.0) || l.n == 0) {
                     throw std::invalid_argument("unbounded link needs eps, a, C > 0 and n >= 1");
                   }
                   // x log^{1+eps}(1/x) is increasing only below e^{-(1+eps)}.
                   if (unbounded_threshold(l) > std::exp(-(1.0 + l.eps))) {
                     throw std::invalid_argument("unbounded link needs C/n <= exp(-(1+eps))");
                   }
                 },
             },
             link);
}

double eval_link(const LinkSpec& link, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("link argument outside [0, 1]");
  return std::visit(overloaded{
                        [&](const IdentityLink&) { return x; },
                        [&](const AffineLink& l) { return l.slope * x + l.intercept; },
                        [&](const CubeLink&) { return x * x * x; },
                        [&](const StepLink& l) {
                          const auto k = static_cast<double>(l.levels.size());
                          const double idx = std::ceil(x * k) - 1.0;
                          return l.levels[static_cast<std::size_t>(std::clamp(idx, 0.0, k - 1.0))];
                        },
                        [&](const UnboundedTailLink& l) {
                          if (x > unbounded_threshold(l)) return 0.0;
                          if (x == 0.0) return -std::numeric_limits<double>::infinity();
                          const double base = x * std::pow(std::log(1.0 / x), 1.0 + l.eps);
                          return -std::pow(base, -1.0 / (l.a + 2.0));
                        },
                    },
                    link);
}

std::vector<double> link_breakpoints(const LinkSpec& link) {
  return std::visit(overloaded{
                        [](const StepLink& l) {
                          std::vector<double> pts;
                          const auto k = l.levels.size();
                          for (std::size_t i = 1; i < k; ++i) {
                            pts.push_back(static_cast<double>(i) / static_cast<double>(k));
                          }
                          return pts;
                        },
                        [](const UnboundedTailLink& l) { return std::vector<double>{unbounded_threshold(l)}; },
                        [](const auto&) { return std::vector<double>{}; },
                    },
                    link);
}

double link_generalized_inverse(const LinkSpec& link, double z) {
  if (eval_link(link, 1.0) <= z) return 1.0;
  if (eval_link(link, 0.0) > z) return 0.0;
  double lo = 0.0;  // m(lo) <= z
  double hi = 1.0;  // m(hi) > z
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (eval_link(link, mid) <= z) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

LinkSpec parse_link(std::string_view text) {
  const auto parts = split(text, ':');
  const auto num = [](std::string_view s) { return csv::parse_double(s); };
  LinkSpec link;
  if (parts[0] == "identity" && parts.size() == 1) {
    link = IdentityLink{};
  } else if (parts[0] == "cube" && parts.size() == 1) {
    link = CubeLink{};
  } else if (parts[0] == "affine" && parts.size() == 3) {
    link = AffineLink{num(parts[1]), num(parts[2])};
  } else if (parts[0] == "step" && parts.size() == 2) {
    StepLink step;
    for (auto level : split(parts[1], ',')) step.levels.push_back(num(level));
    link = step;
  } else if (parts[0] == "unbounded" && parts.size() == 5) {
    const double n = num(parts[4]);
    if (!(n >= 1.0)) throw std::invalid_argument("unbounded link needs n >= 1");
    link = UnboundedTailLink{num(parts[1]), num(parts[2]), num(parts[3]), static_cast<std::uint64_t>(n)};
  } else {
    throw std::invalid_argument("unknown link '" + std::string(text) + "'");
  }
  validate_link(link);
  return link;
}

std::string link_to_string(const LinkSpec& link) {
  return std::visit(overloaded{
                        [](const IdentityLink&) { return std::string("identity"); },
                        [](const CubeLink&) { return std::string("cube"); },
                        [](const AffineLink& l) {
                          return "affine:" + csv::format_double(l.slope) + ":" + csv::format_double(l.intercept);
                        },
                        [](const StepLink& l) {
                          std::string out = "step:";
                          for (std::size_t i = 0; i < l.levels.size(); ++i) {
                            if (i != 0) out += ',';
                            out += csv::format_double(l.levels[i]);
                          }
                          return out;
                        },
                        [](const UnboundedTailLink& l) {
                          return "unbounded:" + csv::format_double(l.eps) + ":" + csv::format_double(l.a) + ":" +
                                 csv::format_double(l.C) + ":" + std::to_string(l.n);
                        },
                    },
                    link);
}

std::vector<CatalogEntry> link_catalog(std::uint64_t n) {
  // Moments under Uniform[0,1] with a = 1: identity 1/4, affine(2,-1) 1/4,
  // cube 1/10, step 2.28, unbounded (log(n/C))^{-eps}/eps ~ 8.
  return {
      {"identity", IdentityLink{}, 1.0, 1.0},
      {"affine", AffineLink{2.0, -1.0}, 1.0, 1.0},
      {"cube", CubeLink{}, 1.0, 1.0},
      {"step", StepLink{{-1.0, 0.0, 0.5, 2.0}}, 4.0, 1.0},
      {"unbounded", UnboundedTailLink{0.1, 1.0, 0.5, std::max<std::uint64_t>(n, 2)}, 20.0, 1.0},
  };
}

// ---------------------------------------------------------------------------
// Covariate law

CovariateLaw CovariateLaw::linear(double slope) {
  if (!(std::abs(slope) < 2.0)) throw std::invalid_argument("linear density needs |slope| < 2");
  return CovariateLaw(slope);
}

double CovariateLaw::density(double x) const noexcept {
  if (x < 0.0 || x > 1.0) return 0.0;
  return 1.0 + slope_ * (x - 0.5);
}

double CovariateLaw::cdf(double x) const noexcept {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x + 0.5 * slope_ * (x * x - x);
}

double CovariateLaw::inverse_cdf(double u) const noexcept {
  // Root of (s/2) x² + (1 - s/2) x - u = 0 in the cancellation-free form.
  const double b = 1.0 - 0.5 * slope_;
  return std::clamp(2.0 * u / (b + std::sqrt(b * b + 2.0 * slope_ * u)), 0.0, 1.0);
}

TabulatedDistribution link_signal_cdf(const LinkSpec& link, const CovariateLaw& law, std::size_t points) {
  double lo = eval_link(link, law.inverse_cdf(1e-3));
  double hi = eval_link(link, 1.0);
  const double pad = 1e-3 * (hi - lo) + 1e-9 * (1.0 + std::abs(hi));
  lo -= pad;
  hi += pad;
  return TabulatedDistribution::tabulate(lo, hi, points, [&](double z) {
    return law.cdf(link_generalized_inverse(link, z));
  });
}

// ---------------------------------------------------------------------------
// Datasets

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::shuffled:
      return "shuffled";
    case Mode::unlinked:
      return "unlinked";
    case Mode::deconv:
      return "deconv";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  if (text == "shuffled") return Mode::shuffled;
  if (text == "unlinked") return Mode::unlinked;
  if (text == "deconv") return Mode::deconv;
  throw std::invalid_argument("unknown mode '" + std::string(text) + "'");
}

Dataset sample_dataset(Mode mode, std::size_t n, const LinkSpec& link, const NoiseSpec& noise, double sigma,
                       std::uint64_t seed, const CovariateLaw& law) {
  if (n == 0) throw std::invalid_argument("sample size must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be finite and >= 0");
  validate_link(link);

  Dataset data;
  data.mode = mode;
  data.sigma = sigma;
  data.seed = seed;
  data.truth = link;

  auto draw_covariates = [&](CounterRng& rng) {
    std::vector<double> xs(n);
    for (auto& x : xs) x = law.inverse_cdf(rng.uniform());
    return xs;
  };
  auto record = [&](std::string purpose, const CounterRng& rng) {
    data.streams.push_back({std::move(purpose), rng.key(), rng.draws()});
  };

  CounterRng noise_rng(StreamKey::derive(seed, "noise"));
  data.noise.resize(n);
  for (auto& d : data.noise) d = sample_noise(noise, noise_rng);

  if (mode == Mode::shuffled) {
    CounterRng x_rng(StreamKey::derive(seed, "covariates"));
    auto xs = draw_covariates(x_rng);
    data.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) data.y[i] = eval_link(link, xs[i]) + sigma * data.noise[i];
    CounterRng perm_rng(StreamKey::derive(seed, "permutation"));
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(data.y[i], data.y[perm_rng.below(i + 1)]);
    }
    std::sort(xs.begin(), xs.end());
    data.x_ordered = std::move(xs);
    record("covariates", x_rng);
    record("noise", noise_rng);
    record("permutation", perm_rng);
    return data;
  }

  CounterRng signal_rng(StreamKey::derive(seed, "response_covariates"));
  const auto hidden = draw_covariates(signal_rng);
  data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) data.y[i] = eval_link(link, hidden[i]) + sigma * data.noise[i];

  if (mode == Mode::unlinked) {
    CounterRng x_rng(StreamKey::derive(seed, "covariates"));
    auto xs = draw_covariates(x_rng);
    std::sort(xs.begin(), xs.end());
    data.x_ordered = std::move(xs);
    record("covariates", x_rng);
  }
  record("response_covariates", signal_rng);
  record("noise", noise_rng);
  return data;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  csv::Table table;
  table.header = {"mode", "index", "x", "y"};
  const std::string mode(to_string(data.mode));
  table.rows.reserve(data.y.size());
  for (std::size_t i = 0; i < data.y.size(); ++i) {
    std::string x = data.mode == Mode::deconv ? std::string() : csv::format_double(data.x_ordered[i]);
    table.rows.push_back({mode, std::to_string(i), std::move(x), csv::format_double(data.y[i])});
  }
  csv::write(out, table);
}

Observations read_dataset_csv(std::istream& in) {
  const auto table = csv::read(in);
  const auto mode_col = table.column("mode");
  const auto x_col = table.column("x");
  const auto y_col = table.column("y");
  if (table.rows.empty()) throw std::runtime_error("dataset CSV has no rows");
  Observations obs;
  obs.mode = parse_mode(table.rows.front()[mode_col]);
  for (const auto& row : table.rows) {
    if (parse_mode(row[mode_col]) != obs.mode) throw std::runtime_error("dataset CSV mixes modes");
    obs.y.push_back(csv::parse_double(row[y_col]));
    if (obs.mode != Mode::deconv) obs.x.push_back(csv::parse_double(row[x_col]));
  }
  return obs;
}

}  // namespace shufreg
