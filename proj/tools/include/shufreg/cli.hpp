#pragma once

// Command-line front end: subcommand dispatch, CSV persistence and SVG plots.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "shufreg/csv.hpp"
#include "shufreg/experiments.hpp"

namespace shufreg::cli {

/// Default seed of every subcommand.
inline constexpr std::uint64_t kDefaultSeed = 1;

/// Runs one invocation; `args` excludes the program name. Returns 0 on
/// success, 2 on a usage error (usage text goes to `err`), 1 on a runtime
/// failure.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

/// Writes a homogeneous record table as CSV, header first. Throws
/// std::runtime_error naming the path on I/O failure.
void write_records(const std::filesystem::path& path, const csv::Table& records);

/// Standalone SVG chart of one series: x = log10(n), y = mean with stderr
/// whiskers. Byte-identical for identical input. Throws std::invalid_argument
/// for an empty series.
std::string plot_svg(std::span<const ConjectureRow> series, const std::string& title);

/// One SVG per C value, named conjecture_C<C>.svg; returns the paths written.
std::vector<std::filesystem::path> render_plots(std::span<const ConjectureRow> table, double c,
                                                const std::filesystem::path& dir);

/// Quick invariant suites over every module; one line per suite on `out`.
/// Returns true iff all pass.
bool run_selftest(std::ostream& out);

}  // namespace shufreg::cli
