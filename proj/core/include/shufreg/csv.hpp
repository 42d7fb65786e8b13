#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace shufreg::csv {

/// Shortest round-trippable text for a double: 17 significant digits, "%.17g".
std::string format_double(double value);

/// Parses a double written by format_double (or any strtod-compatible text).
/// Throws std::invalid_argument on trailing garbage or empty input.
double parse_double(std::string_view text);

/// A header plus string-valued rows. Homogeneous: every row has as many fields
/// as the header.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::size_t column(std::string_view name) const;
};

/// RFC-4180 style: fields containing a comma, quote, CR or LF are quoted, with
/// embedded quotes doubled. Lines end with '\n', including the last one.
void write(std::ostream& out, const Table& table);

/// Writes to `path`, creating parent directories. Throws std::runtime_error
/// naming the path on I/O failure.
void write_file(const std::filesystem::path& path, const Table& table);

/// Reads an RFC-4180 table. Lines starting with '#' before the header are
/// skipped (metadata). Throws std::runtime_error on ragged rows.
Table read(std::istream& in);
Table read_file(const std::filesystem::path& path);

}  // namespace shufreg::csv
