#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "shufreg/cli.hpp"

namespace shufreg::cli {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 24.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 56.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Range {
  double lo;
  double hi;
};

Range padded(double lo, double hi) {
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
    const double pad = std::max(0.5, 0.05 * std::abs(hi));
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string plot_svg(std::span<const ConjectureRow> series, const std::string& title) {
  if (series.empty()) throw std::invalid_argument("cannot plot an empty series");
  std::vector<ConjectureRow> rows(series.begin(), series.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.n < b.n; });

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& r : rows) {
    const double x = std::log10(static_cast<double>(r.n));
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, r.mean - r.stderr_);
    ymax = std::max(ymax, r.mean + r.stderr_);
  }
  const Range xr = padded(xmin, xmax);
  const Range yr = padded(ymin, ymax);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
       "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) + "\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
       "</text>\n";

  // Axes and ticks.
  s += "<g stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" +
       num(kTop + ph) + "\"/>\n";
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(kTop + ph) +
       "\"/>\n";
  s += "</g>\n<g text-anchor=\"middle\">\n";
  for (double t = std::ceil(xr.lo * 2.0) / 2.0; t <= xr.hi + 1e-12; t += 0.5) {
    s += "<line x1=\"" + num(px(t)) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(px(t)) + "\" y2=\"" +
         num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(px(t)) + "\" y=\"" + num(kTop + ph + 18) + "\">" + label(t) + "</text>\n";
  }
  s += "</g>\n<g text-anchor=\"end\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = yr.lo + (yr.hi - yr.lo) * k / 4.0;
    s += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(py(v)) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
         num(py(v)) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(py(v) + 4) + "\">" + label(v) + "</text>\n";
  }
  s += "</g>\n";
  s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 12) +
       "\" text-anchor=\"middle\">value of n (in log scale with base 10)</text>\n";
  s += "<text x=\"16\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num(kTop + ph / 2) + ")\">value of expectation approximated by averaging</text>\n";

  // Series.
  s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) s += ' ';
    s += num(px(std::log10(static_cast<double>(rows[i].n)))) + "," + num(py(rows[i].mean));
  }
  s += "\"/>\n<g stroke=\"#1f77b4\" fill=\"#1f77b4\">\n";
  for (const auto& r : rows) {
    const double x = px(std::log10(static_cast<double>(r.n)));
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(py(r.mean - r.stderr_)) + "\" x2=\"" + num(x) + "\" y2=\"" +
         num(py(r.mean + r.stderr_)) + "\"/>\n";
    s += "<circle cx=\"" + num(x) + "\" cy=\"" + num(py(r.mean)) + "\" r=\"2.5\"/>\n";
  }
  s += "</g>\n</svg>\n";
  return s;
}

std::vector<std::filesystem::path> render_plots(std::span<const ConjectureRow> table, double c,
                                                const std::filesystem::path& dir) {
  if (table.empty()) throw std::invalid_argument("cannot plot an empty table");
  // Keep the first-seen order of C values.
  std::vector<double> order;
  std::map<double, std::vector<ConjectureRow>> by_c;
  for (const auto& r : table) {
    if (!by_c.contains(r.C)) order.push_back(r.C);
    by_c[r.C].push_back(r);
  }
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (double C : order) {
    const auto path = dir / ("conjecture_C" + label(C) + ".svg");
    std::ofstream f(path, std::ios::binary);
    f << plot_svg(by_c[C], "C = " + label(C) + ", c = " + label(c));
    if (!f) throw std::runtime_error("cannot write plot " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace shufreg::cli
