#ifndef CBS_PLOT_HPP
#define CBS_PLOT_HPP

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "cbs/csv.hpp"

namespace cbs {

struct PlotOptions {
  /// Vertical reference lines (x positions in mu units).
  std::vector<double> rules;
  std::string title = "Empirical probability of error";
};

namespace detail {

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

} // namespace detail

/// Standalone SVG 1.1 chart of error curves read from a harness CSV: one
/// data polyline and one shaded CI band per strategy, plus the capped upper
/// bound and the testing lower bound as overlay polylines.
inline std::string render_svg(const std::vector<CsvRow>& rows, const PlotOptions& options = {}) {
  if (rows.empty()) throw Error(ErrorCode::MalformedCsv, "nothing to plot");

  constexpr double width = 720, height = 460;
  constexpr double left = 70, right = 170, top = 40, bottom = 60;
  constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
  constexpr std::array<const char*, 4> palette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

  std::vector<std::string> strategies;
  for (const auto& r : rows)
    if (std::find(strategies.begin(), strategies.end(), r.strategy) == strategies.end())
      strategies.push_back(r.strategy);

  double x_min = rows.front().mu, x_max = rows.front().mu;
  for (const auto& r : rows) {
    x_min = std::min(x_min, r.mu);
    x_max = std::max(x_max, r.mu);
  }
  for (double x : options.rules) x_max = std::max(x_max, x);
  if (x_max <= x_min) x_max = x_min + 1.0;

  auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto sy = [&](double y) { return top + (1.0 - std::clamp(y, 0.0, 1.0)) * plot_h; };
  auto pt = [&](double x, double y) { return detail::fixed2(sx(x)) + "," + detail::fixed2(sy(y)); };

  auto rows_of = [&](const std::string& name) {
    std::vector<CsvRow> out;
    for (const auto& r : rows)
      if (r.strategy == name) out.push_back(r);
    std::sort(out.begin(), out.end(), [](const CsvRow& a, const CsvRow& b) { return a.mu < b.mu; });
    return out;
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
      << "<text x=\"" << left + plot_w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << options.title
      << "</text>\n";

  // Axes and ticks.
  svg << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\" font-size=\"11\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
      << top + plot_h << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h << "\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double y = k / 5.0;
    svg << "<text x=\"" << left - 8 << "\" y=\"" << detail::fixed2(sy(y) + 4) << "\" text-anchor=\"end\" stroke=\"none\">"
        << detail::fixed2(y) << "</text>\n";
  }
  for (int k = 0; k <= 7; ++k) {
    const double x = x_min + (x_max - x_min) * k / 7.0;
    svg << "<text x=\"" << detail::fixed2(sx(x)) << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\" stroke=\"none\">" << detail::fixed2(x) << "</text>\n";
  }
  svg << "</g>\n"
      << "<text class=\"xlabel\" x=\"" << left + plot_w / 2 << "\" y=\"" << height - 16
      << "\" text-anchor=\"middle\" font-size=\"14\">mu</text>\n"
      << "<text class=\"ylabel\" x=\"18\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" font-size=\"14\""
      << " transform=\"rotate(-90 18 " << top + plot_h / 2 << ")\">P_e</text>\n";

  for (double x : options.rules)
    svg << "<line class=\"threshold\" x1=\"" << detail::fixed2(sx(x)) << "\" y1=\"" << top << "\" x2=\""
        << detail::fixed2(sx(x)) << "\" y2=\"" << top + plot_h
        << "\" stroke=\"gray\" stroke-dasharray=\"4,3\" data-mu=\"" << format_real(x) << "\"/>\n";

  double legend_y = top + 10;
  auto legend = [&](const std::string& label, const char* color, const char* dash) {
    svg << "<line x1=\"" << left + plot_w + 15 << "\" y1=\"" << legend_y << "\" x2=\"" << left + plot_w + 40
        << "\" y2=\"" << legend_y << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash << "/>\n"
        << "<text x=\"" << left + plot_w + 46 << "\" y=\"" << legend_y + 4 << "\" font-size=\"12\">" << label
        << "</text>\n";
    legend_y += 20;
  };

  for (std::size_t k = 0; k < strategies.size(); ++k) {
    const auto series = rows_of(strategies[k]);
    const char* color = palette[k % palette.size()];
    std::string band;
    for (const auto& r : series) band += pt(r.mu, r.ci_hi) + " ";
    for (auto it = series.rbegin(); it != series.rend(); ++it) band += pt(it->mu, it->ci_lo) + " ";
    band.pop_back();
    svg << "<polygon class=\"ci-band\" points=\"" << band << "\" fill=\"" << color
        << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";

    std::string line;
    for (const auto& r : series) line += pt(r.mu, r.p_err) + " ";
    line.pop_back();
    svg << "<polyline class=\"data\" data-strategy=\"" << strategies[k] << "\" points=\"" << line
        << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    legend(strategies[k], color, "");
  }

  const auto reference = rows_of(strategies.front());
  std::string upper, lower;
  for (const auto& r : reference) {
    upper += pt(r.mu, r.bound_upper) + " ";
    lower += pt(r.mu, r.bound_lower) + " ";
  }
  upper.pop_back();
  lower.pop_back();
  svg << "<polyline class=\"overlay\" data-bound=\"upper\" points=\"" << upper
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"6,3\"/>\n"
      << "<polyline class=\"overlay\" data-bound=\"lower\" points=\"" << lower
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"2,2\"/>\n";
  legend("upper bound", "black", " stroke-dasharray=\"6,3\"");
  legend("lower bound", "black", " stroke-dasharray=\"2,2\"");

  svg << "</svg>\n";
  return svg.str();
}

} // namespace cbs

#endif // CBS_PLOT_HPP
