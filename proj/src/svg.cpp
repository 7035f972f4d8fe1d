#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "tmem/errors.hpp"
#include "tmem/scenario_io.hpp"

namespace tmem {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 180.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> velocity_view_columns(const Trace& trace) {
  std::vector<std::string> cols;
  for (std::size_t i = 0; i < trace.n_agents; ++i) cols.push_back(fmt::format("agent{}_vel", i));
  cols.push_back("rms");
  return cols;
}

std::vector<std::string> distance_view_columns(const Trace& trace) {
  std::vector<std::string> cols;
  for (std::size_t k = 0; k < trace.pairs.size(); ++k) {
    if (trace.pairs[k].declared) cols.push_back(fmt::format("pair{}_d", k));
  }
  if (cols.empty() && !trace.pairs.empty()) cols.push_back("pair0_d");
  return cols;
}

std::string render_svg(const Trace& trace, const std::vector<std::string>& columns, std::string_view title) {
  if (columns.empty()) throw ConfigError("render_svg: no columns selected");
  std::vector<std::size_t> idx;
  for (const auto& name : columns) idx.push_back(trace.column_index(name));

  const std::size_t rows = trace.rows();
  double t0 = rows ? trace.time(0) : 0.0;
  double t1 = rows ? trace.time(rows - 1) : 1.0;
  if (!(t1 > t0)) t1 = t0 + 1.0;
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c : idx) {
      const double v = trace.at(r, c);
      if (!std::isfinite(v)) continue;
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  }
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double t) { return kLeft + (t - t0) / (t1 - t0) * plot_w; };
  auto sy = [&](double v) { return kTop + (hi - v) / (hi - lo) * plot_h; };

  std::string svg;
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight, kWidth, kHeight);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    svg += fmt::format("<text x=\"{:.1f}\" y=\"22\" font-size=\"15\">{}</text>\n", kLeft, escape(title));
  }

  // axes and ticks
  svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
                     kLeft, kTop, plot_w, plot_h);
  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double t = t0 + (t1 - t0) * i / kTicks;
    const double v = lo + (hi - lo) * i / kTicks;
    svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#ddd\"/>\n", sx(t),
                       kTop, kTop + plot_h);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.4g}</text>\n", sx(t),
                       kTop + plot_h + 18, t);
    svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#ddd\"/>\n", kLeft,
                       sy(v), kLeft + plot_w);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.4g}</text>\n", kLeft - 6, sy(v) + 4, v);
  }
  svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">t, s</text>\n", kLeft + plot_w / 2,
                     kHeight - 10);

  // series
  for (std::size_t s = 0; s < idx.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"", color);
    for (std::size_t r = 0; r < rows; ++r) {
      const double v = trace.at(r, idx[s]);
      if (!std::isfinite(v)) continue;
      svg += fmt::format("{:.2f},{:.2f} ", sx(trace.time(r)), sy(v));
    }
    svg += "\"/>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(s);
    svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                       kLeft + plot_w + 12, ly, kLeft + plot_w + 36, color);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", kLeft + plot_w + 42, ly + 4, escape(columns[s]));
  }

  // event markers
  for (const Event& e : trace.events) {
    const double x = sx(e.t);
    const char* color = e.kind == EventKind::Coupled ? "#2ca02c" : "#d62728";
    const char* label = e.kind == EventKind::Coupled ? "coupled" : "uncoupled";
    svg += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"{3}\" stroke-dasharray=\"4 3\"/>\n",
        x, kTop, kTop + plot_h, color);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" fill=\"{}\" font-size=\"10\">{} pair{} t={:.3f}</text>\n",
                       x + 3, kTop + 12, color, label, e.pair, e.t);
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace tmem
