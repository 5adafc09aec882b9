#include "bagged_eb/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace beb::svg {

namespace {

constexpr double kPanelW = 320, kPanelH = 260, kMarginL = 60, kMarginR = 15, kMarginT = 30,
                 kMarginB = 45;
constexpr const char* kPalette[] = {"#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo <= 0.0) {
      const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
      lo -= pad;
      hi += pad;
    }
  }
};

struct Frame {
  double x0, y0;  // panel origin
  Range xr, yr;
  double px(double x) const {
    return x0 + kMarginL + (x - xr.lo) / (xr.hi - xr.lo) * (kPanelW - kMarginL - kMarginR);
  }
  double py(double y) const {
    return y0 + kPanelH - kMarginB - (y - yr.lo) / (yr.hi - yr.lo) * (kPanelH - kMarginT - kMarginB);
  }
};

void axes(std::ostringstream& o, const Frame& f, const std::string& title) {
  const double l = f.x0 + kMarginL, r = f.x0 + kPanelW - kMarginR;
  const double t = f.y0 + kMarginT, b = f.y0 + kPanelH - kMarginB;
  o << "<rect x='" << num(l) << "' y='" << num(t) << "' width='" << num(r - l) << "' height='"
    << num(b - t) << "' fill='none' stroke='#444'/>\n";
  o << "<text x='" << num((l + r) / 2) << "' y='" << num(f.y0 + 18)
    << "' text-anchor='middle' font-size='13'>" << escape(title) << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.xr.lo + (f.xr.hi - f.xr.lo) * k / 4.0;
    const double yv = f.yr.lo + (f.yr.hi - f.yr.lo) * k / 4.0;
    o << "<text x='" << num(f.px(xv)) << "' y='" << num(b + 14)
      << "' text-anchor='middle' font-size='10'>" << num(xv) << "</text>\n";
    o << "<text x='" << num(l - 4) << "' y='" << num(f.py(yv) + 3)
      << "' text-anchor='end' font-size='10'>" << num(yv) << "</text>\n";
  }
}

std::string open_svg(double w, double h) {
  return "<svg xmlns='http://www.w3.org/2000/svg' width='" + num(w) + "' height='" + num(h) +
         "' viewBox='0 0 " + num(w) + " " + num(h) + "' font-family='sans-serif'>\n" +
         "<rect width='100%' height='100%' fill='white'/>\n";
}

}  // namespace

std::string line_chart(std::span<const LinePanel> panels, const std::string& x_label,
                       const std::string& y_label) {
  const double width = kPanelW * static_cast<double>(std::max<std::size_t>(1, panels.size()));
  const double height = kPanelH + 30;
  std::ostringstream o;
  o << open_svg(width, height);
  std::size_t max_series = 0;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    Frame f{kPanelW * static_cast<double>(p), 0.0, {}, {}};
    for (const auto& s : panels[p].series) {
      for (double x : s.x) f.xr.add(x);
      for (double y : s.y) f.yr.add(y);
    }
    f.xr.finish();
    f.yr.finish();
    axes(o, f, panels[p].title);
    max_series = std::max(max_series, panels[p].series.size());
    for (std::size_t k = 0; k < panels[p].series.size(); ++k) {
      const auto& s = panels[p].series[k];
      const char* color = kPalette[k % std::size(kPalette)];
      o << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        o << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i])) << ' ';
      o << "'/>\n";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        o << "<circle cx='" << num(f.px(s.x[i])) << "' cy='" << num(f.py(s.y[i]))
          << "' r='2.5' fill='" << color << "'/>\n";
    }
  }
  if (!panels.empty()) {
    for (std::size_t k = 0; k < panels.front().series.size(); ++k)
      o << "<text x='" << num(10 + 110.0 * static_cast<double>(k)) << "' y='" << num(height - 8)
        << "' font-size='11' fill='" << kPalette[k % std::size(kPalette)] << "'>"
        << escape(panels.front().series[k].name) << "</text>\n";
  }
  o << "<text x='" << num(width - 10) << "' y='" << num(height - 8)
    << "' text-anchor='end' font-size='11'>x: " << escape(x_label) << ", y: " << escape(y_label)
    << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

Histogram make_histogram(std::span<const double> values, std::size_t bins) {
  Histogram h;
  if (bins == 0) bins = 1;
  Range r;
  for (double v : values) r.add(v);
  r.finish();
  const double width = (r.hi - r.lo) / static_cast<double>(bins);
  for (std::size_t k = 0; k <= bins; ++k) h.edges.push_back(r.lo + width * static_cast<double>(k));
  h.edges.back() = r.hi;
  h.counts.assign(bins, 0);
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    auto k = static_cast<std::size_t>(std::floor((v - r.lo) / width));
    ++h.counts[std::min(k, bins - 1)];
  }
  return h;
}

std::string histogram_chart(std::span<const HistogramPanel> panels) {
  const double width = kPanelW * static_cast<double>(std::max<std::size_t>(1, panels.size()));
  std::ostringstream o;
  o << open_svg(width, kPanelH);
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& hp = panels[p];
    Frame f{kPanelW * static_cast<double>(p), 0.0, {}, {}};
    f.xr.add(hp.hist.edges.front());
    f.xr.add(hp.hist.edges.back());
    if (hp.marker) f.xr.add(*hp.marker);
    f.xr.finish();
    f.yr.add(0.0);
    for (auto c : hp.hist.counts) f.yr.add(static_cast<double>(c));
    f.yr.finish();
    axes(o, f, hp.title);
    for (std::size_t k = 0; k < hp.hist.counts.size(); ++k) {
      const double x0 = f.px(hp.hist.edges[k]), x1 = f.px(hp.hist.edges[k + 1]);
      const double y1 = f.py(static_cast<double>(hp.hist.counts[k])), y0 = f.py(0.0);
      o << "<rect x='" << num(x0) << "' y='" << num(y1) << "' width='" << num(std::max(0.0, x1 - x0))
        << "' height='" << num(y0 - y1) << "' fill='#9ecae1' stroke='#3182bd' stroke-width='0.5'/>\n";
    }
    if (hp.marker) {
      const double x = f.px(*hp.marker);
      o << "<line x1='" << num(x) << "' x2='" << num(x) << "' y1='" << num(f.py(f.yr.hi))
        << "' y2='" << num(f.py(f.yr.lo)) << "' stroke='#d62728' stroke-width='2'/>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

std::string mse_chart(const SimResult& result) {
  std::vector<LinePanel> panels;
  const std::string truth_name = result.config.model == ModelKind::FH ? "A" : "nu";
  for (double truth : result.config.hyper_grid) {
    LinePanel panel;
    panel.title = truth_name + " = " + num(truth);
    std::map<std::pair<int, std::size_t>, Series> by_estimator;  // EB first, then BEB by B
    for (const auto& row : result.rows) {
      if (row.truth != truth) continue;
      const auto key = std::make_pair(row.estimator == "EB" ? 0 : 1, row.B);
      auto& s = by_estimator[key];
      s.name = row.estimator == "EB" ? "EB" : "BEB (B=" + std::to_string(row.B) + ")";
      s.x.push_back(static_cast<double>(row.m));
      s.y.push_back(row.mse);
    }
    for (auto& [key, s] : by_estimator) panel.series.push_back(std::move(s));
    panels.push_back(std::move(panel));
  }
  return line_chart(panels, "m", "MSE");
}

std::string param_histograms(const ParamTable& table, std::size_t bins) {
  std::vector<HistogramPanel> panels;
  for (std::size_t j = 0; j < table.names.size(); ++j) {
    std::vector<double> col;
    for (const auto& r : table.rows) col.push_back(r[j]);
    panels.push_back({table.names[j], make_histogram(col, bins), table.ml[j]});
  }
  return histogram_chart(panels);
}

}  // namespace beb::svg
