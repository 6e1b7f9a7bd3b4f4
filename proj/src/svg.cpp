#include "metacog/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace metacog {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range value_range(const std::vector<double>& values) {
  Range r{std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    r.lo = std::min(r.lo, v);
    r.hi = std::max(r.hi, v);
  }
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    return {0.0, 1.0};
  }
  if (r.hi - r.lo < 1e-12) {
    r.lo -= 0.5;
    r.hi += 0.5;
  }
  return r;
}

void append_panel(std::string& svg, const std::vector<double>& ys,
                  const std::string& label, const std::string& color, double x0,
                  double y0, double width, double height) {
  const Range r = value_range(ys);
  svg += "<rect x='" + fmt(x0) + "' y='" + fmt(y0) + "' width='" + fmt(width) +
         "' height='" + fmt(height) + "' fill='none' stroke='#888' stroke-width='1'/>\n";
  svg += "<text x='" + fmt(x0 + 4) + "' y='" + fmt(y0 + 14) +
         "' font-family='sans-serif' font-size='12' fill='#333'>" + label + "</text>\n";
  svg += "<text x='" + fmt(x0 - 6) + "' y='" + fmt(y0 + 12) +
         "' font-family='sans-serif' font-size='10' fill='#555' text-anchor='end'>" +
         fmt_tick(r.hi) + "</text>\n";
  svg += "<text x='" + fmt(x0 - 6) + "' y='" + fmt(y0 + height) +
         "' font-family='sans-serif' font-size='10' fill='#555' text-anchor='end'>" +
         fmt_tick(r.lo) + "</text>\n";
  if (ys.empty()) return;

  const double n = static_cast<double>(ys.size());
  std::string points;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double fx = (n == 1) ? 0.5 : static_cast<double>(i) / (n - 1.0);
    const double fy = (ys[i] - r.lo) / (r.hi - r.lo);
    const double px = x0 + fx * width;
    const double py = y0 + height - fy * height;
    points += fmt(px) + "," + fmt(py) + " ";
  }
  svg += "<polyline points='" + points + "' fill='none' stroke='" + color +
         "' stroke-width='1.5'/>\n";
  if (ys.size() <= 64) {
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const double fx = (n == 1) ? 0.5 : static_cast<double>(i) / (n - 1.0);
      const double fy = (ys[i] - r.lo) / (r.hi - r.lo);
      svg += "<circle cx='" + fmt(x0 + fx * width) + "' cy='" +
             fmt(y0 + height - fy * height) + "' r='2' fill='" + color + "'/>\n";
    }
  }
}

}  // namespace

std::string dynamics_chart_svg(const std::vector<ControllerOutput>& outputs,
                               const std::string& title) {
  const double panel_w = 640.0;
  const double panel_h = 120.0;
  const double left = 60.0;
  const double top = 40.0;
  const double gap = 26.0;
  const double width = left + panel_w + 20.0;
  const double height = top + 3 * panel_h + 2 * gap + 40.0;

  std::vector<double> vpes, tau, scale;
  vpes.reserve(outputs.size());
  for (const ControllerOutput& o : outputs) {
    vpes.push_back(o.vpes);
    tau.push_back(o.tau);
    scale.push_back(o.scale);
  }

  std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='" + fmt(width) +
                    "' height='" + fmt(height) + "' viewBox='0 0 " + fmt(width) + " " +
                    fmt(height) + "'>\n";
  svg += "<rect width='100%' height='100%' fill='white'/>\n";
  svg += "<text x='" + fmt(left) + "' y='22' font-family='sans-serif' font-size='14' "
         "fill='#111'>" + title + "</text>\n";
  append_panel(svg, vpes, "vpes", "#c0392b", left, top, panel_w, panel_h);
  append_panel(svg, tau, "tau", "#2471a3", left, top + panel_h + gap, panel_w, panel_h);
  append_panel(svg, scale, "scale", "#1e8449", left, top + 2 * (panel_h + gap), panel_w,
               panel_h);
  svg += "<text x='" + fmt(left + panel_w / 2) + "' y='" + fmt(height - 10) +
         "' font-family='sans-serif' font-size='11' fill='#333' "
         "text-anchor='middle'>iteration</text>\n";
  svg += "</svg>\n";
  return svg;
}

std::string grouped_bar_chart_svg(const std::vector<std::string>& group_names,
                                  const std::vector<std::vector<double>>& group_values,
                                  const std::string& title) {
  const double plot_w = 640.0;
  const double plot_h = 300.0;
  const double left = 70.0;
  const double top = 40.0;
  const double width = left + plot_w + 20.0;
  const double height = top + plot_h + 60.0;

  std::vector<double> all;
  for (const auto& g : group_values) {
    all.insert(all.end(), g.begin(), g.end());
  }
  Range r = value_range(all);
  r.lo = std::min(r.lo, 0.0);
  r.hi = std::max(r.hi, 0.0);
  if (r.hi - r.lo < 1e-12) r.hi = r.lo + 1.0;
  auto y_of = [&](double v) { return top + plot_h - (v - r.lo) / (r.hi - r.lo) * plot_h; };

  std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='" + fmt(width) +
                    "' height='" + fmt(height) + "' viewBox='0 0 " + fmt(width) + " " +
                    fmt(height) + "'>\n";
  svg += "<rect width='100%' height='100%' fill='white'/>\n";
  svg += "<text x='" + fmt(left) + "' y='22' font-family='sans-serif' font-size='14' "
         "fill='#111'>" + title + "</text>\n";
  svg += "<rect x='" + fmt(left) + "' y='" + fmt(top) + "' width='" + fmt(plot_w) +
         "' height='" + fmt(plot_h) + "' fill='none' stroke='#888' stroke-width='1'/>\n";
  svg += "<text x='" + fmt(left - 6) + "' y='" + fmt(top + 12) +
         "' font-family='sans-serif' font-size='10' fill='#555' text-anchor='end'>" +
         fmt_tick(r.hi) + "</text>\n";
  svg += "<text x='" + fmt(left - 6) + "' y='" + fmt(top + plot_h) +
         "' font-family='sans-serif' font-size='10' fill='#555' text-anchor='end'>" +
         fmt_tick(r.lo) + "</text>\n";
  svg += "<line x1='" + fmt(left) + "' y1='" + fmt(y_of(0.0)) + "' x2='" +
         fmt(left + plot_w) + "' y2='" + fmt(y_of(0.0)) +
         "' stroke='#bbb' stroke-width='1'/>\n";

  const char* colors[] = {"#2471a3", "#c0392b", "#1e8449", "#9b59b6", "#d68910",
                          "#148f77"};
  const std::size_t n_groups = group_names.size();
  const double group_w = plot_w / std::max<std::size_t>(n_groups, 1);
  for (std::size_t g = 0; g < n_groups; ++g) {
    const std::vector<double>& vals = group_values[g];
    const double gx = left + static_cast<double>(g) * group_w;
    const double bar_w = 0.8 * group_w / std::max<std::size_t>(vals.size(), 1);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double bx = gx + 0.1 * group_w + static_cast<double>(i) * bar_w;
      const double y_val = y_of(vals[i]);
      const double y_zero = y_of(0.0);
      const double by = std::min(y_val, y_zero);
      const double bh = std::abs(y_zero - y_val);
      svg += "<rect x='" + fmt(bx) + "' y='" + fmt(by) + "' width='" +
             fmt(bar_w * 0.9) + "' height='" + fmt(bh) + "' fill='" +
             colors[g % 6] + "'/>\n";
    }
    svg += "<text x='" + fmt(gx + group_w / 2) + "' y='" + fmt(top + plot_h + 18) +
           "' font-family='sans-serif' font-size='11' fill='#333' "
           "text-anchor='middle'>" + group_names[g] + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace metacog
