#include "core/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gpelab {

namespace {

constexpr double W = 640, H = 420, ML = 80, MR = 150, MT = 40, MB = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

std::string tick(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

}  // namespace

std::string render_svg(const Plot& plot) {
  auto tx = [&](double v) { return plot.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return plot.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return false;
    if (plot.log_x && x <= 0) return false;
    if (plot.log_y && y <= 0) return false;
    return true;
  };
  double x0 = HUGE_VAL, x1 = -HUGE_VAL, y0 = HUGE_VAL, y1 = -HUGE_VAL;
  for (const auto& s : plot.series)
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!usable(s.x[k], s.y[k])) continue;
      x0 = std::min(x0, tx(s.x[k]));
      x1 = std::max(x1, tx(s.x[k]));
      y0 = std::min(y0, ty(s.y[k]));
      y1 = std::max(y1, ty(s.y[k]));
    }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-300) y0 -= 0.5, y1 += 0.5;
  const double padx = 0.05 * (x1 - x0), pady = 0.05 * (y1 - y0);
  x0 -= padx, x1 += padx, y0 -= pady, y1 += pady;
  const double pw = W - ML - MR, ph = H - MT - MB;
  auto px = [&](double v) { return ML + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return MT + ph - (v - y0) / (y1 - y0) * ph; };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) +
                  "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(plot.title) + "</text>\n";
  s += "<rect x=\"" + num(ML) + "\" y=\"" + num(MT) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double vx = x0 + (x1 - x0) * k / 4.0, vy = y0 + (y1 - y0) * k / 4.0;
    const double lx = plot.log_x ? std::pow(10.0, vx) : vx, ly = plot.log_y ? std::pow(10.0, vy) : vy;
    s += "<line x1=\"" + num(px(vx)) + "\" y1=\"" + num(MT + ph) + "\" x2=\"" + num(px(vx)) + "\" y2=\"" +
         num(MT + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(px(vx)) + "\" y=\"" + num(MT + ph + 18) + "\" text-anchor=\"middle\">" + tick(lx) + "</text>\n";
    s += "<line x1=\"" + num(ML - 5) + "\" y1=\"" + num(py(vy)) + "\" x2=\"" + num(ML) + "\" y2=\"" + num(py(vy)) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(ML - 8) + "\" y=\"" + num(py(vy) + 4) + "\" text-anchor=\"end\">" + tick(ly) + "</text>\n";
  }
  s += "<text x=\"" + num(ML + pw / 2) + "\" y=\"" + num(H - 15) + "\" text-anchor=\"middle\">" +
       escape(plot.xlabel + (plot.log_x ? " (log)" : "")) + "</text>\n";
  s += "<text transform=\"translate(18," + num(MT + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
       escape(plot.ylabel + (plot.log_y ? " (log)" : "")) + "</text>\n";

  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const Series& se = plot.series[i];
    const std::string color = kColors[i % 6];
    std::string pts;
    std::string marks;
    for (std::size_t k = 0; k < std::min(se.x.size(), se.y.size()); ++k) {
      if (!usable(se.x[k], se.y[k])) continue;
      const std::string X = num(px(tx(se.x[k]))), Y = num(py(ty(se.y[k])));
      pts += X + "," + Y + " ";
      marks += "<circle cx=\"" + X + "\" cy=\"" + Y + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    if (!pts.empty()) {
      pts.pop_back();
      s += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    }
    s += marks;
    const double ly = MT + 10 + 18 * static_cast<double>(i);
    s += "<line x1=\"" + num(W - MR + 10) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(W - MR + 30) + "\" y2=\"" + num(ly) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(W - MR + 35) + "\" y=\"" + num(ly + 4) + "\">" + escape(se.name) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace gpelab
