#include "trackforge/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "trackforge/checkpoint.hpp"

namespace trackforge {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  const double a = std::abs(v);
  if (a != 0.0 && (a >= 1e5 || a < 1e-2)) {
    std::snprintf(buf, sizeof(buf), "%.2g", v);
  } else {
    std::snprintf(buf, sizeof(buf), "%.6g", v);
  }
  return buf;
}

// Roughly five "nice" ticks covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return out;
}

}  // namespace

std::string svg_escape(const std::string& s) {
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

std::vector<double> moving_average(const std::vector<double>& v, int window) {
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sum += v[i];
    if (i >= static_cast<std::size_t>(window)) sum -= v[i - window];
    out[i] = sum / static_cast<double>(std::min<std::size_t>(i + 1, window));
  }
  return out;
}

std::string render_line_chart(const std::vector<PlotSeries>& series, const ChartOptions& o) {
  const double left = 80, right = 20, top = 40, bottom = 60;
  const double pw = o.width - left - right;
  const double ph = o.height - top - bottom;

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  const bool empty = !(x0 <= x1);
  if (empty) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (o.y_min) y0 = *o.y_min;
  if (o.y_max) y1 = *o.y_max;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << o.width << "\" height=\""
      << o.height << "\" viewBox=\"0 0 " << o.width << " " << o.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(o.width / 2.0) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << svg_escape(o.title) << "</text>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (double t : nice_ticks(x0, x1)) {
    svg << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(sx(t))
        << "\" y2=\"" << num(top + ph) << "\" stroke=\"#e5e5e5\"/>\n";
    svg << "<text x=\"" << num(sx(t)) << "\" y=\"" << num(top + ph + 16)
        << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (double t : nice_ticks(y0, y1)) {
    svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << num(left + pw)
        << "\" y2=\"" << num(sy(t)) << "\" stroke=\"#e5e5e5\"/>\n";
    svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(sy(t) + 4)
        << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  svg << "</g>\n";
  svg << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(o.height - 16)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << svg_escape(o.x_label) << "</text>\n";
  svg << "<text transform=\"translate(18," << num(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << svg_escape(o.y_label) << "</text>\n";

  for (const auto& s : series) {
    std::ostringstream pts;
    std::size_t count = 0;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      pts << (count++ ? " " : "") << num(sx(s.x[i])) << "," << num(sy(s.y[i]));
    }
    if (count == 0) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\""
        << num(s.stroke_width) << "\" stroke-opacity=\"" << num(s.opacity) << "\" points=\""
        << pts.str() << "\"><title>" << svg_escape(s.label) << "</title></polyline>\n";
  }
  double ly = top + 14;
  for (const auto& s : series) {
    if (s.label.empty()) continue;
    svg << "<line x1=\"" << num(left + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
        << num(left + 30) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << num(left + 36) << "\" y=\"" << num(ly)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << svg_escape(s.label) << "</text>\n";
    ly += 16;
  }
  if (empty) {
    svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(top + ph / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" fill=\"#999\">no data</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_training_plots(const std::vector<MetricsRow>& rows, const std::filesystem::path& dir) {
  PlotSeries reward{"mean episodic reward", {}, {}, "#1f77b4", 1.0, 0.45};
  PlotSeries success{"moving success rate", {}, {}, "#2ca02c", 2.0, 1.0};
  for (const auto& r : rows) {
    if (r.mean_ep_reward) {
      reward.x.push_back(static_cast<double>(r.step));
      reward.y.push_back(*r.mean_ep_reward);
    }
    if (r.success_rate) {
      success.x.push_back(static_cast<double>(r.step));
      success.y.push_back(*r.success_rate);
    }
  }
  const int window = std::max<int>(1, static_cast<int>(reward.y.size() / 10));
  PlotSeries smooth{"moving average (" + std::to_string(window) + " updates)", reward.x,
                    moving_average(reward.y, window), "#d62728", 2.0, 1.0};
  std::filesystem::create_directories(dir);
  ChartOptions ro;
  ro.title = "Episodic reward";
  ro.x_label = "environment steps";
  ro.y_label = "episodic reward";
  write_file_atomic(dir / "reward_curve.svg", render_line_chart({reward, smooth}, ro));
  ChartOptions so;
  so.title = "Evaluation success rate";
  so.x_label = "environment steps";
  so.y_label = "success rate";
  so.y_min = 0.0;
  so.y_max = 1.0;
  write_file_atomic(dir / "success_rate.svg", render_line_chart({success}, so));
}

}  // namespace trackforge
