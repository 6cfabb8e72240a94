#include "trackforge/replay.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "trackforge/checkpoint.hpp"
#include "trackforge/frenet.hpp"
#include "trackforge/plot.hpp"

namespace trackforge {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// Blue (slow) to red (fast).
std::string speed_color(double f) {
  f = std::clamp(f, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(40 + 215 * f));
  const int g = static_cast<int>(std::lround(90 + 80 * (1.0 - std::abs(2.0 * f - 1.0))));
  const int b = static_cast<int>(std::lround(230 - 200 * f));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::vector<TrajectorySample> parse_trajectory(const std::string& text, const std::string& origin) {
  std::stringstream in(text);
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto header = split_csv(line);
  const bool with_speed = header.size() == 5 && header[4] == "speed";
  if (header.size() < 4 || header[0] != "t" || header[1] != "x" || header[2] != "y" ||
      header[3] != "heading" || (header.size() == 5 && !with_speed) || header.size() > 5) {
    throw Error(ErrorCode::kMalformedFile,
                origin + ":1: expected header t,x,y,heading[,speed]");
  }
  std::vector<TrajectorySample> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kMalformedFile, origin + ":" + std::to_string(lineno) + ": expected " +
                                                 std::to_string(header.size()) + " columns");
    }
    double v[5] = {};
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto* b = cells[i].data();
      const auto* e = b + cells[i].size();
      const auto r = std::from_chars(b, e, v[i]);
      if (r.ec != std::errc() || r.ptr != e || !std::isfinite(v[i])) {
        throw Error(ErrorCode::kMalformedFile,
                    origin + ":" + std::to_string(lineno) + ": bad number '" + cells[i] + "'");
      }
    }
    TrajectorySample s{v[0], v[1], v[2], v[3], std::nullopt};
    if (with_speed) s.speed = v[4];
    out.push_back(s);
  }
  return out;
}

std::vector<TrajectorySample> load_trajectory(const std::filesystem::path& path) {
  return parse_trajectory(read_file(path), path.string());
}

std::string format_trajectory(const std::vector<VehicleState>& states) {
  std::string out = "t,x,y,heading,speed\n";
  char buf[160];
  for (const auto& s : states) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", s.time, s.x, s.y, s.heading,
                  s.speed);
    out += buf;
  }
  return out;
}

ReplayRender render_replay(const TrackMap& track, const std::vector<TrajectorySample>& traj) {
  ReplayRender r;
  const WallPolylines walls = wall_polylines(track);
  const CenterlineIndex index(track, 1e9);

  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  auto grow = [&](Vec2 p) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  };
  for (const auto& p : walls.left) grow(p);
  for (const auto& p : walls.right) grow(p);
  for (const auto& s : traj) grow({s.x, s.y});
  const double margin = 2.0;
  x0 -= margin, y0 -= margin, x1 += margin, y1 += margin;
  const double scale = 900.0 / std::max(x1 - x0, y1 - y0);
  const double w = (x1 - x0) * scale;
  const double h = (y1 - y0) * scale;
  auto px = [&](Vec2 p) { return num((p.x - x0) * scale) + "," + num((y1 - p.y) * scale); };
  auto poly = [&](const std::vector<Vec2>& pts) {
    std::string s;
    for (std::size_t i = 0; i < pts.size(); ++i) s += (i ? " " : "") + px(pts[i]);
    return s;
  };

  std::vector<double> speeds(traj.size(), 0.0);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj[i].speed) {
      speeds[i] = *traj[i].speed;
    } else if (i > 0) {
      const double dt = traj[i].t - traj[i - 1].t;
      const double d = std::hypot(traj[i].x - traj[i - 1].x, traj[i].y - traj[i - 1].y);
      speeds[i] = dt > 0.0 ? d / dt : 0.0;
    }
  }
  double vmax = 1e-9;
  for (double v : speeds) vmax = std::max(vmax, v);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" viewBox=\"0 0 " << num(w) << " " << num(h) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<polygon fill=\"#f1f1f1\" fill-rule=\"evenodd\" stroke=\"none\" points=\""
      << poly(walls.left) << " " << poly(walls.right) << "\"/>\n";
  svg << "<polyline fill=\"none\" stroke=\"#222\" stroke-width=\"2\" points=\"" << poly(walls.left)
      << "\"/>\n";
  svg << "<polyline fill=\"none\" stroke=\"#222\" stroke-width=\"2\" points=\"" << poly(walls.right)
      << "\"/>\n";
  svg << "<polyline fill=\"none\" stroke=\"#999\" stroke-width=\"1\" stroke-dasharray=\"6,4\" "
         "points=\""
      << poly(track.centerline) << "\"/>\n";
  for (const auto& o : track.obstacles) {
    svg << "<polygon fill=\"#555\" stroke=\"#000\" stroke-width=\"1\" points=\"" << poly(o.vertices)
        << "\"/>\n";
  }
  const Vec2 spawn{track.spawn.x, track.spawn.y};
  svg << "<circle cx=\"" << num((spawn.x - x0) * scale) << "\" cy=\"" << num((y1 - spawn.y) * scale)
      << "\" r=\"4\" fill=\"#2ca02c\"/>\n";

  svg << "<g stroke-width=\"2.5\" stroke-linecap=\"round\">\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Vec2 p{traj[i].x, traj[i].y};
    const FrenetPoint f = index.to_frenet(p);
    if (std::abs(f.d) > track.half_width_at(f.s) + 0.5) ++r.outside_samples;
    if (i == 0) continue;
    const Vec2 q{traj[i - 1].x, traj[i - 1].y};
    r.path_length += norm(p - q);
    svg << "<line x1=\"" << num((q.x - x0) * scale) << "\" y1=\"" << num((y1 - q.y) * scale)
        << "\" x2=\"" << num((p.x - x0) * scale) << "\" y2=\"" << num((y1 - p.y) * scale)
        << "\" stroke=\"" << speed_color(speeds[i] / vmax) << "\"/>\n";
  }
  svg << "</g>\n";
  svg << "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">"
      << svg_escape(std::to_string(traj.size()) + " samples, path " + num(r.path_length) +
                    " m, max speed " + num(traj.empty() ? 0.0 : vmax) + " m/s")
      << "</text>\n";
  svg << "</svg>\n";
  r.svg = svg.str();
  return r;
}

}  // namespace trackforge
