#include "trackforge/track.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "trackforge/geometry.hpp"

namespace trackforge {

using nlohmann::json;

double TrackMap::max_half_width() const {
  double m = 0.0;
  for (double w : half_width) m = std::max(m, w);
  return m;
}

double TrackMap::half_width_at(double s) const {
  if (cum_s.size() < 2 || total_length <= 0.0) return 0.0;
  s = std::fmod(s, total_length);
  if (s < 0.0) s += total_length;
  auto it = std::upper_bound(cum_s.begin(), cum_s.end(), s);
  std::size_t i = static_cast<std::size_t>(it - cum_s.begin());
  i = std::clamp<std::size_t>(i, 1, cum_s.size() - 1) - 1;
  const double len = cum_s[i + 1] - cum_s[i];
  const double u = len > 0.0 ? (s - cum_s[i]) / len : 0.0;
  return half_width[i] + u * (half_width[i + 1] - half_width[i]);
}

TrackMap make_track(std::vector<Vec2> points, std::vector<double> half_widths,
                    std::uint64_t seed, double resample_spacing) {
  if (points.size() < 3 || points.size() != half_widths.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "make_track: need >= 3 points with one half-width each");
  }
  TrackMap t;
  t.seed = seed;
  t.resample_spacing = resample_spacing;
  t.centerline = std::move(points);
  t.centerline.push_back(t.centerline.front());
  t.half_width = std::move(half_widths);
  t.half_width.push_back(t.half_width.front());
  t.cum_s.resize(t.centerline.size());
  t.cum_s[0] = 0.0;
  for (std::size_t i = 1; i < t.centerline.size(); ++i) {
    t.cum_s[i] = t.cum_s[i - 1] + norm(t.centerline[i] - t.centerline[i - 1]);
  }
  t.total_length = t.cum_s.back();
  const Vec2 dir = t.centerline[1] - t.centerline[0];
  t.spawn = {t.centerline[0].x, t.centerline[0].y, std::atan2(dir.y, dir.x)};
  return t;
}

TrackMap make_circle_track(Vec2 center, double radius, double half_width,
                           double spacing) {
  const int n = std::max(
      8, static_cast<int>(std::lround(2.0 * std::numbers::pi * radius / spacing)));
  std::vector<Vec2> pts(n);
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n;
    pts[k] = center + Vec2{radius * std::cos(a), radius * std::sin(a)};
  }
  return make_track(std::move(pts), std::vector<double>(n, half_width), 0,
                    spacing);
}

TrackMap make_stadium_track(double straight_length, double radius,
                            double half_width, double spacing) {
  const int ns = std::max(1, static_cast<int>(std::ceil(straight_length / spacing)));
  const int na =
      std::max(4, static_cast<int>(std::ceil(std::numbers::pi * radius / spacing)));
  std::vector<Vec2> pts;
  for (int k = 0; k < ns; ++k) {
    pts.push_back({straight_length * k / ns, -radius});
  }
  for (int k = 0; k < na; ++k) {
    const double a = -std::numbers::pi / 2 + std::numbers::pi * k / na;
    pts.push_back({straight_length + radius * std::cos(a), radius * std::sin(a)});
  }
  for (int k = 0; k < ns; ++k) {
    pts.push_back({straight_length - straight_length * k / ns, radius});
  }
  for (int k = 0; k < na; ++k) {
    const double a = std::numbers::pi / 2 + std::numbers::pi * k / na;
    pts.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
  const std::size_t n = pts.size();
  return make_track(std::move(pts), std::vector<double>(n, half_width), 0,
                    spacing);
}

std::vector<Vec2> vertex_normals(const std::vector<Vec2>& centerline) {
  const std::size_t n = centerline.size() - 1;  // segment count
  std::vector<Vec2> seg_normals(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = centerline[i + 1] - centerline[i];
    const double len = norm(e);
    seg_normals[i] = len > 0.0 ? perp(e) * (1.0 / len) : Vec2{};
  }
  std::vector<Vec2> out(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 sum = seg_normals[(i + n - 1) % n] + seg_normals[i];
    const double len = norm(sum);
    out[i] = len > 0.0 ? sum * (1.0 / len) : seg_normals[i];
  }
  out[n] = out[0];
  return out;
}

WallPolylines wall_polylines(const TrackMap& track) {
  WallPolylines w;
  const auto normals = vertex_normals(track.centerline);
  w.left.resize(track.centerline.size());
  w.right.resize(track.centerline.size());
  for (std::size_t i = 0; i < track.centerline.size(); ++i) {
    w.left[i] = track.centerline[i] + normals[i] * track.half_width[i];
    w.right[i] = track.centerline[i] - normals[i] * track.half_width[i];
  }
  w.left.back() = w.left.front();
  w.right.back() = w.right.front();
  return w;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& f : failures) {
    os << f.check << ": " << f.message;
    if (f.index) os << " (index " << *f.index << ")";
    if (f.s) os << " (s=" << *f.s << ")";
    os << "\n";
  }
  return os.str();
}

namespace {

void check_self_intersections(const std::vector<Vec2>& closed_pts,
                              const std::vector<double>& cum_s,
                              const std::string& check, const std::string& what,
                              ValidationReport& report) {
  std::span<const Vec2> open(closed_pts.data(), closed_pts.size() - 1);
  for (auto [i, j] : polyline_self_intersections(open, true)) {
    report.failures.push_back(
        {check,
         what + " crosses itself between segments " + std::to_string(i) +
             " and " + std::to_string(j),
         i, cum_s[i]});
  }
}

}  // namespace

ValidationReport validate_track(const TrackMap& t, const ValidationLimits& limits) {
  ValidationReport r;
  const std::size_t n = t.centerline.size();
  if (n < 4 || t.half_width.size() != n || t.cum_s.size() != n) {
    r.failures.push_back({"shape",
                          "centerline, half_width and cum_s must have equal "
                          "length >= 4",
                          std::nullopt, std::nullopt});
    return r;
  }
  if (norm(t.centerline.back() - t.centerline.front()) > limits.closure_tolerance) {
    r.failures.push_back({"closed-loop", "last centerline point differs from first",
                          n - 1, std::nullopt});
  }
  if (t.cum_s[0] != 0.0) {
    r.failures.push_back({"cum-s-origin", "cum_s[0] must be 0", 0, t.cum_s[0]});
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(t.cum_s[i] > t.cum_s[i - 1])) {
      r.failures.push_back(
          {"cum-s-increasing", "cum_s not strictly increasing", i, t.cum_s[i]});
      continue;
    }
    const double chord = norm(t.centerline[i] - t.centerline[i - 1]);
    const double ds = t.cum_s[i] - t.cum_s[i - 1];
    if (std::abs(chord - ds) > 1e-6 * std::max(1.0, ds)) {
      r.failures.push_back({"cum-s-chord",
                            "cum_s increment disagrees with segment length", i,
                            t.cum_s[i]});
    }
  }
  if (std::abs(t.cum_s.back() - t.total_length) >
      1e-9 * std::max(1.0, t.total_length)) {
    r.failures.push_back({"total-length", "cum_s[last] != total_length", n - 1,
                          t.cum_s.back()});
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(t.half_width[i] >= limits.min_half_width) ||
        !std::isfinite(t.half_width[i])) {
      r.failures.push_back({"corridor-width",
                            "half_width " + std::to_string(t.half_width[i]) +
                                " below minimum " +
                                std::to_string(limits.min_half_width),
                            i, t.cum_s[i]});
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (t.centerline[i] == t.centerline[i - 1]) {
      r.failures.push_back({"degenerate-segment",
                            "consecutive centerline points coincide", i - 1,
                            t.cum_s[i - 1]});
    }
  }
  if (!r.ok()) return r;

  check_self_intersections(t.centerline, t.cum_s, "centerline-self-intersection",
                           "centerline", r);
  const WallPolylines walls = wall_polylines(t);
  check_self_intersections(walls.left, t.cum_s, "left-wall-self-intersection",
                           "left wall", r);
  check_self_intersections(walls.right, t.cum_s, "right-wall-self-intersection",
                           "right wall", r);
  for (auto [i, j] : polyline_cross_intersections(walls.left, walls.right)) {
    r.failures.push_back({"wall-crossing",
                          "left wall segment " + std::to_string(i) +
                              " crosses right wall segment " + std::to_string(j),
                          i, t.cum_s[i]});
  }
  // Each corridor cell (between consecutive vertex normals) must keep both
  // walls advancing along the segment direction, otherwise the walls fold.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Vec2 tangent = t.centerline[i + 1] - t.centerline[i];
    if (dot(walls.left[i + 1] - walls.left[i], tangent) <= 0.0 ||
        dot(walls.right[i + 1] - walls.right[i], tangent) <= 0.0) {
      r.failures.push_back({"corridor-fold",
                            "half-width exceeds local curvature radius", i,
                            t.cum_s[i]});
    }
  }
  for (std::size_t k = 0; k < t.obstacles.size(); ++k) {
    if (!is_convex_ccw(t.obstacles[k].vertices)) {
      r.failures.push_back({"obstacle-convexity",
                            "obstacle " + std::to_string(k) +
                                " is not a convex counter-clockwise polygon",
                            k, t.obstacles[k].anchor_s});
    }
  }
  return r;
}

namespace {

json points_to_json(const std::vector<Vec2>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back({p.x, p.y});
  return a;
}

[[noreturn]] void malformed(const std::string& origin, const std::string& what) {
  throw Error(ErrorCode::kMalformedFile, origin + ": " + what);
}

const json& require(const json& obj, const char* field, const std::string& path,
                    const std::string& origin) {
  if (!obj.is_object() || !obj.contains(field)) {
    malformed(origin, "missing field '" + path + field + "'");
  }
  return obj.at(field);
}

double require_number(const json& obj, const char* field, const std::string& path,
                      const std::string& origin) {
  const json& v = require(obj, field, path, origin);
  if (!v.is_number()) malformed(origin, "field '" + path + field + "' must be a number");
  return v.get<double>();
}

std::vector<Vec2> parse_points(const json& arr, const std::string& field,
                               const std::string& origin) {
  if (!arr.is_array()) malformed(origin, "field '" + field + "' must be an array");
  std::vector<Vec2> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& p = arr[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      malformed(origin, "field '" + field + "[" + std::to_string(i) +
                            "]' must be [x, y]");
    }
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

std::vector<double> parse_numbers(const json& arr, const std::string& field,
                                  const std::string& origin) {
  if (!arr.is_array()) malformed(origin, "field '" + field + "' must be an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      malformed(origin, "field '" + field + "[" + std::to_string(i) +
                            "]' must be a number");
    }
    out.push_back(arr[i].get<double>());
  }
  return out;
}

}  // namespace

std::string serialize_map(const TrackMap& t) {
  json j;
  j["version"] = kMapFormatVersion;
  j["seed"] = t.seed;
  j["resample_spacing"] = t.resample_spacing;
  j["total_length"] = t.total_length;
  j["centerline"] = points_to_json(t.centerline);
  j["half_width"] = t.half_width;
  j["cum_s"] = t.cum_s;
  json obs = json::array();
  for (const auto& o : t.obstacles) {
    obs.push_back({{"vertices", points_to_json(o.vertices)},
                   {"anchor", {{"s", o.anchor_s}, {"d", o.anchor_d}}}});
  }
  j["obstacles"] = obs;
  j["spawn"] = {{"x", t.spawn.x}, {"y", t.spawn.y}, {"heading", t.spawn.heading}};
  return j.dump(1) + "\n";
}

TrackMap parse_map(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + upto, '\n');
    malformed(origin, "line " + std::to_string(line) + ": " + e.what());
  }
  const json& version = require(j, "version", "", origin);
  if (!version.is_number_integer()) malformed(origin, "field 'version' must be an integer");
  if (version.get<int>() != kMapFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                origin + ": map version " + std::to_string(version.get<int>()) +
                    ", expected " + std::to_string(kMapFormatVersion));
  }
  TrackMap t;
  const json& seed = require(j, "seed", "", origin);
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    malformed(origin, "field 'seed' must be an integer");
  }
  t.seed = seed.get<std::uint64_t>();
  t.resample_spacing = require_number(j, "resample_spacing", "", origin);
  t.total_length = require_number(j, "total_length", "", origin);
  t.centerline = parse_points(require(j, "centerline", "", origin), "centerline", origin);
  t.half_width = parse_numbers(require(j, "half_width", "", origin), "half_width", origin);
  t.cum_s = parse_numbers(require(j, "cum_s", "", origin), "cum_s", origin);
  const json& obs = require(j, "obstacles", "", origin);
  if (!obs.is_array()) malformed(origin, "field 'obstacles' must be an array");
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const std::string path = "obstacles[" + std::to_string(k) + "].";
    Obstacle o;
    o.vertices = parse_points(require(obs[k], "vertices", path, origin),
                              path + "vertices", origin);
    if (obs[k].contains("anchor")) {
      const json& a = obs[k]["anchor"];
      o.anchor_s = require_number(a, "s", path + "anchor.", origin);
      o.anchor_d = require_number(a, "d", path + "anchor.", origin);
    }
    t.obstacles.push_back(std::move(o));
  }
  const json& spawn = require(j, "spawn", "", origin);
  t.spawn = {require_number(spawn, "x", "spawn.", origin),
             require_number(spawn, "y", "spawn.", origin),
             require_number(spawn, "heading", "spawn.", origin)};

  ValidationLimits limits;
  limits.min_half_width = 0.0;
  const ValidationReport report = validate_track(t, limits);
  if (!report.ok()) {
    throw Error(ErrorCode::kInvariantViolation,
                origin + ": track invariants violated:\n" + report.summary());
  }
  return t;
}

void save_map(const TrackMap& track, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << serialize_map(track);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

TrackMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_map(ss.str(), path.string());
}

std::vector<TrackMap> load_track_pool(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "track directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 11 &&
        name.ends_with(".track.json")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<TrackMap> pool;
  pool.reserve(files.size());
  for (const auto& f : files) pool.push_back(load_map(f));
  return pool;
}

}  // namespace trackforge
