#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trackforge/common.hpp"

namespace trackforge {

struct Obstacle {
  // Convex, counter-clockwise, world coordinates.
  std::vector<Vec2> vertices;
  // Frenet placement used at generation time.
  double anchor_s = 0.0;
  double anchor_d = 0.0;

  bool operator==(const Obstacle&) const = default;
};

// A closed-loop race track. The centerline repeats its first point as the
// last one, so a track with N segments stores N + 1 points, N + 1
// half-widths and N + 1 cumulative arc lengths.
struct TrackMap {
  std::vector<Vec2> centerline;
  std::vector<double> half_width;
  std::vector<double> cum_s;
  double total_length = 0.0;
  std::vector<Obstacle> obstacles;
  Pose2 spawn;
  std::uint64_t seed = 0;
  double resample_spacing = 0.0;

  std::size_t segment_count() const {
    return centerline.empty() ? 0 : centerline.size() - 1;
  }
  double max_half_width() const;
  // Linear interpolation of the half-width at arc length s (wrapped).
  double half_width_at(double s) const;

  bool operator==(const TrackMap&) const = default;
};

// Builds a TrackMap from an open point list (first point not repeated) and
// per-point half-widths. Spawn is placed at point 0 facing along the first
// segment.
TrackMap make_track(std::vector<Vec2> points, std::vector<double> half_widths,
                    std::uint64_t seed = 0, double resample_spacing = 0.0);

// Counter-clockwise circle of radius `radius` starting at center + (r, 0).
TrackMap make_circle_track(Vec2 center, double radius, double half_width,
                           double spacing);

// Two straights of `straight_length` joined by semicircles of `radius`;
// spawn at the start of the bottom straight, heading +x.
TrackMap make_stadium_track(double straight_length, double radius,
                            double half_width, double spacing);

// Unit normals at each centerline vertex (bisector of the adjacent segment
// normals, pointing left of travel). Size matches centerline; last == first.
std::vector<Vec2> vertex_normals(const std::vector<Vec2>& centerline);

struct WallPolylines {
  std::vector<Vec2> left;   // centerline + half_width * normal
  std::vector<Vec2> right;  // centerline - half_width * normal
};
WallPolylines wall_polylines(const TrackMap& track);

struct ValidationFailure {
  std::string check;
  std::string message;
  std::optional<std::size_t> index;
  std::optional<double> s;
};

struct ValidationReport {
  std::vector<ValidationFailure> failures;
  bool ok() const { return failures.empty(); }
  std::string summary() const;
};

struct ValidationLimits {
  double min_half_width = 0.4;
  double closure_tolerance = 1e-6;
};

ValidationReport validate_track(const TrackMap& track,
                                const ValidationLimits& limits = {});

inline constexpr int kMapFormatVersion = 1;

std::string serialize_map(const TrackMap& track);
// `origin` names the source in diagnostics.
TrackMap parse_map(const std::string& text, const std::string& origin = "<map>");
void save_map(const TrackMap& track, const std::filesystem::path& path);
TrackMap load_map(const std::filesystem::path& path);

// All `*.track.json` files in a directory, sorted by filename.
std::vector<TrackMap> load_track_pool(const std::filesystem::path& dir);

}  // namespace trackforge
