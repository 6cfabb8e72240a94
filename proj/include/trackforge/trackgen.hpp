#pragma once

#include <array>
#include <cstdint>

#include "trackforge/track.hpp"

namespace trackforge {

struct TrackGenConfig {
  int control_point_count = 12;
  double radius_mean = 18.0;
  double radius_jitter = 6.0;
  std::array<double, 2> width_range{1.6, 3.4};  // half-width, meters
  double resample_spacing = 0.25;
  std::array<int, 2> obstacle_count_range{0, 6};
  std::array<double, 2> obstacle_size_range{0.2, 0.8};
  // Vehicle width (0.3 m) + 0.5 m margin.
  double min_passable_width = 0.8;
  // Obstacles keep at least this much arc length clear of the spawn point.
  double spawn_clearance = 0.5;
  // Probability that a generated loop is traversed clockwise.
  double reverse_probability = 0.5;
  int max_retries = 64;

  void validate() const;
};

// Closed loop through jittered radial control points, interpolated with a
// periodic cubic spline and resampled at uniform arc length. Deterministic
// in (seed, config); never places obstacles.
TrackMap generate_track(std::uint64_t seed, const TrackGenConfig& config);

// Adds obstacles to an obstacle-free track. Deterministic in (seed, config).
TrackMap place_obstacles(const TrackMap& track, std::uint64_t seed,
                         const TrackGenConfig& config);

// generate_track followed by place_obstacles on a derived seed.
TrackMap generate_track_with_obstacles(std::uint64_t seed,
                                       const TrackGenConfig& config);

// Convex obstacle outline whose width in every direction is at least
// `size`: a triangle, rectangle or decagon, rotated by `rotation`.
std::vector<Vec2> obstacle_shape(int kind, double size, double aspect,
                                 double rotation, Vec2 center);

}  // namespace trackforge
