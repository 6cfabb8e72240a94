#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trackforge/common.hpp"
#include "trackforge/geometry.hpp"
#include "trackforge/track.hpp"
#include "trackforge/vehicle.hpp"

namespace trackforge {

struct CenterlineSegment {
  Vec2 start;
  Vec2 tangent;  // unit
  Vec2 normal;   // unit, tangent rotated +90 degrees
  double length = 0.0;
  double s0 = 0.0;
};

struct FrenetPoint {
  double s = 0.0;
  double d = 0.0;  // positive left of travel
};

struct FrenetVelocity {
  double v_s = 0.0;
  double v_d = 0.0;
};

struct FrenetPose {
  double s = 0.0;
  double d = 0.0;
  double v_s = 0.0;
  double v_d = 0.0;
};

// Arc-length frame over a closed polyline centerline.
//
// The frame is piecewise: segment i is the cell swept between the vertex
// normals at its two endpoints, and a point inside it has coordinates
//   p = P_i + u*E_i + d*(N_i + u*(N_{i+1} - N_i)),   s = s0_i + u*len_i
// with E_i the segment vector and N the unit vertex normals. Cells tile the
// corridor without gaps or overlaps while |d| stays below the local
// curvature radius, which keeps to_frenet and from_frenet exact inverses
// there. On straight runs the normals coincide and d is the perpendicular
// distance to the segment.
class CenterlineIndex {
 public:
  CenterlineIndex() = default;
  // Throws kDegenerateSegment if two consecutive points coincide. The
  // out-of-corridor cutoff defaults to 5x the track's max half-width.
  explicit CenterlineIndex(const TrackMap& track, double cutoff = 0.0);

  std::span<const CenterlineSegment> segments() const { return segments_; }
  std::span<const Vec2> vertex_normals() const { return vertex_normals_; }
  double total_length() const { return total_length_; }
  double cutoff() const { return cutoff_; }

  // Wraps s into [0, L).
  double wrap_s(double s) const;

  // Index of the segment nearest to p by unsigned distance (ties to the
  // smaller s) and that distance. Throws kOutOfCorridor past the cutoff.
  std::size_t nearest_segment(Vec2 p, double* distance = nullptr) const;

  FrenetPoint to_frenet(Vec2 p) const;
  // Same, also reporting which segment cell contained the point.
  FrenetPoint to_frenet(Vec2 p, std::size_t* segment) const;
  Vec2 from_frenet(double s, double d) const;

  // Segment whose [s0, s0 + len) contains the wrapped s.
  std::size_t segment_at(double s) const;

  FrenetVelocity frenet_velocity(const VehicleState& state) const;
  // Position and velocity of the rear-axle point in one lookup.
  FrenetPose frenet_pose(const VehicleState& state) const;

 private:
  bool solve_cell(std::size_t i, Vec2 p, double* u, double* d) const;

  std::vector<CenterlineSegment> segments_;
  std::vector<Vec2> vertex_normals_;
  std::vector<double> seg_s0_;
  double total_length_ = 0.0;
  double cutoff_ = 0.0;
  SegmentGrid grid_;
};

}  // namespace trackforge
