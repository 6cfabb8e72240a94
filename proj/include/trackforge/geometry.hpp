#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "trackforge/common.hpp"

namespace trackforge {

// Sign of cross(b - a, c - a): +1 left turn, -1 right turn, 0 collinear.
int orientation(Vec2 a, Vec2 b, Vec2 c);

// Closed segments: touching endpoints and collinear overlap count.
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

// Ray parameter of the first hit of o + t*dir with segment [a, b], if any.
std::optional<double> ray_segment_intersection(Vec2 o, Vec2 dir, Vec2 a, Vec2 b);

double polygon_signed_area(std::span<const Vec2> poly);
bool is_convex_ccw(std::span<const Vec2> poly);

// Closed convex polygon containment (boundary counts as inside).
bool point_in_convex_polygon(Vec2 p, std::span<const Vec2> poly);

// Winding number of a closed ring (last point may or may not repeat the
// first) around p.
int winding_number(Vec2 p, std::span<const Vec2> ring);

// Closed-set overlap test for two convex polygons by edge crossing plus
// containment.
bool convex_polygons_overlap(std::span<const Vec2> a, std::span<const Vec2> b);

// Corners of an oriented rectangle, counter-clockwise.
std::vector<Vec2> oriented_rectangle(Vec2 center, double heading, double length,
                                     double width);

struct Aabb {
  Vec2 lo;
  Vec2 hi;

  bool overlaps(const Aabb& o) const {
    return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
  }
};

Aabb segment_bounds(Vec2 a, Vec2 b);

// Index pairs (i, j), i < j, of non-adjacent crossing segments of the
// polyline through `points`. When `closed`, segment n-1 joins the last point
// back to the first and the polyline is expected not to repeat it.
std::vector<std::pair<std::size_t, std::size_t>> polyline_self_intersections(
    std::span<const Vec2> points, bool closed);

// Index pairs (i, j) of crossing segments between two polylines.
std::vector<std::pair<std::size_t, std::size_t>> polyline_cross_intersections(
    std::span<const Vec2> a, std::span<const Vec2> b);

// Uniform bucket grid over segments for proximity queries.
class SegmentGrid {
 public:
  SegmentGrid() = default;
  SegmentGrid(std::span<const Vec2> starts, std::span<const Vec2> ends,
              double cell_size);

  double cell_size() const { return cell_size_; }
  std::size_t segment_count() const { return segment_count_; }

  // Calls fn(index) once per segment registered in any cell the box meets,
  // in increasing index order.
  template <typename Fn>
  void for_each_in_box(const Aabb& box, Fn&& fn) const;

  // Segments registered in cells at Chebyshev ring distance `ring` around
  // the cell containing p (ring 0 = the cell itself).
  template <typename Fn>
  void for_each_in_ring(Vec2 p, int ring, Fn&& fn) const;

  int cell_x(double x) const;
  int cell_y(double y) const;
  int nx() const { return nx_; }
  int ny() const { return ny_; }

 private:
  const std::vector<std::uint32_t>* cell(int ix, int iy) const {
    if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return nullptr;
    return &cells_[static_cast<std::size_t>(iy) * nx_ + ix];
  }

  double cell_size_ = 1.0;
  Vec2 origin_;
  int nx_ = 0;
  int ny_ = 0;
  std::size_t segment_count_ = 0;
  std::vector<std::vector<std::uint32_t>> cells_;
};

template <typename Fn>
void SegmentGrid::for_each_in_box(const Aabb& box, Fn&& fn) const {
  if (nx_ == 0) return;
  const int x0 = std::max(cell_x(box.lo.x), 0);
  const int x1 = std::min(cell_x(box.hi.x), nx_ - 1);
  const int y0 = std::max(cell_y(box.lo.y), 0);
  const int y1 = std::min(cell_y(box.hi.y), ny_ - 1);
  if (x0 > x1 || y0 > y1) return;
  std::vector<std::uint32_t> seen;
  for (int iy = y0; iy <= y1; ++iy) {
    for (int ix = x0; ix <= x1; ++ix) {
      for (std::uint32_t s : *cell(ix, iy)) seen.push_back(s);
    }
  }
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  for (std::uint32_t s : seen) fn(static_cast<std::size_t>(s));
}

template <typename Fn>
void SegmentGrid::for_each_in_ring(Vec2 p, int ring, Fn&& fn) const {
  if (nx_ == 0) return;
  const int cx = cell_x(p.x);
  const int cy = cell_y(p.y);
  for (int iy = cy - ring; iy <= cy + ring; ++iy) {
    for (int ix = cx - ring; ix <= cx + ring; ++ix) {
      if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != ring) continue;
      if (const auto* c = cell(ix, iy)) {
        for (std::uint32_t s : *c) fn(static_cast<std::size_t>(s));
      }
    }
  }
}

}  // namespace trackforge
