#include "trackforge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace trackforge {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

namespace {

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 e = b - a;
  const double len2 = dot(e, e);
  if (len2 == 0.0) return norm(p - a);
  const double t = std::clamp(dot(p - a, e) / len2, 0.0, 1.0);
  return norm(p - (a + e * t));
}

std::optional<double> ray_segment_intersection(Vec2 o, Vec2 dir, Vec2 a,
                                               Vec2 b) {
  const Vec2 e = b - a;
  const Vec2 q = a - o;
  const double denom = cross(dir, e);
  if (denom == 0.0) return std::nullopt;
  const double t = cross(q, e) / denom;
  const double w = cross(q, dir) / denom;
  if (t < 0.0 || w < 0.0 || w > 1.0) return std::nullopt;
  return t;
}

double polygon_signed_area(std::span<const Vec2> poly) {
  double area = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    area += cross(poly[i], poly[(i + 1) % n]);
  }
  return 0.5 * area;
}

bool is_convex_ccw(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  if (polygon_signed_area(poly) <= 0.0) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (orientation(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]) < 0) {
      return false;
    }
  }
  return true;
}

bool point_in_convex_polygon(Vec2 p, std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (orientation(poly[i], poly[(i + 1) % n], p) < 0) return false;
  }
  return n >= 3;
}

int winding_number(Vec2 p, std::span<const Vec2> ring) {
  std::size_t n = ring.size();
  if (n > 1 && ring.front() == ring.back()) --n;
  int wn = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = ring[i];
    const Vec2 b = ring[(i + 1) % n];
    if (a.y <= p.y) {
      if (b.y > p.y && cross(b - a, p - a) > 0.0) ++wn;
    } else {
      if (b.y <= p.y && cross(b - a, p - a) < 0.0) --wn;
    }
  }
  return wn;
}

bool convex_polygons_overlap(std::span<const Vec2> a, std::span<const Vec2> b) {
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < na; ++i) {
    const Vec2 a0 = a[i];
    const Vec2 a1 = a[(i + 1) % na];
    for (std::size_t j = 0; j < nb; ++j) {
      if (segments_intersect(a0, a1, b[j], b[(j + 1) % nb])) return true;
    }
  }
  // No boundary contact: either disjoint or one strictly inside the other.
  return point_in_convex_polygon(a[0], b) || point_in_convex_polygon(b[0], a);
}

std::vector<Vec2> oriented_rectangle(Vec2 center, double heading, double length,
                                     double width) {
  const Vec2 f = unit_from_angle(heading) * (0.5 * length);
  const Vec2 l = perp(unit_from_angle(heading)) * (0.5 * width);
  return {center - f - l, center + f - l, center + f + l, center - f + l};
}

Aabb segment_bounds(Vec2 a, Vec2 b) {
  return {{std::min(a.x, b.x), std::min(a.y, b.y)},
          {std::max(a.x, b.x), std::max(a.y, b.y)}};
}

namespace {

struct SweepItem {
  Aabb box;
  std::size_t index;
};

std::vector<SweepItem> sweep_items(std::span<const Vec2> pts,
                                   std::size_t segments) {
  std::vector<SweepItem> items(segments);
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < segments; ++i) {
    items[i] = {segment_bounds(pts[i], pts[(i + 1) % n]), i};
  }
  std::sort(items.begin(), items.end(), [](const auto& l, const auto& r) {
    return l.box.lo.x < r.box.lo.x ||
           (l.box.lo.x == r.box.lo.x && l.index < r.index);
  });
  return items;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> polyline_self_intersections(
    std::span<const Vec2> points, bool closed) {
  std::vector<std::pair<std::size_t, std::size_t>> hits;
  const std::size_t n = points.size();
  if (n < 3) return hits;
  const std::size_t segs = closed ? n : n - 1;
  auto adjacent = [&](std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return j == i + 1 || (closed && i == 0 && j == segs - 1);
  };
  const auto items = sweep_items(points, segs);
  for (std::size_t k = 0; k < items.size(); ++k) {
    for (std::size_t m = k + 1; m < items.size(); ++m) {
      if (items[m].box.lo.x > items[k].box.hi.x) break;
      if (!items[k].box.overlaps(items[m].box)) continue;
      const std::size_t i = items[k].index;
      const std::size_t j = items[m].index;
      if (adjacent(i, j)) continue;
      if (segments_intersect(points[i], points[(i + 1) % n], points[j],
                             points[(j + 1) % n])) {
        hits.emplace_back(std::min(i, j), std::max(i, j));
      }
    }
  }
  std::sort(hits.begin(), hits.end());
  return hits;
}

std::vector<std::pair<std::size_t, std::size_t>> polyline_cross_intersections(
    std::span<const Vec2> a, std::span<const Vec2> b) {
  std::vector<std::pair<std::size_t, std::size_t>> hits;
  if (a.size() < 2 || b.size() < 2) return hits;
  struct Tagged {
    Aabb box;
    std::size_t index;
    bool from_a;
  };
  std::vector<Tagged> items;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    items.push_back({segment_bounds(a[i], a[i + 1]), i, true});
  }
  for (std::size_t j = 0; j + 1 < b.size(); ++j) {
    items.push_back({segment_bounds(b[j], b[j + 1]), j, false});
  }
  std::sort(items.begin(), items.end(), [](const auto& l, const auto& r) {
    return l.box.lo.x < r.box.lo.x;
  });
  for (std::size_t k = 0; k < items.size(); ++k) {
    for (std::size_t m = k + 1; m < items.size(); ++m) {
      if (items[m].box.lo.x > items[k].box.hi.x) break;
      if (items[k].from_a == items[m].from_a) continue;
      if (!items[k].box.overlaps(items[m].box)) continue;
      const auto& ia = items[k].from_a ? items[k] : items[m];
      const auto& ib = items[k].from_a ? items[m] : items[k];
      if (segments_intersect(a[ia.index], a[ia.index + 1], b[ib.index],
                             b[ib.index + 1])) {
        hits.emplace_back(ia.index, ib.index);
      }
    }
  }
  std::sort(hits.begin(), hits.end());
  return hits;
}

SegmentGrid::SegmentGrid(std::span<const Vec2> starts, std::span<const Vec2> ends,
                         double cell_size)
    : cell_size_(cell_size), segment_count_(starts.size()) {
  if (starts.empty()) return;
  Aabb box = segment_bounds(starts[0], ends[0]);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const Aabb b = segment_bounds(starts[i], ends[i]);
    box.lo.x = std::min(box.lo.x, b.lo.x);
    box.lo.y = std::min(box.lo.y, b.lo.y);
    box.hi.x = std::max(box.hi.x, b.hi.x);
    box.hi.y = std::max(box.hi.y, b.hi.y);
  }
  origin_ = box.lo;
  nx_ = static_cast<int>(std::floor((box.hi.x - box.lo.x) / cell_size_)) + 1;
  ny_ = static_cast<int>(std::floor((box.hi.y - box.lo.y) / cell_size_)) + 1;
  cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const Aabb b = segment_bounds(starts[i], ends[i]);
    const int x0 = std::clamp(cell_x(b.lo.x), 0, nx_ - 1);
    const int x1 = std::clamp(cell_x(b.hi.x), 0, nx_ - 1);
    const int y0 = std::clamp(cell_y(b.lo.y), 0, ny_ - 1);
    const int y1 = std::clamp(cell_y(b.hi.y), 0, ny_ - 1);
    for (int iy = y0; iy <= y1; ++iy) {
      for (int ix = x0; ix <= x1; ++ix) {
        cells_[static_cast<std::size_t>(iy) * nx_ + ix].push_back(
            static_cast<std::uint32_t>(i));
      }
    }
  }
}

int SegmentGrid::cell_x(double x) const {
  return static_cast<int>(std::floor((x - origin_.x) / cell_size_));
}

int SegmentGrid::cell_y(double y) const {
  return static_cast<int>(std::floor((y - origin_.y) / cell_size_));
}

}  // namespace trackforge
