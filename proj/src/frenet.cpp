#include "trackforge/frenet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace trackforge {
namespace {

constexpr double kGridCell = 1.0;
constexpr double kCellSlack = 1e-9;
constexpr int kCellSearch = 3;

}  // namespace

CenterlineIndex::CenterlineIndex(const TrackMap& track, double cutoff) {
  const auto& pts = track.centerline;
  if (pts.size() < 3) {
    throw Error(ErrorCode::kInvalidArgument, "centerline needs >= 3 points");
  }
  const std::size_t n = pts.size() - 1;
  segments_.resize(n);
  seg_s0_.resize(n);
  double s = 0.0;
  std::vector<Vec2> starts(n), ends(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = pts[i + 1] - pts[i];
    const double len = norm(e);
    if (!(len > 0.0)) {
      throw Error(ErrorCode::kDegenerateSegment,
                  "centerline points " + std::to_string(i) + " and " +
                      std::to_string(i + 1) + " coincide");
    }
    const Vec2 t = e * (1.0 / len);
    segments_[i] = {pts[i], t, perp(t), len, s};
    seg_s0_[i] = s;
    starts[i] = pts[i];
    ends[i] = pts[i + 1];
    s += len;
  }
  total_length_ = s;
  vertex_normals_ = trackforge::vertex_normals(pts);
  cutoff_ = cutoff > 0.0 ? cutoff : 5.0 * std::max(track.max_half_width(), 0.1);
  grid_ = SegmentGrid(starts, ends, kGridCell);
}

double CenterlineIndex::wrap_s(double s) const {
  if (s >= 0.0 && s < total_length_) return s;
  double w = std::fmod(s, total_length_);
  if (w < 0.0) w += total_length_;
  if (w >= total_length_) w = 0.0;
  return w;
}

std::size_t CenterlineIndex::segment_at(double s) const {
  s = wrap_s(s);
  auto it = std::upper_bound(seg_s0_.begin(), seg_s0_.end(), s);
  return static_cast<std::size_t>(std::max<std::ptrdiff_t>(
      0, (it - seg_s0_.begin()) - 1));
}

std::size_t CenterlineIndex::nearest_segment(Vec2 p, double* distance) const {
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  const int max_ring =
      static_cast<int>(std::ceil(cutoff_ / grid_.cell_size())) + 1;
  // Bail out early for points far outside the grid; ring indices would
  // otherwise grow with the distance.
  const int cx = grid_.cell_x(std::clamp(p.x, -1e12, 1e12));
  const int cy = grid_.cell_y(std::clamp(p.y, -1e12, 1e12));
  const int outside = std::max({-cx, cx - (grid_.nx() - 1), -cy,
                                cy - (grid_.ny() - 1), 0});
  if (outside > max_ring) {
    throw Error(ErrorCode::kOutOfCorridor,
                "point far outside the track bounds");
  }
  for (int ring = 0; ring <= max_ring + outside; ++ring) {
    grid_.for_each_in_ring(p, ring, [&](std::size_t i) {
      const auto& seg = segments_[i];
      const double dist =
          point_segment_distance(p, seg.start, seg.start + seg.tangent * seg.length);
      if (dist < best || (dist == best && i < best_i)) {
        best = dist;
        best_i = i;
      }
    });
    // Anything not yet visited sits at least ring * cell away.
    if (best < ring * grid_.cell_size()) break;
  }
  if (!(best <= cutoff_)) {
    throw Error(ErrorCode::kOutOfCorridor,
                "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                    ") is " + std::to_string(best) +
                    " m from the centerline, cutoff " + std::to_string(cutoff_));
  }
  if (distance) *distance = best;
  return best_i;
}

bool CenterlineIndex::solve_cell(std::size_t i, Vec2 p, double* u_out,
                                 double* d_out) const {
  const std::size_t n = segments_.size();
  const auto& seg = segments_[i];
  const Vec2 e = seg.tangent * seg.length;
  const Vec2 n0 = vertex_normals_[i];
  const Vec2 dn = vertex_normals_[(i + 1) % n] - n0;
  const Vec2 q = p - seg.start;
  // cross(q, N(u)) = u * cross(E, N(u)) with N(u) = n0 + u * dn.
  const double a = cross(e, dn);
  const double b = cross(e, n0) - cross(q, dn);
  const double c = -cross(q, n0);
  double u;
  if (a == 0.0) {
    if (b == 0.0) return false;
    u = -c / b;
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return false;
    // Root that tends to -c/b as a -> 0.
    const double sq = std::sqrt(disc);
    const double denom = b >= 0.0 ? b + sq : b - sq;
    if (denom == 0.0) return false;
    u = -2.0 * c / denom;
  }
  if (!(u >= -kCellSlack && u <= 1.0 + kCellSlack)) return false;
  const Vec2 m = n0 + dn * u;
  const double mm = dot(m, m);
  if (mm == 0.0) return false;
  *u_out = std::clamp(u, 0.0, 1.0);
  *d_out = dot(q - e * u, m) / mm;
  return true;
}

FrenetPoint CenterlineIndex::to_frenet(Vec2 p) const { return to_frenet(p, nullptr); }

FrenetPoint CenterlineIndex::to_frenet(Vec2 p, std::size_t* segment) const {
  const std::size_t n = segments_.size();
  const std::size_t i0 = nearest_segment(p);
  bool found = false;
  FrenetPoint best;
  std::size_t best_seg = i0;
  for (int off = -kCellSearch; off <= kCellSearch; ++off) {
    const std::size_t i = (i0 + n + off) % n;
    double u, d;
    if (!solve_cell(i, p, &u, &d)) continue;
    const double s = wrap_s(seg_s0_[i] + u * segments_[i].length);
    if (!found || std::abs(d) < std::abs(best.d) ||
        (std::abs(d) == std::abs(best.d) && s < best.s)) {
      best = {s, d};
      best_seg = i;
      found = true;
    }
  }
  if (!found) {
    // Outside every nearby cell (only possible well beyond the corridor):
    // fall back to orthogonal projection on the nearest segment.
    const auto& seg = segments_[i0];
    const Vec2 q = p - seg.start;
    const double t = std::clamp(dot(q, seg.tangent), 0.0, seg.length);
    const Vec2 foot = seg.start + seg.tangent * t;
    const double side = cross(seg.tangent, p - foot) >= 0.0 ? 1.0 : -1.0;
    best = {wrap_s(seg.s0 + t), side * norm(p - foot)};
    best_seg = i0;
  }
  if (segment) *segment = best_seg;
  return best;
}

Vec2 CenterlineIndex::from_frenet(double s, double d) const {
  const std::size_t n = segments_.size();
  s = wrap_s(s);
  const std::size_t i = segment_at(s);
  const auto& seg = segments_[i];
  const double u = (s - seg.s0) / seg.length;
  const Vec2 n0 = vertex_normals_[i];
  const Vec2 dn = vertex_normals_[(i + 1) % n] - n0;
  return seg.start + seg.tangent * (u * seg.length) + (n0 + dn * u) * d;
}

FrenetVelocity CenterlineIndex::frenet_velocity(const VehicleState& state) const {
  std::size_t seg = 0;
  to_frenet({state.x, state.y}, &seg);
  const Vec2 v = unit_from_angle(state.heading) * state.speed;
  return {dot(v, segments_[seg].tangent), dot(v, segments_[seg].normal)};
}

FrenetPose CenterlineIndex::frenet_pose(const VehicleState& state) const {
  std::size_t seg = 0;
  const FrenetPoint f = to_frenet({state.x, state.y}, &seg);
  const Vec2 v = unit_from_angle(state.heading) * state.speed;
  return {f.s, f.d, dot(v, segments_[seg].tangent), dot(v, segments_[seg].normal)};
}

}  // namespace trackforge
