#include "trackforge/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "trackforge/simd/kernels.hpp"

namespace trackforge {
namespace {

constexpr double kSceneCell = 2.0;

void fail(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kInvalidArgument, "lidar." + field + ": " + why);
}

}  // namespace

void LidarConfig::validate() const {
  if (beam_count < 1) fail("beam_count", "must be >= 1");
  if (!(fov > 0.0 && fov <= 2.0 * std::numbers::pi)) fail("fov", "must be in (0, 2*pi]");
  if (!(max_range > 0.0)) fail("max_range", "must be > 0");
  if (!(noise_sigma_range[0] >= 0.0) || noise_sigma_range[1] < noise_sigma_range[0]) {
    fail("noise_sigma_range", "must satisfy 0 <= min <= max");
  }
  if (delay_steps_range[0] < 0 || delay_steps_range[1] < delay_steps_range[0]) {
    fail("delay_steps_range", "must satisfy 0 <= min <= max");
  }
  if (!(speed_noise_scale >= 0.0)) fail("speed_noise_scale", "must be >= 0");
}

std::vector<double> beam_angles(double heading, const LidarConfig& c) {
  std::vector<double> out(c.beam_count);
  if (c.beam_count == 1) {
    out[0] = heading;
    return out;
  }
  const double step = c.fov / (c.beam_count - 1);
  const double center = 0.5 * (c.beam_count - 1);
  for (int k = 0; k < c.beam_count; ++k) out[k] = heading + (k - center) * step;
  return out;
}

LidarScene::LidarScene(const TrackMap& track) {
  std::vector<Vec2> starts, ends;
  auto add = [&](Vec2 a, Vec2 b) {
    if (a == b) return;
    starts.push_back(a);
    ends.push_back(b);
  };
  const WallPolylines walls = wall_polylines(track);
  for (std::size_t i = 0; i + 1 < walls.left.size(); ++i) add(walls.left[i], walls.left[i + 1]);
  for (std::size_t i = 0; i + 1 < walls.right.size(); ++i) {
    add(walls.right[i], walls.right[i + 1]);
  }
  for (const auto& o : track.obstacles) {
    const std::size_t n = o.vertices.size();
    for (std::size_t i = 0; i < n; ++i) add(o.vertices[i], o.vertices[(i + 1) % n]);
  }
  const std::size_t n = starts.size();
  ax_.resize(n);
  ay_.resize(n);
  ex_.resize(n);
  ey_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ax_[i] = starts[i].x;
    ay_[i] = starts[i].y;
    ex_[i] = ends[i].x - starts[i].x;
    ey_[i] = ends[i].y - starts[i].y;
  }
  grid_ = SegmentGrid(starts, ends, kSceneCell);
}

void LidarScene::gather(Vec2 center, double radius, Candidates& out) const {
  out.ax.clear();
  out.ay.clear();
  out.ex.clear();
  out.ey.clear();
  const Aabb box{{center.x - radius, center.y - radius},
                 {center.x + radius, center.y + radius}};
  grid_.for_each_in_box(box, [&](std::size_t i) {
    const Vec2 a = start(i);
    const Vec2 b = end(i);
    if (point_segment_distance(center, a, b) > radius) return;
    out.ax.push_back(ax_[i]);
    out.ay.push_back(ay_[i]);
    out.ex.push_back(ex_[i]);
    out.ey.push_back(ey_[i]);
  });
}

Vec2 lidar_origin(const VehicleState& state, const LidarConfig& config) {
  return Vec2{state.x, state.y} + unit_from_angle(state.heading) * config.mount_offset;
}

Scan scan_lidar(const VehicleState& state, const LidarScene& scene,
                const LidarConfig& config) {
  const Vec2 o = lidar_origin(state, config);
  thread_local LidarScene::Candidates candidates;
  // Any hit within max_range lies on a segment within max_range of o; the
  // slack absorbs rounding in the distance test.
  scene.gather(o, config.max_range * (1.0 + 1e-9) + 1e-9, candidates);
  const simd::SegmentSoA segs = candidates.view();
  const auto& k = simd::kernels();
  Scan scan;
  scan.ranges.resize(config.beam_count);
  const auto angles = beam_angles(state.heading, config);
  for (int b = 0; b < config.beam_count; ++b) {
    const double dx = std::cos(angles[b]);
    const double dy = std::sin(angles[b]);
    const double t = k.ray_segments_min(o.x, o.y, dx, dy, segs, config.max_range);
    scan.ranges[b] = std::clamp(t, 0.0, config.max_range);
  }
  return scan;
}

Scan scan_lidar(const VehicleState& state, const TrackMap& track,
                const LidarConfig& config) {
  return scan_lidar(state, LidarScene(track), config);
}

std::vector<double> normalize_scan(const Scan& scan, const LidarConfig& config) {
  std::vector<double> out(scan.ranges.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = scan.ranges[i];
    out[i] = std::isnan(r) ? 1.0 : std::clamp(r, 0.0, config.max_range) / config.max_range;
  }
  return out;
}

SensorEffectState::SensorEffectState(double sigma, int delay, double max_range,
                                     double speed_noise_scale)
    : sigma_(sigma),
      delay_(delay),
      max_range_(max_range),
      speed_noise_scale_(speed_noise_scale) {}

SensorEffectState::Reading SensorEffectState::apply(const Scan& scan, double speed,
                                                    Rng& rng) {
  buffer_.push_back({scan, speed});
  while (buffer_.size() > static_cast<std::size_t>(delay_) + 1) buffer_.pop_front();
  Reading out = buffer_.front();
  if (sigma_ > 0.0) {
    for (double& r : out.scan.ranges) {
      r = std::clamp(r + sigma_ * standard_normal(rng), 0.0, max_range_);
    }
    out.speed = std::max(0.0, out.speed + sigma_ * speed_noise_scale_ * standard_normal(rng));
  }
  return out;
}

SensorEffectState sample_effects(std::uint64_t seed, const LidarConfig& config) {
  Rng rng(derive_seed(seed, 0x5e45ull));
  const double sigma =
      uniform(rng, config.noise_sigma_range[0], config.noise_sigma_range[1]);
  const int delay =
      uniform_int(rng, config.delay_steps_range[0], config.delay_steps_range[1]);
  return SensorEffectState(sigma, delay, config.max_range, config.speed_noise_scale);
}

}  // namespace trackforge
