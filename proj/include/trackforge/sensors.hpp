#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

#include "trackforge/common.hpp"
#include "trackforge/geometry.hpp"
#include "trackforge/simd/kernels.hpp"
#include "trackforge/track.hpp"
#include "trackforge/vehicle.hpp"

namespace trackforge {

struct LidarConfig {
  int beam_count = 2155;
  double fov = 4.71238898038469;  // 270 degrees
  double max_range = 10.0;
  // Meters ahead of the rear axle: geometric center (wheelbase / 2) plus
  // 0.15 m.
  double mount_offset = 0.315;
  std::array<double, 2> noise_sigma_range{0.0, 0.03};
  std::array<int, 2> delay_steps_range{0, 2};
  // Speed-sensor noise sigma relative to the lidar sigma.
  double speed_noise_scale = 0.5;

  void validate() const;
};

struct Scan {
  std::vector<double> ranges;
};

// Beam k of B points at heading - fov/2 + k * fov / (B - 1) (just heading
// when B == 1).
std::vector<double> beam_angles(double heading, const LidarConfig& config);

// Every ray-blocking segment of a track (both walls and all obstacle
// edges) in structure-of-arrays form, plus a bucket grid for range culling.
class LidarScene {
 public:
  LidarScene() = default;
  explicit LidarScene(const TrackMap& track);

  std::size_t size() const { return ax_.size(); }
  Vec2 start(std::size_t i) const { return {ax_[i], ay_[i]}; }
  Vec2 end(std::size_t i) const { return {ax_[i] + ex_[i], ay_[i] + ey_[i]}; }

  // Segments that may lie within `radius` of `center`, gathered into
  // caller-owned scratch storage.
  struct Candidates {
    std::vector<double> ax, ay, ex, ey;
    simd::SegmentSoA view() const {
      return {ax.data(), ay.data(), ex.data(), ey.data(), ax.size()};
    }
  };
  void gather(Vec2 center, double radius, Candidates& out) const;
  simd::SegmentSoA all() const {
    return {ax_.data(), ay_.data(), ex_.data(), ey_.data(), ax_.size()};
  }

 private:
  std::vector<double> ax_, ay_, ex_, ey_;
  SegmentGrid grid_;
};

Vec2 lidar_origin(const VehicleState& state, const LidarConfig& config);

Scan scan_lidar(const VehicleState& state, const LidarScene& scene,
                const LidarConfig& config);
// Builds a throwaway scene; prefer the LidarScene overload in loops.
Scan scan_lidar(const VehicleState& state, const TrackMap& track,
                const LidarConfig& config);

std::vector<double> normalize_scan(const Scan& scan, const LidarConfig& config);

// Per-episode sensor imperfections: additive Gaussian noise and a fixed
// delay in control steps applied to lidar and speed together.
class SensorEffectState {
 public:
  SensorEffectState() = default;
  SensorEffectState(double sigma, int delay, double max_range,
                    double speed_noise_scale = 0.5);

  double sigma() const { return sigma_; }
  int delay() const { return delay_; }
  std::size_t buffered() const { return buffer_.size(); }

  struct Reading {
    Scan scan;
    double speed = 0.0;
  };
  // Pushes the fresh reading and returns the one `delay` steps old (the
  // oldest held during warm-up) with noise applied.
  Reading apply(const Scan& scan, double speed, Rng& rng);

 private:
  double sigma_ = 0.0;
  int delay_ = 0;
  double max_range_ = 10.0;
  double speed_noise_scale_ = 0.5;
  std::deque<Reading> buffer_;
};

SensorEffectState sample_effects(std::uint64_t seed, const LidarConfig& config);

}  // namespace trackforge
