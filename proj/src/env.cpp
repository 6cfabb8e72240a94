#include "trackforge/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "trackforge/dynamics.hpp"
#include "trackforge/geometry.hpp"

namespace trackforge {
namespace {

bool inside_corridor(Vec2 p, const TrackWorld& world) {
  const auto& left = world.walls.left;
  const auto& right = world.walls.right;
  const std::span<const Vec2> l(left.data(), left.size() - 1);
  const std::span<const Vec2> r(right.data(), right.size() - 1);
  return winding_number(p, l) != winding_number(p, r);
}

}  // namespace

void EpisodeConfig::validate() const {
  if (max_steps <= 0) throw Error(ErrorCode::kInvalidArgument, "episode.max_steps: must be > 0");
  if (stack_depth < 1) {
    throw Error(ErrorCode::kInvalidArgument, "episode.stack_depth: must be >= 1");
  }
  const double c[] = {reward.c_vs, reward.c_vd, reward.c_d, reward.c_steer,
                      reward.collision_penalty};
  for (double v : c) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "episode.reward: coefficients must be finite");
    }
  }
}

void EnvConfig::validate() const {
  vehicle.validate();
  lidar.validate();
  episode.validate();
}

double compute_reward(const FrenetPose& f, const Action& action, bool collision,
                      const RewardCoefficients& c) {
  if (collision) return c.collision_penalty;
  return c.c_vs * f.v_s - c.c_vd * std::abs(f.v_d) - c.c_d * std::abs(f.d) -
         c.c_steer * std::abs(action.steer_cmd);
}

std::vector<Vec2> vehicle_footprint(const VehicleState& state, const VehicleConfig& v) {
  const Vec2 center =
      Vec2{state.x, state.y} + unit_from_angle(state.heading) * (0.5 * v.wheelbase);
  return oriented_rectangle(center, state.heading, v.length, v.width);
}

bool check_collision(const VehicleState& state, const TrackWorld& world,
                     const VehicleConfig& vehicle) {
  const auto rect = vehicle_footprint(state, vehicle);
  Aabb box{rect[0], rect[0]};
  for (const Vec2& c : rect) {
    box.lo = {std::min(box.lo.x, c.x), std::min(box.lo.y, c.y)};
    box.hi = {std::max(box.hi.x, c.x), std::max(box.hi.y, c.y)};
  }
  bool hit = false;
  world.wall_grid.for_each_in_box(box, [&](std::size_t i) {
    if (hit) return;
    const Vec2 a = world.wall_starts[i];
    const Vec2 b = world.wall_ends[i];
    for (std::size_t k = 0; k < 4 && !hit; ++k) {
      hit = segments_intersect(rect[k], rect[(k + 1) % 4], a, b);
    }
  });
  if (hit) return true;
  // No edge contact: the footprint lies wholly inside or wholly outside.
  if (!inside_corridor(rect[0], world)) return true;
  for (const auto& o : world.map.obstacles) {
    if (convex_polygons_overlap(rect, o.vertices)) return true;
  }
  return false;
}

bool check_collision(const VehicleState& state, const TrackMap& track,
                     const VehicleConfig& vehicle) {
  return check_collision(state, TrackWorld(track), vehicle);
}

bool LapProgress::update(double s) {
  double delta = std::fmod(s - last_s_, length_);
  if (delta > 0.5 * length_) delta -= length_;
  if (delta <= -0.5 * length_) delta += length_;
  progress_ += delta;
  last_s_ = s;
  return complete();
}

bool check_lap_complete(const std::vector<double>& s_history, double total_length) {
  if (s_history.empty()) return false;
  LapProgress lap(total_length, s_history.front());
  for (std::size_t i = 1; i < s_history.size(); ++i) {
    if (lap.update(s_history[i])) return true;
  }
  return false;
}

RacingEnv::RacingEnv(EnvConfig config) : config_(std::move(config)) { config_.validate(); }

void RacingEnv::push_frame(const Scan& scan, double speed) {
  std::vector<double> frame = normalize_scan(scan, config_.lidar);
  frame.push_back(std::clamp(speed / config_.vehicle.v_max, 0.0, 1.0));
  frame.push_back(previous_action_.speed_cmd);
  frame.push_back(previous_action_.steer_cmd);
  if (frames_.empty()) {
    frames_.assign(config_.episode.stack_depth, frame);
  } else {
    frames_.pop_front();
    frames_.push_back(std::move(frame));
  }
}

std::vector<double> RacingEnv::observation() const {
  std::vector<double> out;
  out.reserve(observation_size());
  for (const auto& f : frames_) out.insert(out.end(), f.begin(), f.end());
  return out;
}

std::vector<double> RacingEnv::reset(std::uint64_t seed, WorldPtr world) {
  if (!world) throw Error(ErrorCode::kInvalidArgument, "reset: null track");
  world_ = std::move(world);
  const Pose2& spawn = world_->map.spawn;
  state_ = VehicleState{spawn.x, spawn.y, wrap_angle(spawn.heading), 0.0, 0.0, 0.0};
  previous_action_ = {-1.0, 0.0};
  effects_ = sample_effects(seed, config_.lidar);
  noise_rng_ = Rng(derive_seed(seed, 0x401e));
  frames_.clear();
  steps_ = 0;
  done_ = false;
  lap_ = LapProgress(world_->index.total_length(),
                     world_->index.to_frenet({state_.x, state_.y}).s);
  const Scan scan = scan_lidar(state_, world_->scene, config_.lidar);
  const auto reading = effects_.apply(scan, state_.speed, noise_rng_);
  push_frame(reading.scan, reading.speed);
  return observation();
}

StepResult RacingEnv::step(const Action& action) {
  if (!world_) throw Error(ErrorCode::kResetRequired, "reset required");
  if (done_) throw Error(ErrorCode::kEpisodeDone, "step called after episode end; reset required");
  const Action a = clamp_action(action);
  state_ = step_dynamics(state_, denormalize_action(a, config_.vehicle), config_.vehicle);
  previous_action_ = a;
  ++steps_;

  StepResult r;
  r.info.collision = check_collision(state_, *world_, config_.vehicle);
  try {
    r.info.frenet = world_->index.frenet_pose(state_);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kOutOfCorridor) throw;
    r.info.collision = true;
  }
  if (!r.info.collision) r.info.lap_complete = lap_.update(r.info.frenet.s);
  r.info.timeout = steps_ >= config_.episode.max_steps;
  r.reward = compute_reward(r.info.frenet, a, r.info.collision, config_.episode.reward);

  const Scan scan = scan_lidar(state_, world_->scene, config_.lidar);
  const auto reading = effects_.apply(scan, state_.speed, noise_rng_);
  push_frame(reading.scan, reading.speed);
  r.observation = observation();
  r.done = r.info.collision || r.info.lap_complete || r.info.timeout;
  done_ = r.done;
  return r;
}

}  // namespace trackforge
