#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "trackforge/common.hpp"
#include "trackforge/frenet.hpp"
#include "trackforge/sensors.hpp"
#include "trackforge/track.hpp"
#include "trackforge/vehicle.hpp"
#include "trackforge/world.hpp"

namespace trackforge {

struct RewardCoefficients {
  double c_vs = 1.0;
  double c_vd = 0.01;
  double c_d = 0.02;
  double c_steer = 0.1;
  double collision_penalty = -1000.0;
};

struct EpisodeConfig {
  int max_steps = 3000;
  int stack_depth = 4;
  RewardCoefficients reward;

  void validate() const;
};

// steer_cmd is read from the normalized action.
double compute_reward(const FrenetPose& f, const Action& action, bool collision,
                      const RewardCoefficients& c);

// Footprint of the vehicle: a length x width rectangle centred half a
// wheelbase ahead of the rear axle.
std::vector<Vec2> vehicle_footprint(const VehicleState& state, const VehicleConfig& vehicle);

// True iff the footprint touches or crosses a wall, lies outside the
// corridor, or touches any obstacle (closed sets).
bool check_collision(const VehicleState& state, const TrackWorld& world,
                     const VehicleConfig& vehicle);
bool check_collision(const VehicleState& state, const TrackMap& track,
                     const VehicleConfig& vehicle);

// Unwraps successive s samples (shortest signed step modulo L) into
// cumulative progress.
class LapProgress {
 public:
  LapProgress() = default;
  LapProgress(double total_length, double start_s)
      : length_(total_length), last_s_(start_s) {}

  // Returns true once cumulative progress reaches one lap.
  bool update(double s);
  double progress() const { return progress_; }
  bool complete() const { return progress_ >= length_; }

 private:
  double length_ = 0.0;
  double last_s_ = 0.0;
  double progress_ = 0.0;
};

bool check_lap_complete(const std::vector<double>& s_history, double total_length);

struct StepInfo {
  FrenetPose frenet;
  bool collision = false;
  bool lap_complete = false;
  bool timeout = false;
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct EnvConfig {
  VehicleConfig vehicle;
  LidarConfig lidar;
  EpisodeConfig episode;

  void validate() const;
  int frame_size() const { return lidar.beam_count + 3; }
  int observation_size() const { return episode.stack_depth * frame_size(); }
};

class RacingEnv {
 public:
  explicit RacingEnv(EnvConfig config);

  const EnvConfig& config() const { return config_; }
  int observation_size() const { return config_.observation_size(); }

  std::vector<double> reset(std::uint64_t seed, WorldPtr world);
  // Throws kResetRequired before the first reset and kEpisodeDone after the
  // episode has ended.
  StepResult step(const Action& action);

  bool started() const { return world_ != nullptr; }
  bool done() const { return done_; }
  int steps() const { return steps_; }
  const VehicleState& state() const { return state_; }
  const TrackWorld& world() const { return *world_; }
  const SensorEffectState& effects() const { return effects_; }
  double lap_progress() const { return lap_.progress(); }
  std::vector<double> observation() const;

 private:
  void push_frame(const Scan& scan, double speed);

  EnvConfig config_;
  WorldPtr world_;
  VehicleState state_;
  Action previous_action_;
  SensorEffectState effects_;
  Rng noise_rng_;
  std::deque<std::vector<double>> frames_;
  LapProgress lap_;
  int steps_ = 0;
  bool done_ = false;
};

}  // namespace trackforge
