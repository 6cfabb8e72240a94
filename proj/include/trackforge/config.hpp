#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "trackforge/env.hpp"
#include "trackforge/trackgen.hpp"
#include "trackforge/trainer.hpp"

namespace trackforge {

struct PathsConfig {
  std::string track_pool_dir = "tracks";
  std::string output_dir = "runs/default";
};

struct RunConfig {
  TrackGenConfig trackgen;
  VehicleConfig vehicle;
  LidarConfig lidar;
  EpisodeConfig episode;
  TrainerConfig trainer;
  PathsConfig paths;
  std::uint64_t seed = 0;

  EnvConfig env() const { return {vehicle, lidar, episode}; }
  // Trainer settings with the master seed applied.
  TrainerConfig trainer_config() const;
};

// Missing sections and fields keep their defaults; unknown keys and bad
// types are rejected with a message naming the field path.
RunConfig parse_run_config(const std::string& json_text, const std::string& origin = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& config);

// Applies the TRACKFORGE_SEED environment variable when set.
void apply_seed_override(RunConfig& config);

// Validates every sub-config. With check_paths, requires the track pool
// directory to exist.
void validate_run_config(const RunConfig& config, bool check_paths);

}  // namespace trackforge
