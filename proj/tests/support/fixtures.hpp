#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "trackforge/env.hpp"
#include "trackforge/track.hpp"
#include "trackforge/trackgen.hpp"
#include "trackforge/world.hpp"

namespace trackforge::testing {

// Long stadium whose bottom straight runs along y = 0 from x = 0 to
// x = straight, travelled towards +x.
TrackMap straight_corridor(double half_width = 2.0, double straight = 200.0);

// Easy generated tracks: gentle curvature, wide corridor, no obstacles.
TrackGenConfig easy_trackgen();
std::vector<TrackMap> easy_tracks(int count, std::uint64_t seed);

// Small-lidar environment used across the env, ppo and trainer tests.
EnvConfig small_env(int beams = 36);

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& path);

}  // namespace trackforge::testing
