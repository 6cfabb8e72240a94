#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trackforge/track.hpp"
#include "trackforge/vehicle.hpp"

namespace trackforge {

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  std::optional<double> speed;
};

// CSV with header "t,x,y,heading" and an optional trailing "speed" column.
std::vector<TrajectorySample> parse_trajectory(const std::string& text,
                                               const std::string& origin = "<trajectory>");
std::vector<TrajectorySample> load_trajectory(const std::filesystem::path& path);
std::string format_trajectory(const std::vector<VehicleState>& states);

struct ReplayRender {
  std::string svg;
  double path_length = 0.0;
  // Samples whose position lies well outside the corridor.
  std::size_t outside_samples = 0;
};

ReplayRender render_replay(const TrackMap& track, const std::vector<TrajectorySample>& trajectory);

}  // namespace trackforge
