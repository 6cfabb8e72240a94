#pragma once

#include <memory>
#include <vector>

#include "trackforge/frenet.hpp"
#include "trackforge/geometry.hpp"
#include "trackforge/sensors.hpp"
#include "trackforge/track.hpp"

namespace trackforge {

// Immutable per-track lookup structures shared by every environment that
// drives on the track.
struct TrackWorld {
  TrackMap map;
  CenterlineIndex index;
  LidarScene scene;
  WallPolylines walls;
  // Wall segments: left wall first, then right wall.
  std::vector<Vec2> wall_starts;
  std::vector<Vec2> wall_ends;
  SegmentGrid wall_grid;

  explicit TrackWorld(TrackMap track);
};

using WorldPtr = std::shared_ptr<const TrackWorld>;

WorldPtr make_world(TrackMap track);
std::vector<WorldPtr> make_worlds(std::vector<TrackMap> tracks);

}  // namespace trackforge
