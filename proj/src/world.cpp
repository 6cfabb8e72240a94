#include "trackforge/world.hpp"

#include <utility>

namespace trackforge {

TrackWorld::TrackWorld(TrackMap track)
    : map(std::move(track)), index(map), scene(map), walls(wall_polylines(map)) {
  for (const auto* wall : {&walls.left, &walls.right}) {
    for (std::size_t i = 0; i + 1 < wall->size(); ++i) {
      wall_starts.push_back((*wall)[i]);
      wall_ends.push_back((*wall)[i + 1]);
    }
  }
  wall_grid = SegmentGrid(wall_starts, wall_ends, 1.0);
}

WorldPtr make_world(TrackMap track) {
  return std::make_shared<const TrackWorld>(std::move(track));
}

std::vector<WorldPtr> make_worlds(std::vector<TrackMap> tracks) {
  std::vector<WorldPtr> out;
  out.reserve(tracks.size());
  for (auto& t : tracks) out.push_back(make_world(std::move(t)));
  return out;
}

}  // namespace trackforge
