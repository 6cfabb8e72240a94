#pragma once

// Naive reference implementations sharing no code with the library beyond
// plain data types.

#include <functional>
#include <vector>

#include "trackforge/common.hpp"
#include "trackforge/sensors.hpp"
#include "trackforge/track.hpp"
#include "trackforge/vehicle.hpp"

namespace trackforge::oracle {

// O(beams x all segments) raycast against both walls and every obstacle edge.
std::vector<double> brute_force_scan(const VehicleState& state, const TrackMap& track,
                                     const LidarConfig& config);

// Separating-axis test for two convex polygons; touching counts as overlap.
bool sat_overlap(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

// Footprint collision against the track using only brute-force loops.
bool brute_force_collision(const VehicleState& state, const TrackMap& track,
                           const VehicleConfig& vehicle);

double reward(double v_s, double v_d, double d, double steer, bool collision);

// Central differences of f around x, perturbing each coordinate by h.
std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h);

// Textbook Adam on a flat vector, with global-norm clipping.
struct FlatAdam {
  std::vector<double> m, v;
  long step = 0;
  void update(std::vector<double>& params, std::vector<double> grad, double lr, double clip);
};

}  // namespace trackforge::oracle
