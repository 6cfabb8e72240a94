#pragma once

#include "trackforge/vehicle.hpp"

namespace trackforge {

struct ActuatorTargets {
  double speed = 0.0;  // m/s
  double steer = 0.0;  // rad
};

Action clamp_action(const Action& a);

// Affine map from [-1, 1]^2 onto [v_min, v_max] x [-steer_max, steer_max];
// out-of-range and non-finite components are clamped first (NaN -> 0).
ActuatorTargets denormalize_action(const Action& a, const VehicleConfig& config);

// Advances one control period: control_dt / physics_dt explicit-Euler
// substeps of steering slew, first-order speed lag and the kinematic
// bicycle model about the rear axle.
VehicleState step_dynamics(const VehicleState& state, const ActuatorTargets& targets,
                           const VehicleConfig& config);

}  // namespace trackforge
