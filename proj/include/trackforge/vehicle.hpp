#pragma once

namespace trackforge {

// (x, y) is the rear-axle reference point of the bicycle model.
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // (-pi, pi]
  double speed = 0.0;    // m/s, >= 0
  double steer = 0.0;    // rad, |steer| <= steer_max
  double time = 0.0;     // s since episode start

  bool operator==(const VehicleState&) const = default;
};

// Normalized command, each component in [-1, 1].
struct Action {
  double speed_cmd = 0.0;
  double steer_cmd = 0.0;

  bool operator==(const Action&) const = default;
};

struct VehicleConfig {
  double wheelbase = 0.33;
  double width = 0.3;
  double length = 0.5;
  double v_min = 0.0;
  double v_max = 6.0;
  double steer_max = 0.4189;
  double speed_time_constant = 0.4;
  double steer_rate_max = 3.2;
  double physics_dt = 0.01;
  double control_dt = 0.1;

  // Throws Error(kInvalidArgument) naming the offending field.
  void validate() const;
  int substeps() const;
};

}  // namespace trackforge
