#include "trackforge/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trackforge/common.hpp"

namespace trackforge {
namespace {

void fail(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kInvalidArgument, "vehicle." + field + ": " + why);
}

double clamp_unit(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, -1.0, 1.0);
}

}  // namespace

void VehicleConfig::validate() const {
  if (!(wheelbase > 0.0)) fail("wheelbase", "must be > 0");
  if (!(width > 0.0)) fail("width", "must be > 0");
  if (!(length > 0.0)) fail("length", "must be > 0");
  if (!(v_min >= 0.0)) fail("v_min", "must be >= 0");
  if (!(v_max > v_min)) fail("v_max", "must exceed v_min");
  if (!(steer_max > 0.0)) fail("steer_max", "must be > 0");
  if (!(speed_time_constant > 0.0)) fail("speed_time_constant", "must be > 0");
  if (!(steer_rate_max > 0.0)) fail("steer_rate_max", "must be > 0");
  if (!(physics_dt > 0.0)) fail("physics_dt", "must be > 0");
  if (!(control_dt >= physics_dt)) fail("control_dt", "must be >= physics_dt");
  const double ratio = control_dt / physics_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    fail("control_dt", "must be an integer multiple of physics_dt");
  }
  if (physics_dt >= speed_time_constant) {
    fail("physics_dt", "must be smaller than speed_time_constant");
  }
}

int VehicleConfig::substeps() const {
  return static_cast<int>(std::lround(control_dt / physics_dt));
}

Action clamp_action(const Action& a) {
  return {clamp_unit(a.speed_cmd), clamp_unit(a.steer_cmd)};
}

ActuatorTargets denormalize_action(const Action& a, const VehicleConfig& c) {
  const Action u = clamp_action(a);
  return {c.v_min + (u.speed_cmd + 1.0) * 0.5 * (c.v_max - c.v_min),
          u.steer_cmd * c.steer_max};
}

VehicleState step_dynamics(const VehicleState& state, const ActuatorTargets& targets,
                           const VehicleConfig& c) {
  VehicleState s = state;
  const double dt = c.physics_dt;
  const double speed_target = std::clamp(targets.speed, c.v_min, c.v_max);
  const double steer_target = std::clamp(targets.steer, -c.steer_max, c.steer_max);
  const double max_slew = c.steer_rate_max * dt;
  const double lag = dt / c.speed_time_constant;
  const int n = c.substeps();
  for (int k = 0; k < n; ++k) {
    s.steer += std::clamp(steer_target - s.steer, -max_slew, max_slew);
    s.steer = std::clamp(s.steer, -c.steer_max, c.steer_max);
    s.speed += (speed_target - s.speed) * lag;
    s.speed = std::clamp(s.speed, c.v_min, c.v_max);
    s.x += s.speed * std::cos(s.heading) * dt;
    s.y += s.speed * std::sin(s.heading) * dt;
    s.heading = wrap_angle(s.heading + s.speed * std::tan(s.steer) / c.wheelbase * dt);
  }
  s.time = state.time + c.control_dt;
  return s;
}

}  // namespace trackforge
