#include <cmath>
#include <random>

#include "doctest.h"
#include "trackforge/common.hpp"
#include "trackforge/dynamics.hpp"
#include "trackforge/geometry.hpp"

using namespace trackforge;

TEST_CASE("denormalize action examples") {
  const VehicleConfig cfg;
  ActuatorTargets t = denormalize_action({-1, 0}, cfg);
  CHECK(t.speed == 0.0);
  CHECK(t.steer == 0.0);
  t = denormalize_action({1, 1}, cfg);
  CHECK(t.speed == 6.0);
  CHECK(t.steer == doctest::Approx(0.4189).epsilon(1e-12));
  t = denormalize_action({0, -0.5}, cfg);
  CHECK(t.speed == doctest::Approx(3.0));
  CHECK(t.steer == doctest::Approx(-0.20945).epsilon(1e-12));
}

TEST_CASE("out-of-range and non-finite actions are clamped") {
  const VehicleConfig cfg;
  ActuatorTargets t = denormalize_action({5, -7}, cfg);
  CHECK(t.speed == 6.0);
  CHECK(t.steer == doctest::Approx(-0.4189));
  t = denormalize_action({std::nan(""), INFINITY}, cfg);
  CHECK(t.speed == doctest::Approx(3.0));
  CHECK(t.steer == doctest::Approx(0.4189));
  const Action c = clamp_action({-2, 0.5});
  CHECK(c.speed_cmd == -1.0);
  CHECK(c.steer_cmd == 0.5);
}

TEST_CASE("straight-line motion") {
  const VehicleConfig cfg;
  const VehicleState s{1.0, 2.0, 0.0, 2.0, 0.0, 0.0};
  const VehicleState n = step_dynamics(s, {2.0, 0.0}, cfg);
  CHECK(std::abs(n.x - 1.2) < 1e-12);
  CHECK(n.y == 2.0);
  CHECK(n.heading == 0.0);
  CHECK(n.time == doctest::Approx(0.1));
}

TEST_CASE("constant steer closes a circle after one period") {
  const VehicleConfig cfg;
  const double delta = 0.3;
  const double radius = cfg.wheelbase / std::tan(delta);
  const int steps = 50;
  const double v = 2 * std::numbers::pi * radius / (steps * cfg.control_dt);
  VehicleState s{0, 0, 0, v, delta, 0};
  for (int i = 0; i < steps; ++i) s = step_dynamics(s, {v, delta}, cfg);
  CHECK(std::hypot(s.x, s.y) < 0.01 * 2 * std::numbers::pi * radius);
}

TEST_CASE("at rest nothing moves") {
  const VehicleConfig cfg;
  const VehicleState s{3, 4, 1.0, 0.0, 0.3, 0};
  const VehicleState n = step_dynamics(s, {0.0, -0.2}, cfg);
  CHECK(n.x == 3);
  CHECK(n.y == 4);
  CHECK(n.heading == 1.0);
}

TEST_CASE("state invariants hold under random commands") {
  const VehicleConfig cfg;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  VehicleState s{};
  for (int i = 0; i < 2000; ++i) {
    const VehicleState prev = s;
    s = step_dynamics(s, denormalize_action({u(rng), u(rng)}, cfg), cfg);
    CHECK(s.speed >= 0.0);
    CHECK(s.speed <= cfg.v_max);
    CHECK(std::abs(s.steer) <= cfg.steer_max);
    CHECK(s.heading > -std::numbers::pi);
    CHECK(s.heading <= std::numbers::pi);
    CHECK(std::abs(s.steer - prev.steer) <=
          cfg.steer_rate_max * cfg.control_dt + 1e-12);
  }
}

TEST_CASE("steering slew is limited per substep") {
  VehicleConfig cfg;
  cfg.control_dt = cfg.physics_dt;
  const VehicleState s{0, 0, 0, 1, 0, 0};
  const VehicleState n = step_dynamics(s, {1, cfg.steer_max}, cfg);
  CHECK(n.steer == doctest::Approx(cfg.steer_rate_max * cfg.physics_dt));
}

TEST_CASE("first-order convergence in physics_dt") {
  auto end_point = [](double dt) {
    VehicleConfig cfg;
    cfg.physics_dt = dt;
    VehicleState s{0, 0, 0, 3.0, 0.2, 0};
    for (int i = 0; i < 20; ++i) s = step_dynamics(s, {3.0, 0.2}, cfg);
    return Vec2{s.x, s.y};
  };
  const Vec2 a = end_point(0.01), b = end_point(0.005), c = end_point(0.0025);
  const double e1 = norm(a - b), e2 = norm(b - c);
  CHECK(e1 > 0);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("dynamics are deterministic") {
  const VehicleConfig cfg;
  const VehicleState s{0.1, 0.2, 0.3, 1.0, 0.1, 0};
  CHECK(step_dynamics(s, {4, -0.3}, cfg) == step_dynamics(s, {4, -0.3}, cfg));
}

TEST_CASE("vehicle config validation") {
  VehicleConfig cfg;
  cfg.control_dt = 0.105;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.v_min = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.steer_max = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.substeps() == 10);
}
