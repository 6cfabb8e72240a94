#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "trackforge/env.hpp"

using namespace trackforge;
using testing::small_env;
using testing::straight_corridor;

namespace {

WorldPtr corridor_world(double half_width = 2.0) { return make_world(straight_corridor(half_width)); }

}  // namespace

TEST_CASE("reward examples") {
  const RewardCoefficients c;
  CHECK(compute_reward({0, 0.1, 2.0, 0.5}, {0, 0.3}, false, c) == doctest::Approx(1.963).epsilon(1e-12));
  CHECK(compute_reward({}, {}, false, c) == 0.0);
  CHECK(compute_reward({5, 1, 3, 2}, {1, 1}, true, c) == -1000.0);
  CHECK(compute_reward({0, -0.1, 2.0, -0.5}, {0, -0.3}, false, c) ==
        doctest::Approx(1.963).epsilon(1e-12));
}

TEST_CASE("reset produces a well-formed deterministic observation") {
  const EnvConfig cfg = small_env();
  RacingEnv env(cfg);
  const auto world = corridor_world();
  const auto a = env.reset(3, world);
  REQUIRE(a.size() == static_cast<std::size_t>(4 * (36 + 3)));
  const int f = cfg.frame_size();
  for (int frame = 0; frame < 4; ++frame) {
    for (int k = 0; k < 36; ++k) {
      CHECK(a[frame * f + k] >= 0.0);
      CHECK(a[frame * f + k] <= 1.0);
    }
    CHECK(a[frame * f + 36] == 0.0);   // at rest
    CHECK(a[frame * f + 37] == -1.0);  // previous speed command
    CHECK(a[frame * f + 38] == 0.0);   // previous steer command
  }
  RacingEnv other(cfg);
  CHECK(other.reset(3, world) == a);
  CHECK(env.state().speed == 0.0);
  CHECK(env.state().x == world->map.spawn.x);
}

TEST_CASE("step before reset and after done") {
  EnvConfig cfg = small_env();
  cfg.episode.max_steps = 2;
  RacingEnv env(cfg);
  try {
    env.step({0, 0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kResetRequired);
  }
  env.reset(1, corridor_world());
  env.step({-1, 0});
  const auto r = env.step({-1, 0});
  CHECK(r.done);
  for (int i = 0; i < 2; ++i) {
    try {
      env.step({0, 0});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kEpisodeDone);
    }
  }
}

TEST_CASE("full throttle down a straight: v_s grows over early steps") {
  RacingEnv env(small_env());
  env.reset(2, corridor_world());
  double prev = 0.0;
  for (int i = 0; i < 8; ++i) {
    const auto r = env.step({1, 0});
    CHECK_FALSE(r.done);
    CHECK(r.info.frenet.v_s > prev);
    prev = r.info.frenet.v_s;
  }
}

TEST_CASE("driving into a wall collides with the penalty") {
  TrackMap t = straight_corridor(2.0);
  // Front bumper 0.1 m from the left wall, facing it.
  const VehicleConfig v;
  t.spawn = {100.0, 2.0 - 0.1 - (0.5 * v.wheelbase + 0.5 * v.length), std::numbers::pi / 2};
  RacingEnv env(small_env());
  env.reset(0, make_world(t));
  StepResult r;
  int steps = 0;
  do {
    r = env.step({1, 0});
    ++steps;
  } while (!r.done && steps < 5);
  CHECK(r.done);
  CHECK(r.info.collision);
  CHECK(r.reward == -1000.0);
  CHECK(steps <= 3);
}

TEST_CASE("timeout ends the episode without a penalty") {
  EnvConfig cfg = small_env();
  cfg.episode.max_steps = 5;
  RacingEnv env(cfg);
  env.reset(0, corridor_world());
  StepResult r;
  for (int i = 0; i < 5; ++i) {
    CHECK_FALSE(r.done);
    r = env.step({-1, 0});
  }
  CHECK(r.done);
  CHECK(r.info.timeout);
  CHECK_FALSE(r.info.collision);
  CHECK(r.reward > -1.0);
}

TEST_CASE("done equals the disjunction of its causes, and rewards stay bounded") {
  const EnvConfig cfg = small_env();
  RacingEnv env(cfg);
  const auto pool = make_worlds(testing::easy_tracks(2, 5));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  const double bound = cfg.episode.reward.c_vs * cfg.vehicle.v_max +
                       cfg.episode.reward.c_vd * cfg.vehicle.v_max +
                       cfg.episode.reward.c_d * pool[0]->map.max_half_width() +
                       cfg.episode.reward.c_steer;
  for (int ep = 0; ep < 6; ++ep) {
    env.reset(ep, pool[ep % 2]);
    StepResult r;
    do {
      r = env.step({u(rng), u(rng) * 0.3});
      CHECK(r.done == (r.info.collision || r.info.lap_complete || r.info.timeout));
      if (!r.info.collision) CHECK(std::abs(r.reward) <= bound + 1e-9);
      for (double x : r.observation) CHECK(std::isfinite(x));
    } while (!r.done);
  }
}

TEST_CASE("frames are stacked oldest first") {
  const EnvConfig cfg = small_env(8);
  RacingEnv env(cfg);
  env.reset(0, corridor_world());
  const int f = cfg.frame_size();
  const auto r1 = env.step({0.5, 0.2});
  const auto r2 = env.step({0.1, -0.4});
  CHECK(r2.observation[3 * f + 9] == doctest::Approx(0.1));
  CHECK(r2.observation[3 * f + 10] == doctest::Approx(-0.4));
  CHECK(r2.observation[2 * f + 9] == doctest::Approx(0.5));
  for (int i = 0; i < 3 * f; ++i) CHECK(r2.observation[i] == r1.observation[i + f]);
}

TEST_CASE("same seed, track and actions give the same trajectory") {
  const EnvConfig cfg = small_env();
  const auto w = make_world(testing::easy_tracks(1, 3)[0]);
  auto run = [&] {
    RacingEnv env(cfg);
    env.reset(11, w);
    std::vector<double> trace;
    for (int i = 0; i < 60; ++i) {
      const auto r = env.step({std::sin(i * 0.3), 0.2 * std::cos(i * 0.1)});
      trace.push_back(r.reward);
      trace.insert(trace.end(), r.observation.begin(), r.observation.end());
      if (r.done) break;
    }
    return trace;
  };
  CHECK(run() == run());
}

TEST_CASE("an immediately crashing policy returns about -1000") {
  TrackMap t = straight_corridor(1.0);
  const VehicleConfig v;
  t.spawn = {100.0, 1.0 - 0.1 - (0.5 * v.wheelbase + 0.5 * v.length), std::numbers::pi / 2};
  RacingEnv env(small_env());
  env.reset(0, make_world(t));
  double ret = 0.0, max_step = -INFINITY;
  StepResult r;
  int n = 0;
  do {
    r = env.step({1, 0});
    ret += r.reward;
    if (!r.done) max_step = std::max(max_step, r.reward);
    ++n;
  } while (!r.done);
  CHECK(n <= 2);
  CHECK(ret <= -1000.0 + std::max(0.0, max_step));
}

TEST_CASE("collision examples") {
  const VehicleConfig v;
  const auto world = corridor_world();
  CHECK_FALSE(check_collision({100, 0, 0, 0, 0, 0}, *world, v));
  CHECK(check_collision({100, 2.0, 0, 0, 0, 0}, *world, v));
  CHECK(check_collision({100, 20.0, 0, 0, 0, 0}, *world, v));  // in the infield

  // A triangle whose only contact is one footprint corner.
  TrackMap t = straight_corridor(2.0);
  const VehicleState s{100, 0.3, 0.4, 0, 0, 0};
  const auto fp = vehicle_footprint(s, v);
  Vec2 corner = fp[0];
  for (const Vec2& c : fp) {
    if (c.x + c.y > corner.x + corner.y) corner = c;
  }
  t.obstacles.push_back({{corner, corner + Vec2{0.5, 0.1}, corner + Vec2{0.2, 0.6}}, 0, 0});
  CHECK(check_collision(s, t, v));
  CHECK(oracle::brute_force_collision(s, t, v));
  t.obstacles[0].vertices = {corner + Vec2{1e-6, 1e-6}, corner + Vec2{0.5, 0.1},
                             corner + Vec2{0.2, 0.6}};
  CHECK_FALSE(check_collision(s, t, v));
}

TEST_CASE("world and map collision overloads agree with the oracle") {
  const VehicleConfig v;
  const TrackMap t = generate_track_with_obstacles(3, TrackGenConfig{});
  const auto w = make_world(t);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> us(0, t.total_length), ud(-1.2, 1.2), uh(-3.14, 3.14);
  for (int i = 0; i < 300; ++i) {
    const double s = us(rng);
    const Vec2 p = w->index.from_frenet(s, ud(rng) * t.half_width_at(s));
    const VehicleState st{p.x, p.y, uh(rng), 0, 0, 0};
    const bool a = check_collision(st, *w, v);
    CHECK(a == check_collision(st, t, v));
    CHECK(a == oracle::brute_force_collision(st, t, v));
  }
}

TEST_CASE("lap completion") {
  const double L = 100.0;
  std::vector<double> sweep;
  for (int i = 0; i <= 210; ++i) sweep.push_back(std::fmod(i * 0.5, L));
  CHECK(check_lap_complete(sweep, L));

  std::vector<double> osc;
  for (int i = 0; i < 5000; ++i) osc.push_back(i % 2 ? 1.0 : 0.0);
  CHECK_FALSE(check_lap_complete(osc, L));

  std::vector<double> jitter;
  double s = 0.0;
  for (int i = 0; i < 400; ++i) {
    s += (i % 3 == 2) ? -0.2 : 0.5;
    jitter.push_back(std::fmod(s + L, L));
  }
  CHECK(check_lap_complete(jitter, L));

  std::vector<double> backwards;
  for (int i = 0; i <= 250; ++i) backwards.push_back(std::fmod(L - i * 0.5 + 10 * L, L));
  CHECK_FALSE(check_lap_complete(backwards, L));
}

TEST_CASE("episode config validation") {
  EpisodeConfig c;
  c.max_steps = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.stack_depth = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}
