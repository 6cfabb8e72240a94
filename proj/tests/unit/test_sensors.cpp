#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "trackforge/sensors.hpp"

using namespace trackforge;

TEST_CASE("perpendicular beams in a 4 m corridor read 2 m") {
  const TrackMap t = testing::straight_corridor(2.0);
  LidarConfig cfg;
  cfg.beam_count = 7;  // k * 45 degrees from -135
  const VehicleState s{100.0, 0.0, 0.0, 0, 0, 0};
  const Scan scan = scan_lidar(s, t, cfg);
  CHECK(std::abs(scan.ranges[1] - 2.0) < 1e-9);
  CHECK(std::abs(scan.ranges[5] - 2.0) < 1e-9);
  CHECK(scan.ranges[3] == 10.0);
}

TEST_CASE("nothing within range reads max_range") {
  const TrackMap t = make_circle_track({0, 0}, 100.0, 30.0, 0.5);
  LidarConfig cfg;
  cfg.beam_count = 108;
  const VehicleState s{100.0, 0.0, std::numbers::pi / 2, 0, 0, 0};
  for (double r : scan_lidar(s, t, cfg).ranges) CHECK(r == 10.0);
}

TEST_CASE("obstacle edge 3 m ahead of the mount") {
  TrackMap t = testing::straight_corridor(5.0);
  LidarConfig cfg;
  cfg.beam_count = 5;
  const VehicleState s{100.0, 0.0, 0.0, 0, 0, 0};
  const Vec2 o = lidar_origin(s, cfg);
  const double x = o.x + 3.0;
  t.obstacles.push_back({{{x, -0.5}, {x + 1, -0.5}, {x + 1, 0.5}, {x, 0.5}}, 0, 0});
  const Scan scan = scan_lidar(s, t, cfg);
  CHECK(std::abs(scan.ranges[2] - 3.0) < 1e-9);
  CHECK(std::abs(oracle::brute_force_scan(s, t, cfg)[2] - 3.0) < 1e-9);
}

TEST_CASE("production raycaster matches brute force on generated tracks") {
  LidarConfig cfg;
  cfg.beam_count = 61;
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const TrackMap t = generate_track_with_obstacles(seed, TrackGenConfig{});
    const LidarScene scene(t);
    const CenterlineIndex idx(t);
    std::uniform_real_distribution<double> us(0, t.total_length), ud(-0.8, 0.8), uh(-3.1, 3.1);
    for (int i = 0; i < 20; ++i) {
      const double s = us(rng);
      const Vec2 p = idx.from_frenet(s, ud(rng) * t.half_width_at(s));
      const VehicleState st{p.x, p.y, uh(rng), 0, 0, 0};
      const auto a = scan_lidar(st, scene, cfg).ranges;
      const auto b = oracle::brute_force_scan(st, t, cfg);
      for (int k = 0; k < cfg.beam_count; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-9);
    }
  }
}

TEST_CASE("beam angles increase and are symmetric for odd counts") {
  LidarConfig cfg;
  cfg.beam_count = 9;
  const auto a = beam_angles(0.4, cfg);
  for (std::size_t k = 1; k < a.size(); ++k) CHECK(a[k] > a[k - 1]);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK((a[k] - 0.4) == doctest::Approx(-(a[a.size() - 1 - k] - 0.4)));
  }
  CHECK(a[4] == 0.4);
  cfg.beam_count = 1;
  CHECK(beam_angles(0.4, cfg) == std::vector<double>{0.4});
}

TEST_CASE("normalization") {
  LidarConfig cfg;
  cfg.beam_count = 4;
  const auto n = normalize_scan({{5.0, 12.0, 0.0, std::nan("")}}, cfg);
  CHECK(n[0] == 0.5);
  CHECK(n[1] == 1.0);
  CHECK(n[2] == 0.0);
  CHECK(n[3] == 1.0);
}

TEST_CASE("identity effects pass readings through") {
  SensorEffectState fx(0.0, 0, 10.0);
  Rng rng(1);
  const Scan s{{1.0, 2.5, 9.0}};
  const auto r = fx.apply(s, 3.3, rng);
  CHECK(r.scan.ranges == s.ranges);
  CHECK(r.speed == 3.3);
}

TEST_CASE("delay returns the reading submitted delay steps earlier") {
  SensorEffectState fx(0.0, 2, 10.0);
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const auto r = fx.apply({{static_cast<double>(t)}}, t, rng);
    const double expected = t >= 2 ? t - 2 : 0;  // warm-up holds the oldest frame
    CHECK(r.scan.ranges[0] == expected);
    CHECK(r.speed == expected);
    CHECK(fx.buffered() <= 3);
  }
  CHECK(fx.buffered() == 3);
}

TEST_CASE("noise statistics") {
  SensorEffectState fx(0.02, 0, 10.0);
  Rng rng(123);
  const int n = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double v = fx.apply({{5.0}}, 1.0, rng).scan.ranges[0];
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double std = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean - 5.0) < 0.001);
  CHECK(std::abs(std - 0.02) < 0.002);
}

TEST_CASE("noisy readings stay in range") {
  SensorEffectState fx(0.5, 1, 10.0);
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto r = fx.apply({{0.1, 9.95}}, 0.01, rng);
    for (double v : r.scan.ranges) {
      CHECK(v >= 0.0);
      CHECK(v <= 10.0);
    }
    CHECK(r.speed >= 0.0);
  }
}

TEST_CASE("effect sampling") {
  LidarConfig cfg;
  cfg.noise_sigma_range = {0, 0};
  cfg.delay_steps_range = {0, 0};
  const auto id = sample_effects(4, cfg);
  CHECK(id.sigma() == 0.0);
  CHECK(id.delay() == 0);

  cfg = {};
  const auto a = sample_effects(77, cfg), b = sample_effects(77, cfg);
  CHECK(a.sigma() == b.sigma());
  CHECK(a.delay() == b.delay());
  CHECK(a.sigma() >= 0.0);
  CHECK(a.sigma() <= 0.03);

  int counts[3] = {};
  for (std::uint64_t seed = 0; seed < 10000; ++seed) ++counts[sample_effects(seed, cfg).delay()];
  for (int c : counts) CHECK(std::abs(c / 10000.0 - 1.0 / 3.0) < 0.05 / 3.0);
}

TEST_CASE("lidar config validation") {
  LidarConfig cfg;
  cfg.beam_count = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.fov = 7.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.max_range = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
