#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "trackforge/frenet.hpp"
#include "trackforge/trackgen.hpp"

using namespace trackforge;

namespace {

TrackMap square10() {
  return make_track({{0, 0}, {10, 0}, {10, 10}, {0, 10}}, {1, 1, 1, 1});
}

}  // namespace

TEST_CASE("circle total length") {
  const CenterlineIndex idx(make_circle_track({0, 0}, 20.0, 2.0, 0.25));
  CHECK(std::abs(idx.total_length() - 2 * std::numbers::pi * 20) < 0.01 * 2 * std::numbers::pi * 20);
}

TEST_CASE("square of side 10") {
  const CenterlineIndex idx(square10());
  CHECK(idx.total_length() == 40.0);
  const auto segs = idx.segments();
  REQUIRE(segs.size() == 4);
  const Vec2 expected[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int i = 0; i < 4; ++i) {
    CHECK(segs[i].tangent.x == doctest::Approx(expected[i].x));
    CHECK(segs[i].tangent.y == doctest::Approx(expected[i].y));
    CHECK(segs[i].normal == perp(segs[i].tangent));
  }
}

TEST_CASE("duplicated consecutive point is a degenerate segment") {
  TrackMap t = square10();
  t.centerline.insert(t.centerline.begin() + 2, t.centerline[2]);
  t.half_width.insert(t.half_width.begin() + 2, 1.0);
  t.cum_s.insert(t.cum_s.begin() + 2, t.cum_s[2]);
  try {
    CenterlineIndex idx(t);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateSegment);
  }
}

TEST_CASE("segment invariants on generated tracks") {
  const TrackMap t = generate_track(9, TrackGenConfig{});
  const CenterlineIndex idx(t);
  double sum = 0;
  for (const auto& s : idx.segments()) {
    CHECK(std::abs(norm(s.tangent) - 1.0) < 1e-9);
    CHECK(s.normal == perp(s.tangent));
    sum += s.length;
  }
  CHECK(std::abs(sum - idx.total_length()) <= 1e-9 * idx.total_length());
}

TEST_CASE("axis-aligned projection") {
  const CenterlineIndex idx(testing::straight_corridor());
  const FrenetPoint f = idx.to_frenet({3.0, 0.5});
  CHECK(f.s == doctest::Approx(3.0));
  CHECK(f.d == doctest::Approx(0.5));
  const Vec2 p = idx.from_frenet(3.0, 0.5);
  CHECK(p.x == doctest::Approx(3.0));
  CHECK(p.y == doctest::Approx(0.5));
}

TEST_CASE("analytic circle: inside is left") {
  const CenterlineIndex idx(make_circle_track({0, 0}, 10.0, 2.0, 0.05));
  const FrenetPoint f = idx.to_frenet({0.0, 9.0});
  CHECK(std::abs(f.s - 10 * std::numbers::pi / 2) < 1e-3);
  CHECK(std::abs(f.d - 1.0) < 1e-3);
}

TEST_CASE("centerline vertices map to their cumulative arc length") {
  const TrackMap t = generate_track(4, TrackGenConfig{});
  const CenterlineIndex idx(t);
  for (std::size_t k = 0; k + 1 < t.centerline.size(); k += 37) {
    const FrenetPoint f = idx.to_frenet(t.centerline[k]);
    CHECK(std::abs(f.s - t.cum_s[k]) < 1e-9);
    CHECK(std::abs(f.d) < 1e-9);
  }
  const Vec2 p0 = idx.from_frenet(0, 0);
  CHECK(p0 == t.centerline[0]);
}

TEST_CASE("round trip on generated tracks") {
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const TrackMap t = generate_track(seed, TrackGenConfig{});
    const CenterlineIndex idx(t);
    std::uniform_real_distribution<double> us(0, t.total_length), ud(-1, 1);
    for (int i = 0; i < 300; ++i) {
      const double s = us(rng);
      const double d = ud(rng) * t.half_width_at(s);
      const FrenetPoint f = idx.to_frenet(idx.from_frenet(s, d));
      double ds = std::abs(f.s - s);
      ds = std::min(ds, t.total_length - ds);
      CHECK(ds < 1e-6);
      CHECK(std::abs(f.d - d) < 1e-6);
    }
  }
}

TEST_CASE("mirroring the track flips the sign of d") {
  const TrackMap t = generate_track(12, TrackGenConfig{});
  std::vector<Vec2> pts(t.centerline.begin(), t.centerline.end() - 1);
  for (Vec2& p : pts) p.y = -p.y;
  const TrackMap m = make_track(pts, std::vector<double>(t.half_width.begin(), t.half_width.end() - 1));
  const CenterlineIndex a(t), b(m);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> us(0, t.total_length), ud(-1, 1);
  for (int i = 0; i < 100; ++i) {
    const Vec2 p = a.from_frenet(us(rng), ud(rng));
    const FrenetPoint fa = a.to_frenet(p);
    const FrenetPoint fb = b.to_frenet({p.x, -p.y});
    CHECK(fb.d == doctest::Approx(-fa.d).epsilon(1e-9));
    CHECK(fb.s == doctest::Approx(fa.s).epsilon(1e-9));
  }
}

TEST_CASE("out-of-corridor query throws") {
  const CenterlineIndex idx(make_circle_track({0, 0}, 20.0, 1.0, 0.25));
  try {
    idx.to_frenet({0, 0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOutOfCorridor);
  }
}

TEST_CASE("nearest segment ties go to the smaller s") {
  // (5, 5) is equidistant from all four sides of the square.
  const CenterlineIndex idx(square10());
  double dist = 0;
  CHECK(idx.nearest_segment({5, 5}, &dist) == 0);
  CHECK(dist == doctest::Approx(5.0));
}

TEST_CASE("s is continuous along a path except at the wrap") {
  const TrackMap t = generate_track(6, TrackGenConfig{});
  const CenterlineIndex idx(t);
  double prev = idx.to_frenet(idx.from_frenet(0.01, 0.5)).s;
  int wraps = 0;
  for (double s = 0.02; s < t.total_length + 0.5; s += 0.01) {
    const double cur = idx.to_frenet(idx.from_frenet(s, 0.5 * std::sin(s))).s;
    if (cur < prev) {
      ++wraps;
      CHECK(prev - cur > 0.9 * t.total_length);
    } else {
      CHECK(cur - prev < 0.05);
    }
    prev = cur;
  }
  CHECK(wraps == 1);
}

TEST_CASE("velocity decomposition examples") {
  const TrackMap t = testing::straight_corridor(2.0);
  const CenterlineIndex idx(t);
  VehicleState s{50.0, 0.3, 0.0, 2.0, 0.0, 0.0};
  FrenetVelocity v = idx.frenet_velocity(s);
  CHECK(v.v_s == doctest::Approx(2.0));
  CHECK(std::abs(v.v_d) < 1e-12);

  s.heading = std::numbers::pi / 2;
  s.speed = 1.5;
  v = idx.frenet_velocity(s);
  CHECK(std::abs(v.v_s) < 1e-12);
  CHECK(v.v_d == doctest::Approx(1.5));

  s.heading = std::numbers::pi / 6;
  s.speed = 2.0;
  v = idx.frenet_velocity(s);
  CHECK(v.v_s == doctest::Approx(std::sqrt(3.0)));
  CHECK(v.v_d == doctest::Approx(1.0));

  const FrenetPose p = idx.frenet_pose(s);
  CHECK(p.s == doctest::Approx(50.0));
  CHECK(p.d == doctest::Approx(0.3));
  CHECK(p.v_s == v.v_s);
  CHECK(p.v_d == v.v_d);
}

TEST_CASE("velocity components preserve speed") {
  const TrackMap t = generate_track(8, TrackGenConfig{});
  const CenterlineIndex idx(t);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> us(0, t.total_length), ud(-1, 1), uh(-3.14, 3.14),
      uv(0, 6);
  for (int i = 0; i < 200; ++i) {
    const Vec2 p = idx.from_frenet(us(rng), ud(rng));
    const VehicleState s{p.x, p.y, uh(rng), uv(rng), 0, 0};
    const FrenetVelocity v = idx.frenet_velocity(s);
    const double lhs = v.v_s * v.v_s + v.v_d * v.v_d;
    CHECK(std::abs(lhs - s.speed * s.speed) <= 1e-9 * std::max(1.0, s.speed * s.speed));
  }
}
