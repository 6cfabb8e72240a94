#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "trackforge/plot.hpp"
#include "trackforge/replay.hpp"

using namespace trackforge;

namespace {

// One lap around the circle's centreline at constant speed.
std::vector<VehicleState> circle_lap(double radius, double speed, double dt) {
  std::vector<VehicleState> out;
  const double period = 2.0 * std::numbers::pi * radius / speed;
  for (double t = 0.0; t <= period + 1e-9; t += dt) {
    const double a = speed * t / radius;
    out.push_back({radius * std::cos(a), radius * std::sin(a), a + std::numbers::pi / 2, speed, 0.0, t});
  }
  return out;
}

}  // namespace

TEST_CASE("moving average over a trailing window") {
  const auto m = moving_average({1, 2, 3, 4, 5}, 2);
  CHECK(m == std::vector<double>{1.0, 1.5, 2.5, 3.5, 4.5});
  CHECK(moving_average({}, 3).empty());
  CHECK(moving_average({4, 8}, 10) == std::vector<double>{4.0, 6.0});
}

TEST_CASE("svg text is escaped") {
  CHECK(svg_escape("a<b & \"c\">") == "a&lt;b &amp; &quot;c&quot;&gt;");
  const std::string svg = render_line_chart({{"r<1>", {0, 1, 2}, {1, 3, 2}}}, {"T&T", "step", "y", std::nullopt, std::nullopt});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("T&amp;T") != std::string::npos);
  CHECK(svg.find("r&lt;1&gt;") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
}

TEST_CASE("chart tolerates empty and non-finite series") {
  CHECK_NOTHROW(render_line_chart({}, {}));
  const std::string svg = render_line_chart({{"nan", {0, 1}, {NAN, INFINITY}}}, {});
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("training plots are written") {
  testing::TempDir dir("plots");
  std::vector<MetricsRow> rows;
  for (int i = 1; i <= 5; ++i) {
    MetricsRow r;
    r.update = i;
    r.step = 256 * i;
    if (i != 2) r.mean_ep_reward = 10.0 * i;
    r.success_rate = 0.2 * (i - 1);
    rows.push_back(r);
  }
  write_training_plots(rows, dir.path());
  const std::string reward = testing::slurp(dir.path() / "reward_curve.svg");
  const std::string success = testing::slurp(dir.path() / "success_rate.svg");
  CHECK(reward.find("<polyline") != std::string::npos);
  CHECK(success.find("<polyline") != std::string::npos);
  CHECK_NOTHROW(write_training_plots({}, dir.path()));
}

TEST_CASE("trajectory csv parsing") {
  const auto t = parse_trajectory("t,x,y,heading\n0,1,2,0.5\n0.1,1.5,2,0.5\n");
  REQUIRE(t.size() == 2);
  CHECK(t[1].x == 1.5);
  CHECK_FALSE(t[0].speed.has_value());
  const auto s = parse_trajectory("t,x,y,heading,speed\n0,0,0,0,3.5\n");
  CHECK(s[0].speed == 3.5);
  auto code_of = [](const std::string& text) {
    try {
      parse_trajectory(text, "traj.csv");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("traj.csv") != std::string::npos);
      return e.code();
    }
    return ErrorCode::kIo;
  };
  CHECK(code_of("a,b,c\n") == ErrorCode::kMalformedFile);
  CHECK(code_of("t,x,y,heading\n0,1,2\n") == ErrorCode::kMalformedFile);
  CHECK(code_of("t,x,y,heading\n0,1,zz,0\n") == ErrorCode::kMalformedFile);
  CHECK(parse_trajectory("").empty());
}

TEST_CASE("full-lap replay path length matches odometry") {
  const TrackMap track = make_circle_track({0, 0}, 20.0, 2.0, 0.25);
  const auto states = circle_lap(20.0, 5.0, 0.1);
  const auto traj = parse_trajectory(format_trajectory(states));
  REQUIRE(traj.size() == states.size());
  const ReplayRender r = render_replay(track, traj);
  double odometry = 0.0;
  for (std::size_t i = 1; i < states.size(); ++i) {
    odometry += states[i - 1].speed * (states[i].time - states[i - 1].time);
  }
  CHECK(std::abs(r.path_length - odometry) / odometry < 0.05);
  CHECK(r.outside_samples == 0);
  CHECK(r.svg.find("<svg") != std::string::npos);
  CHECK(r.svg.find("</svg>") != std::string::npos);
  CHECK(render_replay(track, {}).svg.find("</svg>") != std::string::npos);
}

TEST_CASE("mismatched trajectory is flagged") {
  const TrackMap track = make_circle_track({0, 0}, 20.0, 2.0, 0.25);
  auto states = circle_lap(20.0, 5.0, 0.5);
  for (auto& s : states) s.x += 100.0;
  const ReplayRender r = render_replay(track, parse_trajectory(format_trajectory(states)));
  CHECK(r.outside_samples == states.size());
}
