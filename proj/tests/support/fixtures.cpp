#include "fixtures.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace trackforge::testing {

TrackMap straight_corridor(double half_width, double straight) {
  const double radius = std::max(20.0, 2.0 * half_width);
  const TrackMap s = make_stadium_track(straight, radius, half_width, 0.25);
  std::vector<Vec2> pts(s.centerline.begin(), s.centerline.end() - 1);
  for (Vec2& p : pts) p.y += radius;
  return make_track(std::move(pts), std::vector<double>(pts.size(), half_width), 0, 0.25);
}

TrackGenConfig easy_trackgen() {
  TrackGenConfig c;
  c.radius_jitter = 2.0;
  c.width_range = {1.6, 2.0};
  c.obstacle_count_range = {0, 0};
  return c;
}

std::vector<TrackMap> easy_tracks(int count, std::uint64_t seed) {
  std::vector<TrackMap> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(generate_track(derive_seed(seed, static_cast<std::uint64_t>(i)), easy_trackgen()));
  }
  return out;
}

EnvConfig small_env(int beams) {
  EnvConfig c;
  c.lidar.beam_count = beams;
  return c;
}

TempDir::TempDir(const std::string& tag) {
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("trackforge_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace trackforge::testing
