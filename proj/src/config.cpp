#include "trackforge/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <set>

#include "json.hpp"
#include "trackforge/checkpoint.hpp"

namespace trackforge {
namespace {

using nlohmann::json;

// Reads fields out of a JSON object, rejecting unknown keys.
class FromJson {
 public:
  FromJson(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_, "must be an object");
  }
  void finish() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!seen_.count(key)) fail(join(key), "unknown field");
    }
  }

  template <typename T>
  void field(const char* name, T& value) {
    seen_.insert(name);
    const auto it = obj_.find(name);
    if (it == obj_.end()) return;
    read(*it, join(name), value);
  }

  template <typename Fn>
  void section(const char* name, Fn&& fn) {
    seen_.insert(name);
    const auto it = obj_.find(name);
    if (it == obj_.end()) return;
    FromJson sub(*it, join(name));
    fn(sub);
    sub.finish();
  }

 private:
  [[noreturn]] static void fail(const std::string& path, const std::string& why) {
    throw Error(ErrorCode::kInvalidArgument, path + ": " + why);
  }
  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  static void read(const json& j, const std::string& path, double& v) {
    if (!j.is_number()) fail(path, "expected a number");
    v = j.get<double>();
  }
  static void read(const json& j, const std::string& path, int& v) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    const auto x = j.get<std::int64_t>();
    if (x < INT32_MIN || x > INT32_MAX) fail(path, "integer out of range");
    v = static_cast<int>(x);
  }
  static void read(const json& j, const std::string& path, std::int64_t& v) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    v = j.get<std::int64_t>();
  }
  static void read(const json& j, const std::string& path, std::uint64_t& v) {
    if (!j.is_number_unsigned()) fail(path, "expected a non-negative integer");
    v = j.get<std::uint64_t>();
  }
  static void read(const json& j, const std::string& path, bool& v) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    v = j.get<bool>();
  }
  static void read(const json& j, const std::string& path, std::string& v) {
    if (!j.is_string()) fail(path, "expected a string");
    v = j.get<std::string>();
  }
  template <typename T, std::size_t N>
  static void read(const json& j, const std::string& path, std::array<T, N>& v) {
    if (!j.is_array() || j.size() != N) fail(path, "expected an array of " + std::to_string(N));
    for (std::size_t i = 0; i < N; ++i) read(j[i], path + "[" + std::to_string(i) + "]", v[i]);
  }
  template <typename T>
  static void read(const json& j, const std::string& path, std::vector<T>& v) {
    if (!j.is_array()) fail(path, "expected an array");
    v.resize(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
      read(j[i], path + "[" + std::to_string(i) + "]", v[i]);
    }
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

class ToJson {
 public:
  template <typename T>
  void field(const char* name, const T& value) {
    out[name] = value;
  }
  template <typename Fn>
  void section(const char* name, Fn&& fn) {
    ToJson sub;
    fn(sub);
    out[name] = std::move(sub.out);
  }
  json out = json::object();
};

template <typename V, typename C>
void visit_trackgen(V& v, C& c) {
  v.field("control_point_count", c.control_point_count);
  v.field("radius_mean", c.radius_mean);
  v.field("radius_jitter", c.radius_jitter);
  v.field("width_range", c.width_range);
  v.field("resample_spacing", c.resample_spacing);
  v.field("obstacle_count_range", c.obstacle_count_range);
  v.field("obstacle_size_range", c.obstacle_size_range);
  v.field("min_passable_width", c.min_passable_width);
  v.field("spawn_clearance", c.spawn_clearance);
  v.field("reverse_probability", c.reverse_probability);
  v.field("max_retries", c.max_retries);
}

template <typename V, typename C>
void visit_vehicle(V& v, C& c) {
  v.field("wheelbase", c.wheelbase);
  v.field("width", c.width);
  v.field("length", c.length);
  v.field("v_min", c.v_min);
  v.field("v_max", c.v_max);
  v.field("steer_max", c.steer_max);
  v.field("speed_time_constant", c.speed_time_constant);
  v.field("steer_rate_max", c.steer_rate_max);
  v.field("physics_dt", c.physics_dt);
  v.field("control_dt", c.control_dt);
}

template <typename V, typename C>
void visit_lidar(V& v, C& c) {
  v.field("beam_count", c.beam_count);
  v.field("fov", c.fov);
  v.field("max_range", c.max_range);
  v.field("mount_offset", c.mount_offset);
  v.field("noise_sigma_range", c.noise_sigma_range);
  v.field("delay_steps_range", c.delay_steps_range);
  v.field("speed_noise_scale", c.speed_noise_scale);
}

template <typename V, typename C>
void visit_episode(V& v, C& c) {
  v.field("max_steps", c.max_steps);
  v.field("stack_depth", c.stack_depth);
  v.section("reward", [&](auto& s) {
    s.field("c_vs", c.reward.c_vs);
    s.field("c_vd", c.reward.c_vd);
    s.field("c_d", c.reward.c_d);
    s.field("c_steer", c.reward.c_steer);
    s.field("collision_penalty", c.reward.collision_penalty);
  });
}

template <typename V, typename C>
void visit_trainer(V& v, C& c) {
  v.field("lr", c.lr);
  v.field("grad_clip", c.grad_clip);
  v.field("entropy_coef", c.entropy_coef);
  v.field("batch_size", c.batch_size);
  v.field("minibatch_size", c.minibatch_size);
  v.field("gamma", c.gamma);
  v.field("surrogate_epsilon", c.surrogate_epsilon);
  v.field("gae_lambda", c.gae_lambda);
  v.field("epochs_per_update", c.epochs_per_update);
  v.field("value_coef", c.value_coef);
  v.field("num_envs", c.num_envs);
  v.field("total_steps", c.total_steps);
  v.field("eval_interval", c.eval_interval);
  v.field("eval_episodes", c.eval_episodes);
  v.field("eval_window", c.eval_window);
  v.field("stochastic_eval", c.stochastic_eval);
  v.field("checkpoint_interval", c.checkpoint_interval);
  v.field("policy_hidden", c.policy_hidden);
  v.field("value_hidden", c.value_hidden);
  v.field("log_wall_time", c.log_wall_time);
}

template <typename V, typename C>
void visit_run(V& v, C& c) {
  v.section("trackgen", [&](auto& s) { visit_trackgen(s, c.trackgen); });
  v.section("vehicle", [&](auto& s) { visit_vehicle(s, c.vehicle); });
  v.section("lidar", [&](auto& s) { visit_lidar(s, c.lidar); });
  v.section("episode", [&](auto& s) { visit_episode(s, c.episode); });
  v.section("trainer", [&](auto& s) { visit_trainer(s, c.trainer); });
  v.section("paths", [&](auto& s) {
    s.field("track_pool_dir", c.paths.track_pool_dir);
    s.field("output_dir", c.paths.output_dir);
  });
  v.field("seed", c.seed);
}

}  // namespace

TrainerConfig RunConfig::trainer_config() const {
  TrainerConfig t = trainer;
  t.seed = seed;
  return t;
}

std::string trainer_config_to_json(const TrainerConfig& c) {
  ToJson v;
  visit_trainer(v, c);
  v.out["seed"] = c.seed;
  return v.out.dump(2);
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedFile, origin + ": " + e.what());
  }
  RunConfig c;
  try {
    FromJson v(j, "");
    visit_run(v, c);
    v.finish();
  } catch (const Error& e) {
    throw Error(e.code(), origin + ": " + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path), path.string());
}

std::string run_config_to_json(const RunConfig& c) {
  ToJson v;
  visit_run(v, c);
  return v.out.dump(2);
}

void apply_seed_override(RunConfig& c) {
  const char* s = std::getenv("TRACKFORGE_SEED");
  if (!s || !*s) return;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (errno != 0 || *end != '\0' || s[0] == '-') {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("TRACKFORGE_SEED: not a non-negative integer: ") + s);
  }
  c.seed = v;
}

void validate_run_config(const RunConfig& c, bool check_paths) {
  c.trackgen.validate();
  c.vehicle.validate();
  c.lidar.validate();
  c.episode.validate();
  c.trainer.validate();
  if (check_paths) {
    const std::filesystem::path dir(c.paths.track_pool_dir);
    if (!std::filesystem::is_directory(dir)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "paths.track_pool_dir: directory does not exist: " + dir.string());
    }
  }
}

}  // namespace trackforge
