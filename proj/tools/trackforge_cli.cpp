#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "trackforge/checkpoint.hpp"
#include "trackforge/config.hpp"
#include "trackforge/plot.hpp"
#include "trackforge/replay.hpp"
#include "trackforge/simd/kernels.hpp"
#include "trackforge/trackgen.hpp"
#include "trackforge/trainer.hpp"
#include "trackforge/wire.hpp"

namespace fs = std::filesystem;
using namespace trackforge;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kMalformedFile:
    case ErrorCode::kVersionMismatch:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

RunConfig load_config_or_default(const std::string& path) {
  RunConfig c = path.empty() ? RunConfig{} : load_run_config(path);
  apply_seed_override(c);
  return c;
}

std::string track_file_name(int index, std::uint64_t seed) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "track_%04d_%llu.track.json", index,
                static_cast<unsigned long long>(seed));
  return buf;
}

int cmd_gen_tracks(int count, std::uint64_t seed, const std::string& config_path,
                   const std::string& out) {
  RunConfig cfg = load_config_or_default(config_path);
  cfg.trackgen.validate();
  if (count < 0) throw Error(ErrorCode::kInvalidArgument, "--count: must be >= 0");
  fs::create_directories(out);
  int failures = 0;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t track_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    try {
      const TrackMap t = generate_track_with_obstacles(track_seed, cfg.trackgen);
      const ValidationReport rep = validate_track(t);
      if (!rep.ok()) {
        ++failures;
        std::cerr << "track " << i << ": validation failed: " << rep.summary() << "\n";
        continue;
      }
      save_map(t, fs::path(out) / track_file_name(i, track_seed));
    } catch (const Error& e) {
      ++failures;
      std::cerr << "track " << i << ": " << error_code_name(e.code()) << ": " << e.what() << "\n";
    }
  }
  std::cout << "wrote " << (count - failures) << " tracks to " << out;
  if (failures) std::cout << " (" << failures << " failed)";
  std::cout << "\n";
  return failures ? kExitRuntime : 0;
}

int cmd_train(const std::string& config_path, const std::string& out, bool resume) {
  RunConfig cfg = load_config_or_default(config_path);
  validate_run_config(cfg, true);
  const fs::path out_dir = out.empty() ? fs::path(cfg.paths.output_dir) : fs::path(out);
  auto pool = make_worlds(load_track_pool(cfg.paths.track_pool_dir));
  if (pool.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "paths.track_pool_dir: no *.track.json files in " + cfg.paths.track_pool_dir);
  }
  fs::create_directories(out_dir);
  write_file_atomic(out_dir / "config.json", run_config_to_json(cfg) + "\n");

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  TrainOptions opt;
  opt.resume = resume;
  opt.stop = &g_stop;
  opt.on_update = [](const MetricsRow& r) {
    std::cerr << "update " << r.update << " step " << r.step;
    if (r.mean_ep_reward) std::cerr << " reward " << *r.mean_ep_reward;
    if (r.success_rate) std::cerr << " success " << *r.success_rate;
    std::cerr << "\n";
  };
  int code = 0;
  TrainResult result;
  try {
    result = train(cfg.trainer_config(), cfg.env(), pool, pool, out_dir, opt);
  } catch (const Error&) {
    if (fs::exists(out_dir / "metrics.csv")) {
      write_training_plots(read_metrics(out_dir / "metrics.csv"), out_dir);
    }
    throw;
  }
  write_training_plots(read_metrics(out_dir / "metrics.csv"), out_dir);
  std::cout << (result.interrupted ? "interrupted" : "finished") << " after " << result.updates
            << " updates, " << result.steps << " steps; latest checkpoint "
            << (out_dir / "checkpoints" / "latest").string() << "\n";
  return code;
}

int cmd_eval(const std::string& checkpoint, const std::string& tracks, int episodes,
             std::uint64_t seed, const std::string& config_path, const std::string& report_path,
             const std::string& trajectory_out, bool stochastic) {
  RunConfig cfg = load_config_or_default(config_path);
  cfg.vehicle.validate();
  cfg.lidar.validate();
  cfg.episode.validate();
  if (episodes < 1) throw Error(ErrorCode::kInvalidArgument, "--episodes: must be >= 1");
  const fs::path ck(checkpoint);
  const MlpParams policy =
      fs::is_directory(ck) ? load_checkpoint_dir(ck).policy : load_params(ck);
  if (!fs::is_directory(tracks)) {
    throw Error(ErrorCode::kInvalidArgument, "--tracks: directory does not exist: " + tracks);
  }
  auto pool = make_worlds(load_track_pool(tracks));
  if (pool.empty()) throw Error(ErrorCode::kInvalidArgument, "--tracks: no *.track.json files in " + tracks);
  const EnvConfig env = cfg.env();
  const int window = std::min(episodes, 40);
  const EvalReport rep = evaluate(policy, env, pool, episodes, seed, window, stochastic);

  nlohmann::json j;
  j["episodes"] = nlohmann::json::array();
  for (const auto& e : rep.episodes) {
    j["episodes"].push_back({{"success", e.success},
                             {"return", e.episode_return},
                             {"length", e.length},
                             {"collision", e.collision},
                             {"timeout", e.timeout},
                             {"lap_time", e.success ? nlohmann::json(e.lap_time) : nlohmann::json()}});
  }
  j["window"] = window;
  j["success_rate"] = rep.success_rate;
  j["seed"] = seed;
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!report_path.empty()) write_file_atomic(report_path, text);

  if (!trajectory_out.empty()) {
    // Re-run the first episode and record its states.
    RacingEnv e(env);
    Rng rng(derive_seed(seed, 0));
    const int track = uniform_int(rng, 0, static_cast<int>(pool.size()) - 1);
    std::vector<double> obs = e.reset(rng(), pool[track]);
    std::vector<VehicleState> states{e.state()};
    ForwardCache cache;
    while (true) {
      forward(policy, obs, cache);
      const auto r = e.step({cache.output()[0], cache.output()[1]});
      states.push_back(e.state());
      if (r.done) break;
      obs = r.observation;
    }
    write_file_atomic(trajectory_out, format_trajectory(states));
  }
  return 0;
}

int cmd_serve(const std::string& config_path, int port, const std::string& host) {
  RunConfig cfg = load_config_or_default(config_path);
  cfg.vehicle.validate();
  cfg.lidar.validate();
  cfg.episode.validate();
  if (!fs::is_directory(cfg.paths.track_pool_dir)) {
    throw Error(ErrorCode::kInvalidArgument,
                "paths.track_pool_dir: directory does not exist: " + cfg.paths.track_pool_dir);
  }
  auto pool = std::make_shared<const std::vector<WorldPtr>>(
      make_worlds(load_track_pool(cfg.paths.track_pool_dir)));
  if (pool->empty()) throw Error(ErrorCode::kInvalidArgument, "paths.track_pool_dir: no tracks");
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  ServerOptions opt;
  opt.host = host;
  opt.port = port;
  opt.stop = &g_stop;
  opt.on_listening = [&](int p) {
    std::cout << "listening on " << host << ":" << p << std::endl;
  };
  run_server(cfg.env(), pool, opt);
  return 0;
}

int cmd_replay(const std::string& trajectory, const std::string& track, const std::string& out) {
  const TrackMap map = load_map(track);
  const auto traj = load_trajectory(trajectory);
  const ReplayRender r = render_replay(map, traj);
  if (r.outside_samples > 0) {
    std::cerr << "warning: " << r.outside_samples
              << " trajectory samples lie outside the corridor; trajectory and track may not match\n";
  }
  write_file_atomic(out, r.svg);
  std::cout << "wrote " << out << " (" << traj.size() << " samples, path length " << r.path_length
            << " m)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trackforge: procedural race tracks, lidar racing environment and PPO trainer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "trackforge 0.1.0");
  bool show_isa = false;
  app.add_flag("--print-isa", show_isa, "Print the selected SIMD kernel set");

  int count = 0;
  std::uint64_t seed = 0;
  std::string config, out;
  auto* gen = app.add_subcommand("gen-tracks", "Generate validated random tracks");
  gen->add_option("--count", count, "Number of tracks")->required();
  gen->add_option("--seed", seed, "Master seed")->required();
  gen->add_option("--config", config, "Run config (trackgen section is used)");
  gen->add_option("--out", out, "Output directory")->required();

  bool resume = false;
  auto* tr = app.add_subcommand("train", "Train a PPO policy");
  tr->add_option("--config", config, "Run config")->required();
  tr->add_option("--out", out, "Output directory (defaults to paths.output_dir)");
  tr->add_flag("--resume", resume, "Continue from the latest checkpoint in the output directory");

  std::string checkpoint, tracks, report, traj_out;
  int episodes = 40;
  bool stochastic = false;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  ev->add_option("--checkpoint", checkpoint, "Checkpoint directory or policy.bin")->required();
  ev->add_option("--tracks", tracks, "Track directory")->required();
  ev->add_option("--episodes", episodes, "Episodes")->required();
  ev->add_option("--seed", seed, "Seed")->required();
  ev->add_option("--config", config, "Run config for the environment settings");
  ev->add_option("--report", report, "Also write the JSON report here");
  ev->add_option("--trajectory-out", traj_out, "Write the first episode's trajectory CSV");
  ev->add_flag("--stochastic", stochastic, "Sample actions instead of using the mean");

  int port = 0;
  std::string host = "127.0.0.1";
  auto* sv = app.add_subcommand("serve", "Serve the environment over TCP");
  sv->add_option("--config", config, "Run config")->required();
  sv->add_option("--port", port, "TCP port (0 picks one)")->required();
  sv->add_option("--host", host, "Bind address");

  std::string trajectory, track;
  auto* rp = app.add_subcommand("replay", "Render a trajectory over its track as SVG");
  rp->add_option("--trajectory", trajectory, "Trajectory CSV")->required();
  rp->add_option("--track", track, "Track file")->required();
  rp->add_option("--out", out, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }
  if (show_isa) std::cerr << "simd: " << simd::isa_name(simd::active_isa()) << "\n";

  try {
    if (*gen) return cmd_gen_tracks(count, seed, config, out);
    if (*tr) return cmd_train(config, out, resume);
    if (*ev) return cmd_eval(checkpoint, tracks, episodes, seed, config, report, traj_out, stochastic);
    if (*sv) return cmd_serve(config, port, host);
    if (*rp) return cmd_replay(trajectory, track, out);
  } catch (const Error& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
