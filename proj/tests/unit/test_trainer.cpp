#include <cmath>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "trackforge/checkpoint.hpp"
#include "trackforge/trainer.hpp"

using namespace trackforge;

namespace {

TrainerConfig tiny_trainer() {
  TrainerConfig c;
  c.batch_size = 256;
  c.minibatch_size = 64;
  c.num_envs = 4;
  c.epochs_per_update = 2;
  c.total_steps = 512;
  c.eval_interval = 1;
  c.eval_episodes = 1;
  c.checkpoint_interval = 1;
  c.policy_hidden = {8, 8};
  c.value_hidden = {8, 8};
  c.log_wall_time = false;
  c.seed = 3;
  return c;
}

// Holds the lane by balancing the two side-facing beams of the newest frame.
PolicyFn wall_centering(const EnvConfig& env) {
  return [env](const std::vector<double>& obs) {
    const int f = env.frame_size();
    const int newest = (env.episode.stack_depth - 1) * f;
    const double left = obs[newest + 29], right = obs[newest + 6];
    return Action{0.0, std::clamp(left - right, -1.0, 1.0)};
  };
}

}  // namespace

TEST_CASE("two batches give two updates and two metrics rows") {
  testing::TempDir dir("train2");
  const EnvConfig env = testing::small_env();
  const auto pool = make_worlds(testing::easy_tracks(1, 1));
  const TrainResult r = train(tiny_trainer(), env, pool, pool, dir.path());
  CHECK(r.updates == 2);
  CHECK(r.steps == 512);
  const auto rows = read_metrics(dir.path() / "metrics.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].update == 1);
  CHECK(rows[1].step == 512);
  CHECK(rows[0].success_rate.has_value());
  CHECK(rows[0].wall_s == 0.0);
  for (const char* f : {"policy.bin", "value.bin", "policy.adam", "value.adam", "state.json"}) {
    CHECK(std::filesystem::exists(dir.path() / "checkpoints" / "latest" / f));
  }
  CHECK(std::filesystem::exists(dir.path() / "checkpoints" / "best" / "policy.bin"));
  CHECK(std::filesystem::exists(dir.path() / "checkpoints" / "update_000002" / "policy.bin"));
  const auto ck = load_checkpoint_dir(dir.path() / "checkpoints" / "latest");
  CHECK(ck.update == 2);
  CHECK(ck.step == 512);
  CHECK(ck.policy.input_size() == env.observation_size());
  const auto state = nlohmann::json::parse(read_file(dir.path() / "checkpoints/latest/state.json"));
  CHECK(state["trainer"]["batch_size"] == 256);
}

TEST_CASE("interrupted run resumes with a monotone step counter") {
  testing::TempDir dir("resume");
  const EnvConfig env = testing::small_env();
  const auto pool = make_worlds(testing::easy_tracks(1, 1));
  TrainerConfig cfg = tiny_trainer();
  cfg.total_steps = 1024;
  TrainOptions first;
  first.max_updates = 2;
  const auto a = train(cfg, env, pool, pool, dir.path(), first);
  CHECK(a.updates == 2);
  const MlpParams mid = load_checkpoint_dir(dir.path() / "checkpoints" / "latest").policy;

  TrainOptions again;
  again.resume = true;
  const auto b = train(cfg, env, pool, pool, dir.path(), again);
  CHECK(b.updates == 4);
  REQUIRE(b.rows.size() == 2);
  CHECK(b.rows[0].update == 3);
  const auto rows = read_metrics(dir.path() / "metrics.csv");
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].update == static_cast<int>(i + 1));
    CHECK(rows[i].step == static_cast<std::int64_t>(256 * (i + 1)));
  }
  const MlpParams end = load_checkpoint_dir(dir.path() / "checkpoints" / "latest").policy;
  CHECK_FALSE(end == mid);
  CHECK(end.layer_sizes() == mid.layer_sizes());
}

TEST_CASE("stop flag interrupts cleanly") {
  testing::TempDir dir("stop");
  const EnvConfig env = testing::small_env();
  const auto pool = make_worlds(testing::easy_tracks(1, 1));
  std::atomic<bool> stop{false};
  TrainOptions opt;
  opt.stop = &stop;
  opt.on_update = [&](const MetricsRow&) { stop = true; };
  TrainerConfig cfg = tiny_trainer();
  cfg.total_steps = 2048;
  const auto r = train(cfg, env, pool, pool, dir.path(), opt);
  CHECK(r.interrupted);
  CHECK(r.updates == 1);
  CHECK(read_metrics(dir.path() / "metrics.csv").size() == 1);
  CHECK(std::filesystem::exists(dir.path() / "checkpoints" / "latest" / "policy.bin"));
}

TEST_CASE("scripted lane keeping completes laps and driving straight crashes") {
  const EnvConfig env = testing::small_env();
  const std::vector<WorldPtr> pool{make_world(make_circle_track({0, 0}, 20.0, 2.5, 0.25))};
  const EvalReport good = evaluate(wall_centering(env), env, pool, 4, 1);
  for (const auto& e : good.episodes) {
    CHECK(e.success);
    CHECK_FALSE(e.collision);
    CHECK(e.lap_time > 0.0);
  }
  CHECK(good.success_rate == 1.0);
  const EvalReport bad =
      evaluate([](const std::vector<double>&) { return Action{1.0, 0.0}; }, env, pool, 2, 1);
  for (const auto& e : bad.episodes) {
    CHECK_FALSE(e.success);
    CHECK(e.collision);
  }
}

TEST_CASE("success rate is the mean of the last window of flags") {
  const EnvConfig env = testing::small_env();
  const std::vector<WorldPtr> pool{make_world(make_circle_track({0, 0}, 20.0, 2.5, 0.25))};
  const auto report = evaluate([](const std::vector<double>&) { return Action{1.0, 0.0}; }, env,
                               pool, 40, 2);
  CHECK(report.episodes.size() == 40);
  CHECK(report.success_rate == 0.0);
  CHECK(moving_success_rate({true, false, true, true}, 40) == 0.75);
  CHECK(moving_success_rate({false, false, true, true}, 2) == 1.0);
  CHECK(moving_success_rate({}, 40) == 0.0);
}

TEST_CASE("policy evaluation checks dimensions and is seed-deterministic") {
  const EnvConfig env = testing::small_env();
  const auto pool = make_worlds(testing::easy_tracks(2, 4));
  const MlpParams p = init_mlp({env.observation_size(), 8, 2}, 0.5, 1, 2);
  const auto a = evaluate(p, env, pool, 3, 5);
  const auto b = evaluate(p, env, pool, 3, 5);
  REQUIRE(a.episodes.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(a.episodes[i].episode_return == b.episodes[i].episode_return);
    CHECK(a.episodes[i].length == b.episodes[i].length);
  }
  const MlpParams wrong = init_mlp({10, 8, 2}, 0.5, 1, 2);
  try {
    evaluate(wrong, env, pool, 1, 5);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
}

TEST_CASE("metrics rows round trip") {
  testing::TempDir dir("metrics");
  MetricsRow a{1, 256, 12.5, -0.01, 3.25, 2.1, 0.05, std::nullopt, 0.0};
  MetricsRow b{2, 512, std::nullopt, 0.1, 0.2, 0.3, 0.0, 0.75, 1.5};
  {
    std::ofstream out(dir.path() / "metrics.csv");
    out << kMetricsHeader << "\n" << format_metrics_row(a) << "\n" << format_metrics_row(b) << "\n";
  }
  const auto rows = read_metrics(dir.path() / "metrics.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].mean_ep_reward == 12.5);
  CHECK_FALSE(rows[0].success_rate.has_value());
  CHECK_FALSE(rows[1].mean_ep_reward.has_value());
  CHECK(rows[1].success_rate == 0.75);
  CHECK(rows[1].wall_s == 1.5);
}

TEST_CASE("trainer config validation") {
  TrainerConfig c;
  c.minibatch_size = 300;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.gamma = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.gae_lambda = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.lr = std::nan("");
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.num_envs = 3;
  try {
    c.validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("trainer.") != std::string::npos);
  }
  CHECK_NOTHROW(TrainerConfig{}.validate());
}
