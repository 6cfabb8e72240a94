#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trackforge/env.hpp"
#include "trackforge/nn.hpp"
#include "trackforge/ppo.hpp"
#include "trackforge/world.hpp"

namespace trackforge {

struct TrainerConfig {
  double lr = 1e-4;
  double grad_clip = 0.02;
  double entropy_coef = 0.0;
  int batch_size = 2048;
  int minibatch_size = 256;
  double gamma = 0.998;
  double surrogate_epsilon = 0.2;
  double gae_lambda = 0.95;
  int epochs_per_update = 10;
  double value_coef = 0.5;
  int num_envs = 8;
  std::int64_t total_steps = 1'000'000;
  int eval_interval = 16;  // updates
  int eval_episodes = 4;
  int eval_window = 40;
  bool stochastic_eval = false;
  int checkpoint_interval = 16;  // updates
  std::vector<int> policy_hidden{32, 32};
  std::vector<int> value_hidden{64, 64};
  // Writes 0 in the wall_s column so metrics files are reproducible.
  bool log_wall_time = true;
  std::uint64_t seed = 0;

  void validate() const;
};

std::string trainer_config_to_json(const TrainerConfig& c);

struct EvalReport {
  std::vector<EpisodeStats> episodes;
  double success_rate = 0.0;  // over the last min(n, window) episodes
};

using PolicyFn = std::function<Action(const std::vector<double>& observation)>;

// Runs n_episodes on tracks drawn from the pool with `policy` choosing every
// action.
EvalReport evaluate(const PolicyFn& policy, const EnvConfig& env, const std::vector<WorldPtr>& pool,
                    int n_episodes, std::uint64_t seed, int window = 40);
// Gaussian-mean (or, when stochastic, sampled) actions of a policy network.
EvalReport evaluate(const MlpParams& policy, const EnvConfig& env,
                    const std::vector<WorldPtr>& pool, int n_episodes, std::uint64_t seed,
                    int window = 40, bool stochastic = false);

double moving_success_rate(const std::vector<bool>& flags, int window);

struct MetricsRow {
  int update = 0;
  std::int64_t step = 0;
  std::optional<double> mean_ep_reward;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_frac = 0.0;
  std::optional<double> success_rate;
  double wall_s = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "update,step,mean_ep_reward,policy_loss,value_loss,entropy,clip_frac,success_rate,wall_s";
std::string format_metrics_row(const MetricsRow& row);
std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

struct TrainResult {
  int updates = 0;
  std::int64_t steps = 0;
  bool interrupted = false;
  double best_success_rate = -1.0;
  std::filesystem::path final_policy;
  std::vector<MetricsRow> rows;  // rows written by this invocation
};

struct TrainOptions {
  // Continue from out_dir/checkpoints/latest when present.
  bool resume = false;
  // Polled between updates; training stops cleanly when it turns true.
  const std::atomic<bool>* stop = nullptr;
  // Called after each metrics row is written.
  std::function<void(const MetricsRow&)> on_update;
  // Stop after this many updates in this invocation (0 = no limit).
  int max_updates = 0;
};

// Output layout under out_dir:
//   metrics.csv
//   checkpoints/latest/{policy.bin,value.bin,policy.adam,value.adam,state.json}
//   checkpoints/best/... and checkpoints/update_NNNNNN/... (periodic)
TrainResult train(const TrainerConfig& config, const EnvConfig& env,
                  const std::vector<WorldPtr>& train_pool, const std::vector<WorldPtr>& eval_pool,
                  const std::filesystem::path& out_dir, const TrainOptions& options = {});

struct PolicyCheckpoint {
  MlpParams policy;
  MlpParams value;
  std::int64_t step = 0;
  int update = 0;
};
PolicyCheckpoint load_checkpoint_dir(const std::filesystem::path& dir);

}  // namespace trackforge
