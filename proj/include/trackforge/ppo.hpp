#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trackforge/env.hpp"
#include "trackforge/nn.hpp"
#include "trackforge/world.hpp"

namespace trackforge {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// One environment stream. next_values[t] is V(s_{t+1}) as observed right
// after step t (the final observation for a truncated step); terminated[t]
// zeroes that bootstrap and episode_end[t] cuts the lambda chain.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const double> next_values, std::span<const std::uint8_t> terminated,
                      std::span<const std::uint8_t> episode_end, double gamma, double lambda);

// Single-stream form where every `done` is a true termination and
// bootstrap_value is V of the state after the last step.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma,
                      double lambda);

// Normalizes in place to zero mean and unit standard deviation (population),
// leaving the values centred only when their std is below 1e-8.
void normalize_advantages(std::vector<double>& advantages);

double clipped_surrogate(double ratio, double advantage, double epsilon);

// Transitions laid out env-major: env e owns [e * steps_per_env, (e + 1) *
// steps_per_env) in time order.
struct RolloutBuffer {
  int obs_dim = 0;
  int act_dim = 2;
  int num_envs = 0;
  int steps_per_env = 0;
  std::vector<double> observations;  // size * obs_dim
  std::vector<double> actions;       // size * act_dim, unclamped samples
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> next_values;
  std::vector<std::uint8_t> terminated;
  std::vector<std::uint8_t> episode_end;
  std::vector<std::int32_t> env_index;
  std::vector<std::int32_t> step_index;
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return rewards.size(); }
  std::span<const double> observation(std::size_t i) const {
    return {observations.data() + i * obs_dim, static_cast<std::size_t>(obs_dim)};
  }
  std::span<const double> action(std::size_t i) const {
    return {actions.data() + i * act_dim, static_cast<std::size_t>(act_dim)};
  }
  void compute_advantages(double gamma, double lambda);
  std::string serialize() const;
};

struct PpoLossConfig {
  double surrogate_epsilon = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
};

struct PpoLossResult {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;  // mean squared error, before value_coef
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  GradientSet policy_grad;
  GradientSet value_grad;
};

// Clipped-surrogate loss over the transitions `batch` with exact gradients
// for both networks. Throws kNonFinite with a diagnostic dump if the loss
// is not finite.
PpoLossResult ppo_loss(const RolloutBuffer& buffer, std::span<const std::size_t> batch,
                       const MlpParams& policy, const MlpParams& value, const PpoLossConfig& cfg);

struct EpisodeStats {
  double episode_return = 0.0;
  int length = 0;
  bool success = false;
  bool collision = false;
  bool timeout = false;
  double lap_time = 0.0;  // seconds, 0 unless success
};

// Vectorized rollout collection over independently seeded environments.
// Finished episodes restart on a track drawn from the pool.
class RolloutCollector {
 public:
  RolloutCollector(const EnvConfig& config, std::vector<WorldPtr> pool, int num_envs,
                   std::uint64_t seed);

  // Zero-variance actions (the policy mean) instead of sampling.
  void set_deterministic(bool on) { deterministic_ = on; }

  RolloutBuffer collect(const MlpParams& policy, const MlpParams& value, int steps_per_env);

  // Episodes finished since the last call.
  std::vector<EpisodeStats> take_finished();
  int num_envs() const { return static_cast<int>(envs_.size()); }
  const RacingEnv& env(int i) const { return envs_[i]; }

 private:
  void start_episode(int e);

  EnvConfig config_;
  std::vector<WorldPtr> pool_;
  std::vector<RacingEnv> envs_;
  std::vector<Rng> rngs_;
  std::vector<std::vector<double>> obs_;
  std::vector<EpisodeStats> running_;
  std::vector<EpisodeStats> finished_;
  std::vector<std::uint64_t> episode_seeds_;
  std::vector<std::size_t> episode_tracks_;
  bool deterministic_ = false;
};

}  // namespace trackforge
