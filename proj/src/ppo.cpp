#include "trackforge/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "trackforge/checkpoint.hpp"

namespace trackforge {

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const double> next_values, std::span<const std::uint8_t> terminated,
                      std::span<const std::uint8_t> episode_end, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || next_values.size() != n || terminated.size() != n ||
      episode_end.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "compute_gae: sequence lengths differ");
  }
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double bootstrap = terminated[t] ? 0.0 : next_values[t];
    const double delta = rewards[t] + gamma * bootstrap - values[t];
    const double carry = episode_end[t] ? 0.0 : gamma * lambda * next_adv;
    out.advantages[t] = delta + carry;
    out.returns[t] = out.advantages[t] + values[t];
    next_adv = out.advantages[t];
  }
  return out;
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma,
                      double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "compute_gae: sequence lengths differ");
  }
  std::vector<double> next(n);
  for (std::size_t t = 0; t < n; ++t) next[t] = t + 1 < n ? values[t + 1] : bootstrap_value;
  return compute_gae(rewards, values, next, dones, dones, gamma, lambda);
}

void normalize_advantages(std::vector<double>& a) {
  if (a.empty()) return;
  double mean = 0.0;
  for (double x : a) mean += x;
  mean /= static_cast<double>(a.size());
  double var = 0.0;
  for (double x : a) var += (x - mean) * (x - mean);
  const double std = std::sqrt(var / static_cast<double>(a.size()));
  const double k = std > 1e-8 ? 1.0 / std : 1.0;
  for (double& x : a) x = (x - mean) * k;
}

double clipped_surrogate(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

void RolloutBuffer::compute_advantages(double gamma, double lambda) {
  advantages.assign(size(), 0.0);
  returns.assign(size(), 0.0);
  const std::size_t len = steps_per_env;
  for (int e = 0; e < num_envs; ++e) {
    const std::size_t o = static_cast<std::size_t>(e) * len;
    auto sub = [&](const auto& v) { return std::span(v).subspan(o, len); };
    const GaeResult g = compute_gae(sub(rewards), sub(values), sub(next_values), sub(terminated),
                                    sub(episode_end), gamma, lambda);
    std::copy(g.advantages.begin(), g.advantages.end(), advantages.begin() + o);
    std::copy(g.returns.begin(), g.returns.end(), returns.begin() + o);
  }
}

std::string RolloutBuffer::serialize() const {
  std::string out;
  auto put = [&out](const auto& v) {
    using T = typename std::decay_t<decltype(v)>::value_type;
    const std::uint64_t n = v.size();
    out.append(reinterpret_cast<const char*>(&n), sizeof(n));
    out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
  };
  const std::int32_t header[] = {obs_dim, act_dim, num_envs, steps_per_env};
  out.append(reinterpret_cast<const char*>(header), sizeof(header));
  put(observations);
  put(actions);
  put(log_probs);
  put(rewards);
  put(values);
  put(next_values);
  put(terminated);
  put(episode_end);
  put(env_index);
  put(step_index);
  put(advantages);
  put(returns);
  return out;
}

PpoLossResult ppo_loss(const RolloutBuffer& buf, std::span<const std::size_t> batch,
                       const MlpParams& policy, const MlpParams& value, const PpoLossConfig& cfg) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "ppo_loss: empty minibatch");
  if (buf.advantages.size() != buf.size()) {
    throw Error(ErrorCode::kInvalidArgument, "ppo_loss: advantages not computed");
  }
  const std::size_t act_dim = policy.log_std.size();
  if (act_dim != static_cast<std::size_t>(buf.act_dim)) {
    throw Error(ErrorCode::kDimensionMismatch, "ppo_loss: policy action size differs from buffer");
  }
  PpoLossResult r;
  r.policy_grad = GradientSet::zeros_like(policy);
  r.value_grad = GradientSet::zeros_like(value);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const double eps = cfg.surrogate_epsilon;

  ForwardCache pc, vc;
  std::vector<double> mean_grad(act_dim);
  double clipped = 0.0;
  double surrogate = 0.0;
  double sq_err = 0.0;
  double kl = 0.0;
  for (std::size_t idx : batch) {
    const auto obs = buf.observation(idx);
    const auto act = buf.action(idx);
    forward(policy, obs, pc);
    const auto& mu = pc.output();
    const double logp = gaussian_log_prob(mu, policy.log_std, act);
    const double log_ratio = logp - buf.log_probs[idx];
    const double ratio = std::exp(log_ratio);
    const double adv = buf.advantages[idx];
    const double obj = clipped_surrogate(ratio, adv, eps);
    surrogate += obj;
    if (ratio < 1.0 - eps || ratio > 1.0 + eps) clipped += 1.0;
    kl += (ratio - 1.0) - log_ratio;

    // d(-obj)/d(logp): the unclipped branch is active whenever it is the min.
    const double d_logp = ratio * adv <= std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv
                              ? -ratio * adv * inv_n
                              : 0.0;
    if (d_logp != 0.0) {
      for (std::size_t i = 0; i < act_dim; ++i) {
        const double inv_var = std::exp(-2.0 * policy.log_std[i]);
        const double diff = act[i] - mu[i];
        mean_grad[i] = d_logp * diff * inv_var;
        r.policy_grad.log_std[i] += d_logp * (diff * diff * inv_var - 1.0);
      }
      backward(policy, pc, mean_grad, r.policy_grad);
    }

    forward(value, obs, vc);
    const double err = vc.output()[0] - buf.returns[idx];
    sq_err += err * err;
    const double dv = 2.0 * cfg.value_coef * err * inv_n;
    backward(value, vc, std::span(&dv, 1), r.value_grad);
  }
  r.entropy = gaussian_entropy(policy.log_std);
  for (std::size_t i = 0; i < act_dim; ++i) r.policy_grad.log_std[i] -= cfg.entropy_coef;

  r.policy_loss = -surrogate * inv_n;
  r.value_loss = sq_err * inv_n;
  r.clip_fraction = clipped * inv_n;
  r.approx_kl = kl * inv_n;
  r.loss = r.policy_loss + cfg.value_coef * r.value_loss - cfg.entropy_coef * r.entropy;
  if (!std::isfinite(r.loss)) {
    std::ostringstream ss;
    ss.precision(17);
    ss << "non-finite PPO loss: policy=" << r.policy_loss << " value=" << r.value_loss
       << " entropy=" << r.entropy << " clip_frac=" << r.clip_fraction << " batch=" << batch.size();
    throw Error(ErrorCode::kNonFinite, ss.str());
  }
  return r;
}

RolloutCollector::RolloutCollector(const EnvConfig& config, std::vector<WorldPtr> pool,
                                   int num_envs, std::uint64_t seed)
    : config_(config), pool_(std::move(pool)) {
  if (pool_.empty()) throw Error(ErrorCode::kInvalidArgument, "rollout: empty track pool");
  if (num_envs < 1) throw Error(ErrorCode::kInvalidArgument, "rollout: num_envs must be >= 1");
  for (int e = 0; e < num_envs; ++e) {
    envs_.emplace_back(config_);
    rngs_.emplace_back(derive_seed(seed, 0xe000 + static_cast<std::uint64_t>(e)));
  }
  obs_.resize(num_envs);
  running_.resize(num_envs);
  episode_seeds_.resize(num_envs);
  episode_tracks_.resize(num_envs);
  for (int e = 0; e < num_envs; ++e) start_episode(e);
}

void RolloutCollector::start_episode(int e) {
  Rng& rng = rngs_[e];
  const std::size_t track =
      pool_.size() == 1 ? 0 : static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(pool_.size()) - 1));
  const std::uint64_t seed = rng();
  episode_tracks_[e] = track;
  episode_seeds_[e] = seed;
  obs_[e] = envs_[e].reset(seed, pool_[track]);
  running_[e] = EpisodeStats{};
}

std::vector<EpisodeStats> RolloutCollector::take_finished() {
  std::vector<EpisodeStats> out;
  out.swap(finished_);
  return out;
}

RolloutBuffer RolloutCollector::collect(const MlpParams& policy, const MlpParams& value,
                                        int steps_per_env) {
  if (steps_per_env < 1) throw Error(ErrorCode::kInvalidArgument, "rollout: steps_per_env must be >= 1");
  const int obs_dim = config_.observation_size();
  if (policy.input_size() != obs_dim || value.input_size() != obs_dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "rollout: network input size " + std::to_string(policy.input_size()) +
                    " does not match observation size " + std::to_string(obs_dim));
  }
  const int n_env = num_envs();
  const std::size_t total = static_cast<std::size_t>(n_env) * steps_per_env;
  RolloutBuffer b;
  b.obs_dim = obs_dim;
  b.act_dim = static_cast<int>(policy.log_std.size());
  b.num_envs = n_env;
  b.steps_per_env = steps_per_env;
  b.observations.resize(total * obs_dim);
  b.actions.resize(total * b.act_dim);
  b.log_probs.resize(total);
  b.rewards.resize(total);
  b.values.resize(total);
  b.next_values.resize(total);
  b.terminated.resize(total);
  b.episode_end.resize(total);
  b.env_index.resize(total);
  b.step_index.resize(total);

  ForwardCache cache;
  for (int e = 0; e < n_env; ++e) {
    RacingEnv& env = envs_[e];
    for (int t = 0; t < steps_per_env; ++t) {
      const std::size_t i = static_cast<std::size_t>(e) * steps_per_env + t;
      std::copy(obs_[e].begin(), obs_[e].end(), b.observations.begin() + i * obs_dim);
      forward(policy, obs_[e], cache);
      const auto& mu = cache.output();
      std::vector<double> a;
      double logp;
      if (deterministic_) {
        a = mu;
        logp = gaussian_log_prob(mu, policy.log_std, a);
      } else {
        GaussianSample s = gaussian_sample(mu, policy.log_std, rngs_[e]);
        a = std::move(s.action);
        logp = s.log_prob;
      }
      std::copy(a.begin(), a.end(), b.actions.begin() + i * b.act_dim);
      b.log_probs[i] = logp;
      b.values[i] = forward(value, obs_[e])[0];
      b.env_index[i] = e;
      b.step_index[i] = t;

      const StepResult r = env.step({a[0], a.size() > 1 ? a[1] : 0.0});
      b.rewards[i] = r.reward;
      EpisodeStats& st = running_[e];
      st.episode_return += r.reward;
      ++st.length;
      obs_[e] = r.observation;
      if (r.done) {
        const bool truncated = r.info.timeout && !r.info.collision && !r.info.lap_complete;
        b.terminated[i] = truncated ? 0 : 1;
        b.episode_end[i] = 1;
        b.next_values[i] = truncated ? forward(value, obs_[e])[0] : 0.0;
        st.collision = r.info.collision;
        st.timeout = r.info.timeout;
        st.success = r.info.lap_complete && !r.info.collision;
        if (st.success) st.lap_time = env.state().time;
        finished_.push_back(st);
        start_episode(e);
      }
    }
    // Bootstrap values for steps followed by another step of the same
    // episode, and for the unfinished episode at the end of the window.
    for (int t = 0; t < steps_per_env; ++t) {
      const std::size_t i = static_cast<std::size_t>(e) * steps_per_env + t;
      if (b.episode_end[i]) continue;
      b.next_values[i] = t + 1 < steps_per_env ? b.values[i + 1] : forward(value, obs_[e])[0];
    }
  }
  return b;
}

}  // namespace trackforge
