#include "trackforge/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "trackforge/checkpoint.hpp"

namespace trackforge {
namespace fs = std::filesystem;
namespace {

void fail(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kInvalidArgument, "trainer." + field + ": " + why);
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<int> net_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

struct SavedState {
  int update = 0;
  std::int64_t step = 0;
  double best_success = -1.0;
  std::vector<bool> window;
};

void save_dir(const fs::path& dir, const MlpParams& policy, const MlpParams& value,
              const AdamState& pa, const AdamState& va, const SavedState& st,
              const TrainerConfig& cfg) {
  fs::create_directories(dir);
  save_params(policy, dir / "policy.bin");
  save_params(value, dir / "value.bin");
  save_adam(pa, dir / "policy.adam");
  save_adam(va, dir / "value.adam");
  nlohmann::json j;
  j["update"] = st.update;
  j["step"] = st.step;
  j["best_success_rate"] = st.best_success;
  std::vector<int> flags(st.window.begin(), st.window.end());
  j["eval_window_flags"] = flags;
  j["trainer"] = nlohmann::json::parse(trainer_config_to_json(cfg));
  write_file_atomic(dir / "state.json", j.dump(2) + "\n");
}

SavedState load_state(const fs::path& dir) {
  const auto text = read_file(dir / "state.json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, (dir / "state.json").string() + ": " + e.what());
  }
  SavedState st;
  st.update = j.at("update").get<int>();
  st.step = j.at("step").get<std::int64_t>();
  st.best_success = j.value("best_success_rate", -1.0);
  for (int f : j.value("eval_window_flags", std::vector<int>{})) st.window.push_back(f != 0);
  return st;
}

std::optional<double> parse_cell(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

}  // namespace

void TrainerConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr", "must be finite and > 0");
  if (!std::isfinite(grad_clip) || grad_clip < 0.0) fail("grad_clip", "must be finite and >= 0");
  if (!std::isfinite(entropy_coef)) fail("entropy_coef", "must be finite");
  if (batch_size < 1) fail("batch_size", "must be >= 1");
  if (minibatch_size < 1) fail("minibatch_size", "must be >= 1");
  if (batch_size % minibatch_size != 0) fail("batch_size", "must be divisible by minibatch_size");
  if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma", "must be in (0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) fail("gae_lambda", "must be in [0, 1]");
  if (!(surrogate_epsilon > 0.0)) fail("surrogate_epsilon", "must be > 0");
  if (epochs_per_update < 1) fail("epochs_per_update", "must be >= 1");
  if (!std::isfinite(value_coef) || value_coef < 0.0) fail("value_coef", "must be finite and >= 0");
  if (num_envs < 1) fail("num_envs", "must be >= 1");
  if (batch_size % num_envs != 0) fail("num_envs", "must divide batch_size");
  if (total_steps < 0) fail("total_steps", "must be >= 0");
  if (eval_interval < 1) fail("eval_interval", "must be >= 1");
  if (eval_episodes < 1) fail("eval_episodes", "must be >= 1");
  if (eval_window < 1) fail("eval_window", "must be >= 1");
  if (checkpoint_interval < 1) fail("checkpoint_interval", "must be >= 1");
  if (policy_hidden.empty()) fail("policy_hidden", "must list at least one layer");
  if (value_hidden.empty()) fail("value_hidden", "must list at least one layer");
  for (int h : policy_hidden) if (h < 1) fail("policy_hidden", "sizes must be >= 1");
  for (int h : value_hidden) if (h < 1) fail("value_hidden", "sizes must be >= 1");
}

double moving_success_rate(const std::vector<bool>& flags, int window) {
  if (flags.empty()) return 0.0;
  const std::size_t n = std::min<std::size_t>(flags.size(), window);
  const auto first = flags.end() - static_cast<std::ptrdiff_t>(n);
  return static_cast<double>(std::count(first, flags.end(), true)) / static_cast<double>(n);
}

EvalReport evaluate(const PolicyFn& policy, const EnvConfig& env_cfg,
                    const std::vector<WorldPtr>& pool, int n_episodes, std::uint64_t seed,
                    int window) {
  if (pool.empty()) throw Error(ErrorCode::kInvalidArgument, "evaluate: empty track pool");
  EvalReport report;
  RacingEnv env(env_cfg);
  std::vector<bool> flags;
  for (int k = 0; k < n_episodes; ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    const int track = uniform_int(rng, 0, static_cast<int>(pool.size()) - 1);
    std::vector<double> obs = env.reset(rng(), pool[track]);
    EpisodeStats st;
    while (true) {
      const StepResult r = env.step(policy(obs));
      st.episode_return += r.reward;
      ++st.length;
      if (r.done) {
        st.collision = r.info.collision;
        st.timeout = r.info.timeout;
        st.success = r.info.lap_complete && !r.info.collision;
        if (st.success) st.lap_time = env.state().time;
        break;
      }
      obs = r.observation;
    }
    flags.push_back(st.success);
    report.episodes.push_back(st);
  }
  report.success_rate = moving_success_rate(flags, window);
  return report;
}

EvalReport evaluate(const MlpParams& policy, const EnvConfig& env, const std::vector<WorldPtr>& pool,
                    int n_episodes, std::uint64_t seed, int window, bool stochastic) {
  if (policy.input_size() != env.observation_size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "policy expects observations of size " + std::to_string(policy.input_size()) +
                    " but the environment produces " + std::to_string(env.observation_size()));
  }
  Rng rng(derive_seed(seed, 0x5a3b1e));
  ForwardCache cache;
  PolicyFn fn = [&](const std::vector<double>& obs) {
    forward(policy, obs, cache);
    std::vector<double> a = cache.output();
    if (stochastic) a = gaussian_sample(a, policy.log_std, rng).action;
    return Action{a[0], a.size() > 1 ? a[1] : 0.0};
  };
  return evaluate(fn, env, pool, n_episodes, seed, window);
}

std::string format_metrics_row(const MetricsRow& r) {
  std::string s = std::to_string(r.update) + "," + std::to_string(r.step) + ",";
  if (r.mean_ep_reward) s += fmt(*r.mean_ep_reward);
  s += "," + fmt(r.policy_loss) + "," + fmt(r.value_loss) + "," + fmt(r.entropy) + "," +
       fmt(r.clip_frac) + ",";
  if (r.success_rate) s += fmt(*r.success_rate);
  s += "," + fmt(r.wall_s);
  return s;
}

std::vector<MetricsRow> read_metrics(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kMetricsHeader) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": unexpected metrics header");
  }
  std::vector<MetricsRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 9) {
      throw Error(ErrorCode::kMalformedFile,
                  path.string() + ":" + std::to_string(lineno) + ": expected 9 columns");
    }
    try {
      MetricsRow r;
      r.update = std::stoi(cells[0]);
      r.step = std::stoll(cells[1]);
      r.mean_ep_reward = parse_cell(cells[2]);
      r.policy_loss = std::stod(cells[3]);
      r.value_loss = std::stod(cells[4]);
      r.entropy = std::stod(cells[5]);
      r.clip_frac = std::stod(cells[6]);
      r.success_rate = parse_cell(cells[7]);
      r.wall_s = std::stod(cells[8]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kMalformedFile,
                  path.string() + ":" + std::to_string(lineno) + ": bad number");
    }
  }
  return rows;
}

PolicyCheckpoint load_checkpoint_dir(const fs::path& dir) {
  PolicyCheckpoint c;
  c.policy = load_params(dir / "policy.bin");
  if (fs::exists(dir / "value.bin")) c.value = load_params(dir / "value.bin");
  if (fs::exists(dir / "state.json")) {
    const SavedState st = load_state(dir);
    c.step = st.step;
    c.update = st.update;
  }
  return c;
}

TrainResult train(const TrainerConfig& cfg, const EnvConfig& env_cfg,
                  const std::vector<WorldPtr>& train_pool, const std::vector<WorldPtr>& eval_pool,
                  const fs::path& out_dir, const TrainOptions& opt) {
  cfg.validate();
  env_cfg.validate();
  if (train_pool.empty()) throw Error(ErrorCode::kInvalidArgument, "train: empty track pool");
  const auto& evals = eval_pool.empty() ? train_pool : eval_pool;
  const int obs_dim = env_cfg.observation_size();
  const fs::path ckpt = out_dir / "checkpoints";
  const fs::path latest = ckpt / "latest";
  const fs::path metrics_path = out_dir / "metrics.csv";
  fs::create_directories(ckpt);

  MlpParams policy, value;
  AdamState policy_adam, value_adam;
  SavedState st;
  const bool resuming = opt.resume && fs::exists(latest / "state.json");
  if (resuming) {
    policy = load_params(latest / "policy.bin");
    value = load_params(latest / "value.bin");
    policy_adam = load_adam(latest / "policy.adam");
    value_adam = load_adam(latest / "value.adam");
    st = load_state(latest);
    if (policy.input_size() != obs_dim || value.input_size() != obs_dim) {
      throw Error(ErrorCode::kDimensionMismatch, "resume: checkpoint observation size " +
                                                     std::to_string(policy.input_size()) +
                                                     " differs from " + std::to_string(obs_dim));
    }
    // Drop rows written after the checkpoint so the step column stays
    // monotone.
    std::vector<MetricsRow> kept;
    if (fs::exists(metrics_path)) {
      for (const auto& r : read_metrics(metrics_path)) {
        if (r.update <= st.update) kept.push_back(r);
      }
    }
    std::string text = std::string(kMetricsHeader) + "\n";
    for (const auto& r : kept) text += format_metrics_row(r) + "\n";
    write_file_atomic(metrics_path, text);
  } else {
    policy = init_mlp(net_sizes(obs_dim, cfg.policy_hidden, 2), 0.01, derive_seed(cfg.seed, 1), 2);
    value = init_mlp(net_sizes(obs_dim, cfg.value_hidden, 1), 1.0, derive_seed(cfg.seed, 2));
    policy_adam = AdamState::for_params(policy);
    value_adam = AdamState::for_params(value);
    write_file_atomic(metrics_path, std::string(kMetricsHeader) + "\n");
  }

  std::ofstream metrics(metrics_path, std::ios::app);
  if (!metrics) throw Error(ErrorCode::kIo, "cannot append to " + metrics_path.string());

  const std::uint64_t stream = static_cast<std::uint64_t>(st.update);
  RolloutCollector collector(env_cfg, train_pool, cfg.num_envs,
                             derive_seed(derive_seed(cfg.seed, 0xc011ec7), stream));
  Rng shuffle_rng(derive_seed(derive_seed(cfg.seed, 0x5b0ff1e), stream));
  const PpoLossConfig loss_cfg{cfg.surrogate_epsilon, cfg.value_coef, cfg.entropy_coef};
  const int steps_per_env = cfg.batch_size / cfg.num_envs;
  const int n_updates = static_cast<int>(cfg.total_steps / cfg.batch_size);
  const auto t0 = std::chrono::steady_clock::now();

  TrainResult result;
  result.best_success_rate = st.best_success;
  std::optional<double> success_rate;
  if (!st.window.empty()) success_rate = moving_success_rate(st.window, cfg.eval_window);
  std::vector<std::size_t> perm(cfg.batch_size);
  int done_here = 0;

  for (int u = st.update + 1; u <= n_updates; ++u) {
    if ((opt.stop && opt.stop->load()) || (opt.max_updates > 0 && done_here >= opt.max_updates)) {
      result.interrupted = true;
      break;
    }
    RolloutBuffer buf = collector.collect(policy, value, steps_per_env);
    buf.compute_advantages(cfg.gamma, cfg.gae_lambda);
    normalize_advantages(buf.advantages);

    double pl = 0.0, vl = 0.0, ent = 0.0, cf = 0.0;
    int n_mb = 0;
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
      for (std::size_t i = perm.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_int(shuffle_rng, 0, static_cast<int>(i) - 1));
        std::swap(perm[i - 1], perm[j]);
      }
      for (int m = 0; m < cfg.batch_size; m += cfg.minibatch_size) {
        const std::span<const std::size_t> mb(perm.data() + m, cfg.minibatch_size);
        const PpoLossResult loss = ppo_loss(buf, mb, policy, value, loss_cfg);
        adam_update(policy, loss.policy_grad, policy_adam, cfg.lr, cfg.grad_clip);
        adam_update(value, loss.value_grad, value_adam, cfg.lr, cfg.grad_clip);
        pl += loss.policy_loss;
        vl += loss.value_loss;
        ent += loss.entropy;
        cf += loss.clip_fraction;
        ++n_mb;
      }
    }
    if (!policy.all_finite() || !value.all_finite()) {
      throw Error(ErrorCode::kNonFinite, "parameters became non-finite at update " +
                                             std::to_string(u) + "; last good checkpoint kept");
    }
    st.update = u;
    st.step += cfg.batch_size;

    MetricsRow row;
    row.update = u;
    row.step = st.step;
    const auto finished = collector.take_finished();
    if (!finished.empty()) {
      double sum = 0.0;
      for (const auto& e : finished) sum += e.episode_return;
      row.mean_ep_reward = sum / static_cast<double>(finished.size());
    }
    row.policy_loss = pl / n_mb;
    row.value_loss = vl / n_mb;
    row.entropy = ent / n_mb;
    row.clip_frac = cf / n_mb;

    bool new_best = false;
    if (u % cfg.eval_interval == 0) {
      const EvalReport rep =
          evaluate(policy, env_cfg, evals, cfg.eval_episodes,
                   derive_seed(derive_seed(cfg.seed, 0xe7a1), static_cast<std::uint64_t>(u)),
                   cfg.eval_window, cfg.stochastic_eval);
      for (const auto& e : rep.episodes) st.window.push_back(e.success);
      if (st.window.size() > static_cast<std::size_t>(cfg.eval_window)) {
        st.window.erase(st.window.begin(),
                        st.window.end() - static_cast<std::ptrdiff_t>(cfg.eval_window));
      }
      success_rate = moving_success_rate(st.window, cfg.eval_window);
      if (*success_rate > st.best_success) {
        st.best_success = *success_rate;
        new_best = true;
      }
    }
    row.success_rate = success_rate;
    row.wall_s = cfg.log_wall_time
                     ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
                     : 0.0;
    metrics << format_metrics_row(row) << "\n";
    metrics.flush();

    save_dir(latest, policy, value, policy_adam, value_adam, st, cfg);
    if (new_best) save_dir(ckpt / "best", policy, value, policy_adam, value_adam, st, cfg);
    if (u % cfg.checkpoint_interval == 0) {
      char name[32];
      std::snprintf(name, sizeof(name), "update_%06d", u);
      save_dir(ckpt / name, policy, value, policy_adam, value_adam, st, cfg);
    }
    result.rows.push_back(row);
    ++done_here;
    if (opt.on_update) opt.on_update(row);
  }
  if (!fs::exists(latest / "policy.bin")) {
    save_dir(latest, policy, value, policy_adam, value_adam, st, cfg);
  }
  result.updates = st.update;
  result.steps = st.step;
  result.best_success_rate = st.best_success;
  result.final_policy = latest / "policy.bin";
  return result;
}

}  // namespace trackforge
