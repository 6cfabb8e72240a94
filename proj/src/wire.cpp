#include "trackforge/wire.hpp"

#include "json.hpp"

namespace trackforge {
namespace {

using nlohmann::json;

std::string error_response(const std::string& message) {
  return json{{"error", message}}.dump();
}

json info_json(const StepInfo& info) {
  return {{"frenet",
           {{"s", info.frenet.s}, {"d", info.frenet.d}, {"v_s", info.frenet.v_s},
            {"v_d", info.frenet.v_d}}},
          {"collision", info.collision},
          {"lap_complete", info.lap_complete},
          {"timeout", info.timeout}};
}

}  // namespace

std::size_t default_track_for_seed(std::uint64_t seed, std::size_t pool_size) {
  return pool_size == 0 ? 0 : derive_seed(seed, 0x77ac) % pool_size;
}

WireSession::WireSession(EnvConfig config, std::shared_ptr<const std::vector<WorldPtr>> pool)
    : config_(std::move(config)), pool_(std::move(pool)) {
  config_.validate();
  if (!pool_ || pool_->empty()) throw Error(ErrorCode::kInvalidArgument, "wire: empty track pool");
}

std::string WireSession::handle(const std::string& line) {
  json req;
  try {
    req = json::parse(line);
  } catch (const json::parse_error& e) {
    return error_response(std::string("malformed JSON: ") + e.what());
  }
  if (!req.is_object() || !req.contains("cmd") || !req["cmd"].is_string()) {
    return error_response("request must be an object with a string 'cmd'");
  }
  const std::string cmd = req["cmd"];
  try {
    if (cmd == "spec") {
      return json{{"obs_dim", config_.observation_size()},
                  {"act_dim", 2},
                  {"act_low", {-1.0, -1.0}},
                  {"act_high", {1.0, 1.0}},
                  {"beam_count", config_.lidar.beam_count},
                  {"stack_depth", config_.episode.stack_depth},
                  {"track_count", pool_->size()},
                  {"protocol", kWireProtocolVersion}}
          .dump();
    }
    if (cmd == "reset") {
      std::uint64_t seed = 0;
      if (req.contains("seed")) {
        if (!req["seed"].is_number_unsigned()) return error_response("seed must be a non-negative integer");
        seed = req["seed"].get<std::uint64_t>();
      }
      std::size_t track = default_track_for_seed(seed, pool_->size());
      if (req.contains("track") && !req["track"].is_null()) {
        if (!req["track"].is_number_unsigned()) return error_response("track must be a non-negative integer");
        track = req["track"].get<std::size_t>();
        if (track >= pool_->size()) {
          return error_response("track index " + std::to_string(track) + " out of range (pool has " +
                                std::to_string(pool_->size()) + ")");
        }
      }
      if (!env_) env_ = std::make_unique<RacingEnv>(config_);
      const auto obs = env_->reset(seed, (*pool_)[track]);
      return json{{"obs", obs}, {"info", {{"track", track}, {"seed", seed}}}}.dump();
    }
    if (cmd == "step") {
      if (!env_ || !env_->started()) return error_response("reset required");
      const auto it = req.find("action");
      if (it == req.end() || !it->is_array() || it->size() != 2 || !(*it)[0].is_number() ||
          !(*it)[1].is_number()) {
        return error_response("action must be an array of 2 numbers");
      }
      if (env_->done()) return error_response("episode is done; reset required");
      const StepResult r = env_->step({(*it)[0].get<double>(), (*it)[1].get<double>()});
      return json{{"obs", r.observation},
                  {"reward", r.reward},
                  {"done", r.done},
                  {"info", info_json(r.info)}}
          .dump();
    }
    if (cmd == "close") {
      closed_ = true;
      env_.reset();
      return json{{"closed", true}}.dump();
    }
    return error_response("unknown cmd '" + cmd + "'");
  } catch (const Error& e) {
    return error_response(e.what());
  }
}

}  // namespace trackforge
