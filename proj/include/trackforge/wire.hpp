#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "trackforge/env.hpp"
#include "trackforge/world.hpp"

namespace trackforge {

inline constexpr int kWireProtocolVersion = 1;

// One environment behind the newline-delimited JSON protocol. Every request
// line yields exactly one response line (without the trailing newline).
//   {"cmd":"spec"}                    -> {obs_dim, act_dim, act_low, act_high, ...}
//   {"cmd":"reset","seed":S,"track":K} -> {obs, info}
//   {"cmd":"step","action":[a, b]}     -> {obs, reward, done, info}
//   {"cmd":"close"}                    -> {closed: true}
// Failures produce {"error": message} and leave the session usable.
class WireSession {
 public:
  WireSession(EnvConfig config, std::shared_ptr<const std::vector<WorldPtr>> pool);

  std::string handle(const std::string& line);
  bool closed() const { return closed_; }

 private:
  EnvConfig config_;
  std::shared_ptr<const std::vector<WorldPtr>> pool_;
  std::unique_ptr<RacingEnv> env_;
  bool closed_ = false;
};

// Track picked by a reset without an explicit index.
std::size_t default_track_for_seed(std::uint64_t seed, std::size_t pool_size);

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  // Called with the bound port once the server is accepting.
  std::function<void(int)> on_listening;
  const std::atomic<bool>* stop = nullptr;
};

// Accepts connections until `stop` turns true, serving each one with its
// own session on its own thread.
void run_server(const EnvConfig& config, std::shared_ptr<const std::vector<WorldPtr>> pool,
                const ServerOptions& options);

// Minimal blocking line client used by tests and tools.
class WireClient {
 public:
  WireClient(const std::string& host, int port);
  ~WireClient();
  WireClient(const WireClient&) = delete;
  WireClient& operator=(const WireClient&) = delete;

  std::string request(const std::string& line);

 private:
  int fd_ = -1;
  std::string pending_;
};

}  // namespace trackforge
