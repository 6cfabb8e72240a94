#include <thread>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "trackforge/wire.hpp"

using namespace trackforge;
using nlohmann::json;

namespace {

std::shared_ptr<const std::vector<WorldPtr>> wire_pool() {
  return std::make_shared<const std::vector<WorldPtr>>(make_worlds(testing::easy_tracks(3, 21)));
}

void check_same_as_in_process(const std::function<std::string(const std::string&)>& call,
                              const EnvConfig& env, const std::vector<WorldPtr>& pool) {
  RacingEnv direct(env);
  const auto r = json::parse(call(R"({"cmd":"reset","seed":17,"track":2})"));
  REQUIRE_FALSE(r.contains("error"));
  CHECK(r["obs"].get<std::vector<double>>() == direct.reset(17, pool[2]));
  for (int i = 0; i < 30; ++i) {
    const Action a{0.8, 0.3 * std::sin(0.2 * i)};
    const json req = {{"cmd", "step"}, {"action", {a.speed_cmd, a.steer_cmd}}};
    const auto w = json::parse(call(req.dump()));
    REQUIRE_FALSE(w.contains("error"));
    const StepResult d = direct.step(a);
    CHECK(w["obs"].get<std::vector<double>>() == d.observation);
    CHECK(w["reward"].get<double>() == d.reward);
    CHECK(w["done"].get<bool>() == d.done);
    CHECK(w["info"]["frenet"]["s"].get<double>() == d.info.frenet.s);
    CHECK(w["info"]["collision"].get<bool>() == d.info.collision);
    if (d.done) break;
  }
}

}  // namespace

TEST_CASE("spec reports the spaces") {
  const EnvConfig env = testing::small_env(20);
  WireSession s(env, wire_pool());
  const auto j = json::parse(s.handle(R"({"cmd":"spec"})"));
  CHECK(j["obs_dim"] == 4 * (20 + 3));
  CHECK(j["act_dim"] == 2);
  CHECK(j["act_low"] == json::array({-1.0, -1.0}));
  CHECK(j["act_high"] == json::array({1.0, 1.0}));
  CHECK(j["track_count"] == 3);
}

TEST_CASE("errors keep the session usable") {
  WireSession s(testing::small_env(), wire_pool());
  CHECK(json::parse(s.handle(R"({"cmd":"step","action":[0,0]})"))["error"] == "reset required");
  CHECK(json::parse(s.handle("{oops")).contains("error"));
  CHECK(json::parse(s.handle(R"({"cmd":"fly"})")).contains("error"));
  CHECK(json::parse(s.handle(R"({"cmd":"reset","track":9})")).contains("error"));
  CHECK(json::parse(s.handle(R"({"cmd":"reset","seed":-3})")).contains("error"));
  const auto ok = json::parse(s.handle(R"({"cmd":"reset","seed":1})"));
  REQUIRE(ok.contains("obs"));
  CHECK(ok["info"]["track"] == default_track_for_seed(1, 3));
  CHECK(json::parse(s.handle(R"({"cmd":"step","action":[0]})")).contains("error"));
  CHECK(json::parse(s.handle(R"({"cmd":"step","action":[0.5,"x"]})")).contains("error"));
  CHECK(json::parse(s.handle(R"({"cmd":"step","action":[0.5,0.0]})")).contains("reward"));
  CHECK(json::parse(s.handle(R"({"cmd":"close"})"))["closed"] == true);
  CHECK(s.closed());
}

TEST_CASE("session matches the in-process environment exactly") {
  const EnvConfig env = testing::small_env();
  const auto pool = wire_pool();
  WireSession s(env, pool);
  check_same_as_in_process([&](const std::string& l) { return s.handle(l); }, env, *pool);
}

TEST_CASE("tcp server matches the in-process environment exactly") {
  const EnvConfig env = testing::small_env();
  const auto pool = wire_pool();
  std::atomic<bool> stop{false};
  std::atomic<int> port{0};
  ServerOptions opt;
  opt.stop = &stop;
  opt.on_listening = [&](int p) { port = p; };
  std::thread server([&] { run_server(env, pool, opt); });
  while (port == 0) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  {
    WireClient client("127.0.0.1", port);
    const auto spec = json::parse(client.request(R"({"cmd":"spec"})"));
    CHECK(spec["obs_dim"] == env.observation_size());
    check_same_as_in_process([&](const std::string& l) { return client.request(l); }, env, *pool);
    CHECK(json::parse(client.request("not json")).contains("error"));
    CHECK(json::parse(client.request(R"({"cmd":"close"})"))["closed"] == true);
  }
  stop = true;
  server.join();
}
