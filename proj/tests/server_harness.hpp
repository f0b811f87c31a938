#pragma once

#include <thread>

#include <httplib.h>

#include "rsreason/server.hpp"

namespace testing_util {

// Reward server on an ephemeral loopback port, stopped on destruction.
class RewardServer {
 public:
  RewardServer() {
    rsreason::mount_reward_routes(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~RewardServer() {
    server_.stop();
    thread_.join();
  }
  RewardServer(const RewardServer&) = delete;
  RewardServer& operator=(const RewardServer&) = delete;

  [[nodiscard]] int port() const { return port_; }
  [[nodiscard]] httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(10);
    return c;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace testing_util
