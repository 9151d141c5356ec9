/*
 * Copyright 2026 The roe-kg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// In-process HTTP endpoint that replays canned policy responses, used by the
// external-policy tests and the acceptance suite.

#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

namespace roe::testing {

class MockPolicyServer {
 public:
  // Maps the decoded request body to (HTTP status, response body).
  using Handler = std::function<std::pair<int, std::string>(const nlohmann::json&)>;

  explicit MockPolicyServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/act", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = nlohmann::json::parse(req.body, nullptr, false);
      {
        std::lock_guard lock(mu_);
        requests_.push_back(body);
        auth_headers_.push_back(req.get_header_value("Authorization"));
      }
      auto [status, text] = handler_(body);
      res.status = status;
      res.set_content(text, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  /// Replays `by_depth[depth]` for each request; unknown depths get an empty
  /// action.
  static Handler by_depth(std::map<int, std::string> by_depth) {
    return [by_depth = std::move(by_depth)](const nlohmann::json& req) -> std::pair<int, std::string> {
      auto it = by_depth.find(req.value("depth", -1));
      if (it == by_depth.end()) return {200, R"({"answers": [], "exploration_paths": []})"};
      return {200, it->second};
    };
  }

  ~MockPolicyServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  MockPolicyServer(const MockPolicyServer&) = delete;
  MockPolicyServer& operator=(const MockPolicyServer&) = delete;

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/act"; }

  std::vector<nlohmann::json> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

  std::vector<std::string> auth_headers() const {
    std::lock_guard lock(mu_);
    return auth_headers_;
  }

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex mu_;
  std::vector<nlohmann::json> requests_;
  std::vector<std::string> auth_headers_;
};

}  // namespace roe::testing
