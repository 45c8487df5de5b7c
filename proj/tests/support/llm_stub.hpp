// Copyright 2026 The tcfuzz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "tcfuzz/value.hpp"

namespace tcfuzz::testing {

// Local chat-completion endpoint answering from a script.
class LlmStub {
 public:
  using Script = std::function<std::string(size_t turn)>;

  explicit LlmStub(Script script, int fail_status = 0) : script_(std::move(script)), fail_status_(fail_status) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      size_t turn;
      {
        std::lock_guard<std::mutex> lock(mu_);
        turn = prompts_.size();
        auto j = json::parse(req.body);
        prompts_.push_back(j.at("messages").at(1).at("content").get<std::string>());
      }
      if (fail_status_) {
        res.status = fail_status_;
        res.set_content("{\"error\":\"denied\"}", "application/json");
        return;
      }
      json body{{"choices", json::array({json{{"message", json{{"role", "assistant"}, {"content", script_(turn)}}}}})}};
      res.set_content(body.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LlmStub() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::vector<std::string> prompts() const {
    std::lock_guard<std::mutex> lock(mu_);
    return prompts_;
  }

 private:
  Script script_;
  int fail_status_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::vector<std::string> prompts_;
};

// Clock that advances a fixed step on every reading.
struct SteppingClock {
  std::chrono::steady_clock::time_point t{};
  std::chrono::milliseconds step;
  std::chrono::steady_clock::time_point operator()() {
    auto now = t;
    t += step;
    return now;
  }
};

}  // namespace tcfuzz::testing
