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

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcfuzz/value.hpp"

namespace tcfuzz::exec {

enum class ExecStatus { Ok, Error, Crash, Timeout };
const char* exec_status_name(ExecStatus s);
std::optional<ExecStatus> parse_exec_status(const std::string& s);

// Gate used while learning and generating: an input that crashes still got
// past every validity check of the API.
inline bool is_valid(ExecStatus s) { return s == ExecStatus::Ok || s == ExecStatus::Crash; }

struct ExecRequest {
  int64_t id = 0;
  std::string api;
  std::string backend = "cpu";
  ApiInput input;
  bool want_outputs = false;
};

struct ExecResult {
  int64_t id = 0;
  ExecStatus status = ExecStatus::Ok;
  std::optional<std::string> error_message;  // Error text, or crash detail
  std::optional<std::vector<ConcreteValue>> outputs;
  // Per output, values at probe_indices() for summarized outputs; empty otherwise.
  std::vector<std::vector<double>> output_probes;
  std::vector<std::string> covered_branches;
  std::vector<std::string> warnings;  // e.g. "overflow"
  int64_t wall_time_us = 0;
};

struct ApiInfo {
  std::string api;
  ApiSignature signature;
  std::string doc;
  std::vector<std::string> backends;
};

class UnknownApi : public std::runtime_error {
 public:
  explicit UnknownApi(const std::string& api) : std::runtime_error("unknown api '" + api + "'"), api_(api) {}
  const std::string& api() const { return api_; }

 private:
  std::string api_;
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExecutorUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Executor {
 public:
  virtual ~Executor() = default;
  virtual ExecResult run(const ExecRequest& req) = 0;
  virtual const std::vector<ApiInfo>& catalog() const = 0;
  const ApiInfo* find(const std::string& api) const;
};

// Runs the built-in reference targets in the calling process.
class InProcessExecutor : public Executor {
 public:
  InProcessExecutor();
  ExecResult run(const ExecRequest& req) override;
  const std::vector<ApiInfo>& catalog() const override { return catalog_; }

 private:
  std::vector<ApiInfo> catalog_;
};

// Talks the line-delimited protocol to a child process; abnormal child exit
// becomes a Crash result and the child is restarted for the next request.
class SubprocessExecutor : public Executor {
 public:
  explicit SubprocessExecutor(std::vector<std::string> argv,
                              std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
  ~SubprocessExecutor() override;
  SubprocessExecutor(const SubprocessExecutor&) = delete;
  SubprocessExecutor& operator=(const SubprocessExecutor&) = delete;

  ExecResult run(const ExecRequest& req) override;
  const std::vector<ApiInfo>& catalog() const override { return catalog_; }
  int restarts() const { return restarts_; }

 private:
  void spawn();
  void kill_child();
  std::optional<std::string> read_line(std::chrono::steady_clock::time_point deadline);
  void write_line(const std::string& s);

  std::vector<std::string> argv_;
  std::chrono::milliseconds timeout_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  bool eof_ = false;
  std::vector<ApiInfo> catalog_;
  int64_t next_id_ = 1;
  int restarts_ = 0;
};

constexpr const char* kProtocolVersion = "1";

json request_to_json(const ExecRequest& r);
ExecRequest request_from_json(const json& j);
json result_to_json(const ExecResult& r);
ExecResult result_from_json(const json& j);
json handshake_json(const std::vector<ApiInfo>& catalog);
std::vector<ApiInfo> handshake_from_json(const json& j);

// Serves requests from `in` until EOF; used by the reference executor tool.
// A simulated crash aborts the process when `abort_on_crash` is set.
void serve(std::istream& in, std::ostream& out, bool abort_on_crash);

}  // namespace tcfuzz::exec
