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

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "tcfuzz/executor/executor.hpp"

namespace tcfuzz::exec {

SubprocessExecutor::SubprocessExecutor(std::vector<std::string> argv, std::chrono::milliseconds timeout)
    : argv_(std::move(argv)), timeout_(timeout) {
  if (argv_.empty()) throw ExecutorUnavailable("empty executor command");
  ::signal(SIGPIPE, SIG_IGN);
  spawn();
}

SubprocessExecutor::~SubprocessExecutor() { kill_child(); }

void SubprocessExecutor::spawn() {
  int in_pipe[2], out_pipe[2];
  if (::pipe(in_pipe) != 0) throw ExecutorUnavailable(std::string("pipe: ") + std::strerror(errno));
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw ExecutorUnavailable(std::string("pipe: ") + std::strerror(errno));
  }
  pid_t pid = ::fork();
  if (pid < 0) throw ExecutorUnavailable(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    std::vector<char*> args;
    for (auto& a : argv_) args.push_back(a.data());
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buffer_.clear();
  eof_ = false;

  auto line = read_line(std::chrono::steady_clock::now() + timeout_);
  if (!line) {
    kill_child();
    throw ExecutorUnavailable("executor '" + argv_[0] + "' did not complete the handshake");
  }
  try {
    auto catalog = handshake_from_json(json::parse(*line));
    if (catalog_.empty()) catalog_ = std::move(catalog);
  } catch (const std::exception& e) {
    kill_child();
    throw ExecutorUnavailable(std::string("bad handshake: ") + e.what());
  }
}

void SubprocessExecutor::kill_child() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }
  pid_ = -1;
}

std::optional<std::string> SubprocessExecutor::read_line(std::chrono::steady_clock::time_point deadline) {
  while (true) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd p{from_child_, POLLIN, 0};
    int rc = ::poll(&p, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) return std::nullopt;
    char buf[65536];
    ssize_t n = ::read(from_child_, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      eof_ = true;
      return std::nullopt;
    }
    buffer_.append(buf, static_cast<size_t>(n));
  }
}

void SubprocessExecutor::write_line(const std::string& s) {
  std::string data = s + "\n";
  size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return;
    off += static_cast<size_t>(n);
  }
}

ExecResult SubprocessExecutor::run(const ExecRequest& req) {
  if (!find(req.api)) throw UnknownApi(req.api);
  if (pid_ < 0) {
    spawn();
    ++restarts_;
  }
  ExecRequest sent = req;
  sent.id = next_id_++;
  auto start = std::chrono::steady_clock::now();
  write_line(request_to_json(sent).dump());
  auto line = read_line(start + timeout_);
  ExecResult r;
  r.id = req.id;
  if (!line) {
    int status = 0;
    bool exited = eof_ ? ::waitpid(pid_, &status, 0) == pid_ : ::waitpid(pid_, &status, WNOHANG) == pid_;
    if (!exited) {
      // The child is still running: the deadline passed.
      kill_child();
      r.status = ExecStatus::Timeout;
      r.error_message = "no reply within " + std::to_string(timeout_.count()) + " ms";
    } else {
      pid_ = -1;
      kill_child();
      r.status = ExecStatus::Crash;
      if (WIFSIGNALED(status))
        r.error_message = "executor killed by signal " + std::to_string(WTERMSIG(status));
      else
        r.error_message = "executor exited with status " + std::to_string(WEXITSTATUS(status));
    }
    r.wall_time_us =
        std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start).count();
    return r;
  }
  json j;
  try {
    j = json::parse(*line);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("unparseable reply: ") + e.what());
  }
  if (j.contains("error")) {
    if (j["error"] == "unknown_api") throw UnknownApi(req.api);
    throw ProtocolError(j.value("message", std::string("executor rejected the request")));
  }
  r = result_from_json(j);
  if (r.id != sent.id) throw ProtocolError("reply id mismatch");
  r.id = req.id;
  return r;
}

}  // namespace tcfuzz::exec
