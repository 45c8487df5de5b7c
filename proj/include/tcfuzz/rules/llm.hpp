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
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcfuzz/dsl/typecheck.hpp"

namespace tcfuzz::rules {

enum class FeedbackKind { FormatError, RedundantBindings, DuplicateRule, ParsingError, Success };
const char* feedback_kind_name(FeedbackKind k);

struct Feedback {
  FeedbackKind kind = FeedbackKind::Success;
  std::string detail;
  std::string candidate;  // rule text the feedback is about; empty for FormatError
};

class EndpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One chat completion. Throws EndpointError.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string complete(const std::string& system, const std::string& user) = 0;
};

// OpenAI-style `POST <base>/v1/chat/completions`.
class HttpChatTransport : public ChatTransport {
 public:
  HttpChatTransport(std::string endpoint, std::string model, std::string api_key,
                    std::chrono::milliseconds request_timeout = std::chrono::milliseconds(30000));
  std::string complete(const std::string& system, const std::string& user) override;

 private:
  std::string endpoint_, model_, api_key_;
  std::chrono::milliseconds timeout_;
};

struct PromptAssets {
  std::string system;
  std::string templ;     // slots: {{api}} {{grammar}} {{docs}} {{errors}} {{examples}} {{feedback}}
  std::string grammar;
  std::vector<std::string> examples;
};

// Reads system.txt, template.txt, grammar.txt and examples.rules from `dir`.
// Throws std::runtime_error naming the missing file.
PromptAssets load_prompt_assets(const std::string& dir);

struct PromptInputs {
  std::string api;
  std::string docs;
  std::vector<std::string> errors;
};

std::string build_prompt(const PromptAssets& assets, const PromptInputs& in, const std::vector<Feedback>& last);

// Candidate rule lines of a response: lines starting with `{` that contain
// `|=`, after stripping code fences and list markers.
std::vector<std::string> split_candidates(const std::string& response);

// Classifies every candidate against the accepted set; a response with no
// candidate yields a single FormatError. Accepted rules are appended.
std::vector<Feedback> classify_response(const std::string& response, std::vector<dsl::TypedRule>& accepted);

struct LlmLimits {
  size_t failure_bound = 100;
  std::chrono::milliseconds timeout{60000};
  size_t max_turns = 0;  // 0: unbounded
};

enum class StopReason { FailureBound, Timeout, Endpoint, MaxTurns };
const char* stop_reason_name(StopReason r);

struct LlmTurn {
  std::string response;
  std::vector<Feedback> feedback;
};

struct LlmResult {
  std::vector<dsl::TypedRule> rules;
  std::vector<LlmTurn> turns;
  size_t failures = 0;
  StopReason stop = StopReason::Timeout;
  std::string warning;
};

using Clock = std::function<std::chrono::steady_clock::time_point()>;

// Prompts until the failure bound, the timeout or the turn cap. An endpoint
// failure ends the loop with the rules accepted so far and a warning.
LlmResult generate_rules_llm(const PromptAssets& assets, const PromptInputs& in, ChatTransport& transport,
                             const LlmLimits& limits, const Clock& clock = {});

}  // namespace tcfuzz::rules
