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

#include "tcfuzz/rules/llm.hpp"

#include <fstream>
#include <sstream>

#include "httplib.h"
#include "tcfuzz/dsl/parser.hpp"
#include "tcfuzz/dsl/ruleset.hpp"
#include "tcfuzz/value.hpp"

namespace tcfuzz::rules {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read prompt asset '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const char* feedback_kind_name(FeedbackKind k) {
  switch (k) {
    case FeedbackKind::FormatError: return "FormatError";
    case FeedbackKind::RedundantBindings: return "RedundantBindings";
    case FeedbackKind::DuplicateRule: return "DuplicateRule";
    case FeedbackKind::ParsingError: return "ParsingError";
    case FeedbackKind::Success: return "Success";
  }
  return "?";
}

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::FailureBound: return "failure-bound";
    case StopReason::Timeout: return "timeout";
    case StopReason::Endpoint: return "endpoint-error";
    case StopReason::MaxTurns: return "max-turns";
  }
  return "?";
}

HttpChatTransport::HttpChatTransport(std::string endpoint, std::string model, std::string api_key,
                                     std::chrono::milliseconds request_timeout)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), api_key_(std::move(api_key)), timeout_(request_timeout) {}

std::string HttpChatTransport::complete(const std::string& system, const std::string& user) {
  std::string base = endpoint_, path;
  size_t scheme = base.find("://");
  size_t slash = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash != std::string::npos) {
    path = base.substr(slash);
    base = base.substr(0, slash);
  }
  while (!path.empty() && path.back() == '/') path.pop_back();
  path += "/v1/chat/completions";

  httplib::Client cli(base);
  if (!cli.is_valid()) throw EndpointError("invalid endpoint '" + endpoint_ + "'");
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  json body{{"model", model_},
            {"messages", json::array({json{{"role", "system"}, {"content", system}},
                                      json{{"role", "user"}, {"content", user}}})}};
  auto res = cli.Post(path, headers, body.dump(), "application/json");
  if (!res) throw EndpointError("request to '" + endpoint_ + "' failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw EndpointError("endpoint '" + endpoint_ + "' answered HTTP " + std::to_string(res->status));
  try {
    return json::parse(res->body).at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw EndpointError(std::string("malformed completion: ") + e.what());
  }
}

PromptAssets load_prompt_assets(const std::string& dir) {
  PromptAssets a;
  a.system = read_file(dir + "/system.txt");
  a.templ = read_file(dir + "/template.txt");
  a.grammar = read_file(dir + "/grammar.txt");
  auto loaded = dsl::load_ruleset(dir + "/examples.rules");
  if (!loaded.issues.empty()) throw std::runtime_error(loaded.issues.front().to_string());
  for (const auto& e : loaded.rules) a.examples.push_back(dsl::render_rule(e.rule.rule));
  return a;
}

std::string build_prompt(const PromptAssets& assets, const PromptInputs& in, const std::vector<Feedback>& last) {
  std::string errors, examples, feedback;
  for (const auto& e : in.errors) errors += "- " + e + "\n";
  if (errors.empty()) errors = "(none collected)\n";
  for (const auto& e : assets.examples) examples += e + "\n";
  for (const auto& f : last) {
    feedback += std::string("- ") + feedback_kind_name(f.kind);
    if (!f.candidate.empty()) feedback += " for `" + f.candidate + "`";
    if (!f.detail.empty()) feedback += ": " + f.detail;
    feedback += "\n";
  }
  if (feedback.empty()) feedback = "(first request)\n";
  std::string out = assets.templ;
  replace_all(out, "{{api}}", in.api);
  replace_all(out, "{{grammar}}", assets.grammar);
  replace_all(out, "{{docs}}", in.docs);
  replace_all(out, "{{errors}}", errors);
  replace_all(out, "{{examples}}", examples);
  replace_all(out, "{{feedback}}", feedback);
  return out;
}

std::vector<std::string> split_candidates(const std::string& response) {
  std::vector<std::string> out;
  std::istringstream in(response);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.rfind("```", 0) == 0) continue;
    if (t.rfind("- ", 0) == 0 || t.rfind("* ", 0) == 0) t = trim(t.substr(2));
    if (!t.empty() && t.front() == '{' && t.find("|=") != std::string::npos) out.push_back(t);
  }
  return out;
}

std::vector<Feedback> classify_response(const std::string& response, std::vector<dsl::TypedRule>& accepted) {
  auto candidates = split_candidates(response);
  if (candidates.empty())
    return {Feedback{FeedbackKind::FormatError, "no line of the form `{bindings} |= expression` was found", ""}};
  std::vector<Feedback> out;
  for (const auto& text : candidates) {
    Feedback f;
    f.candidate = text;
    try {
      dsl::Rule r = dsl::parse_rule(text);
      auto used = dsl::used_variables(r);
      std::string unused;
      for (const auto& b : r.bindings)
        if (std::find(used.begin(), used.end(), b.name) == used.end()) unused += (unused.empty() ? "" : ", ") + b.name;
      if (!unused.empty()) {
        f.kind = FeedbackKind::RedundantBindings;
        f.detail = "bound but unused: " + unused;
      } else {
        dsl::TypedRule typed = dsl::type_check(r);
        bool dup = std::any_of(accepted.begin(), accepted.end(),
                               [&](const dsl::TypedRule& a) { return dsl::rule_equal(a.rule, typed.rule); });
        if (dup) {
          f.kind = FeedbackKind::DuplicateRule;
          f.detail = "already generated";
        } else {
          f.kind = FeedbackKind::Success;
          accepted.push_back(std::move(typed));
        }
      }
    } catch (const dsl::TypeErrorReport& e) {
      f.kind = FeedbackKind::ParsingError;
      f.detail = e.errors().empty() ? e.what() : e.errors().front().message;
    } catch (const std::exception& e) {
      f.kind = FeedbackKind::ParsingError;
      f.detail = e.what();
    }
    out.push_back(std::move(f));
  }
  return out;
}

LlmResult generate_rules_llm(const PromptAssets& assets, const PromptInputs& in, ChatTransport& transport,
                             const LlmLimits& limits, const Clock& clock) {
  Clock now = clock ? clock : [] { return std::chrono::steady_clock::now(); };
  LlmResult res;
  auto start = now();
  std::vector<Feedback> last;
  while (true) {
    if (res.failures >= limits.failure_bound) {
      res.stop = StopReason::FailureBound;
      break;
    }
    if (now() - start >= limits.timeout) {
      res.stop = StopReason::Timeout;
      break;
    }
    if (limits.max_turns && res.turns.size() >= limits.max_turns) {
      res.stop = StopReason::MaxTurns;
      break;
    }
    LlmTurn turn;
    try {
      turn.response = transport.complete(assets.system, build_prompt(assets, in, last));
    } catch (const EndpointError& e) {
      res.stop = StopReason::Endpoint;
      res.warning = e.what();
      break;
    }
    turn.feedback = classify_response(turn.response, res.rules);
    for (const auto& f : turn.feedback)
      if (f.kind != FeedbackKind::Success) ++res.failures;
    last = turn.feedback;
    res.turns.push_back(std::move(turn));
  }
  return res;
}

}  // namespace tcfuzz::rules
