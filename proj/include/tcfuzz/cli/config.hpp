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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcfuzz/value.hpp"

namespace tcfuzz::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Paths {
  std::string seeds, errors, rules, learn, corpus, findings, reports;
};

struct RunConfig {
  std::string library = "ref";
  std::vector<std::string> apis;  // empty: every API the executor offers
  std::string out_dir = "tcfuzz-out";
  Paths paths;                    // empty entries resolve under out_dir
  uint64_t seed = 0;
  size_t workers = 0;             // 0: one per CPU

  std::vector<std::string> executor_cmd;  // empty: built-in reference targets
  int64_t executor_timeout_ms = 10000;

  size_t seed_count = 117;        // seeds written for reference targets
  bool generate_reference_seeds = true;
  double errors_random_budget_s = 30;
  size_t errors_max_random = 500;

  std::vector<std::string> rule_sources = {"enumerator", "file"};
  std::vector<std::string> rulesets;
  int enum_max_depth = 3;
  size_t enum_count = 50;

  std::string llm_endpoint;
  std::string llm_model;
  std::string llm_api_key_env = "TCFUZZ_LLM_API_KEY";
  std::string llm_api_key;        // filled from the environment
  size_t llm_failure_bound = 100;
  double llm_timeout_s = 60;
  double llm_request_timeout_s = 30;
  size_t llm_max_turns = 0;
  std::string prompts_dir;

  int trials = 30;
  size_t min_seed_inputs = 20;

  double p = 0.3;
  size_t corpus_size = 100;
  double genabs_timeout_s = 60;

  double fuzz_budget_s = 180;
  double tolerance = 0.01;
  std::vector<std::string> backends = {"cpu", "gpu"};
  size_t fuzz_max_inputs = 0;
  bool stop_at_first_finding = false;

  // Resolved directory for one artifact kind.
  std::string dir(const std::string& kind) const;
};

// Directory holding the shipped rulesets and prompts.
std::string assets_dir();

RunConfig default_config();
// Overlays the document on `base`. Unknown keys and bad types throw
// ConfigError naming the key.
RunConfig config_from_json(const json& doc, RunConfig base = default_config());
// Throws ConfigError naming the file.
RunConfig load_config(const std::string& path);
json config_to_json(const RunConfig& c);

// Environment overrides: TCFUZZ_LLM_ENDPOINT, TCFUZZ_LLM_MODEL and the
// variable named by llm.api_key_env.
void apply_env(RunConfig& c);
// Checks budgets, ranges and sources. Throws ConfigError.
void validate(const RunConfig& c);

}  // namespace tcfuzz::cli
