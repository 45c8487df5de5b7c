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

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tcfuzz/cli/config.hpp"
#include "tcfuzz/executor/executor.hpp"

namespace tcfuzz::cli {

enum class Stage { Errors, Rules, Learn, Genabs, Fuzz };
const char* stage_name(Stage s);
std::optional<Stage> parse_stage(const std::string& s);

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitStage = 3 };

struct ApiOutcome {
  std::string api;
  bool ok = false;
  bool cached = false;
  std::string message;  // failure reason
  json stats = json::object();
};

struct StageSummary {
  Stage stage = Stage::Errors;
  std::vector<ApiOutcome> apis;
  bool ok() const;
};

json outcome_to_json(const ApiOutcome& o);
ApiOutcome outcome_from_json(const json& j);
json summary_to_json(const StageSummary& s, const RunConfig& cfg);

// Artifact locations for one API.
std::string seeds_path(const RunConfig& c, const std::string& api);
std::string errors_path(const RunConfig& c, const std::string& api);
std::string rules_path(const RunConfig& c, const std::string& api);
std::string learn_path(const RunConfig& c, const std::string& api);
std::string corpus_path(const RunConfig& c, const std::string& api);
std::string fuzz_report_path(const RunConfig& c, const std::string& api);
std::string findings_dir(const RunConfig& c, const std::string& api);
std::string summary_path(const RunConfig& c, Stage s);
// Provenance and freshness record written next to each artifact.
std::string meta_path(const std::string& artifact);

// Throws exec::ExecutorUnavailable.
std::unique_ptr<exec::Executor> make_executor(const RunConfig& c);

// Requested APIs, or the executor's whole catalog. Throws ConfigError for
// names the executor does not offer.
std::vector<std::string> resolve_apis(const RunConfig& c, exec::Executor& executor);

// One stage for one API; failures come back in the outcome.
ApiOutcome run_stage(Stage s, const RunConfig& c, const std::string& api, exec::Executor& executor);

// Runs `fn` for every API, in worker processes when `workers` > 1. A worker
// that dies yields a failed outcome.
std::vector<ApiOutcome> run_pool(const std::vector<std::string>& apis, size_t workers, const std::string& scratch,
                                 const std::function<ApiOutcome(const std::string&)>& fn);

// `errors`, `rules`, `learn`, `genabs`, `fuzz` or `all`.
int cmd_pipeline(const std::string& stage, const RunConfig& c, std::ostream& out, std::ostream& err);

int cmd_report(const RunConfig& c, std::ostream& out, std::ostream& err);

// Checks a rule against an input document. Without `params`, every tuple of
// distinct arguments whose values conform to the bindings is checked.
int cmd_eval(const std::string& rule_text, const std::string& input_path, const std::vector<std::string>& params,
             std::ostream& out, std::ostream& err);

}  // namespace tcfuzz::cli
