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

#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tcfuzz/cli/config.hpp"
#include "tcfuzz/cli/pipeline.hpp"

namespace {

using namespace tcfuzz::cli;

struct Overrides {
  std::string config_path;
  std::vector<std::string> apis;
  std::optional<uint64_t> seed;
  std::optional<double> budget_s;
  std::string executor_cmd;
  std::vector<std::string> rulesets;
  std::string out_dir;
  std::optional<size_t> workers;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "JSON configuration file");
  sub->add_option("--api", o.apis, "Restrict the run to this API (repeatable)");
  sub->add_option("--seed", o.seed, "Master seed");
  sub->add_option("--out-dir", o.out_dir, "Root directory of all artifacts");
  sub->add_option("--executor-cmd", o.executor_cmd, "Executor command line; the in-process reference is used if unset");
  sub->add_option("--workers", o.workers, "Parallel API workers (0 = CPU count)");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? default_config() : load_config(o.config_path);
  apply_env(c);
  if (!o.apis.empty()) c.apis = o.apis;
  if (o.seed) c.seed = *o.seed;
  if (o.budget_s) c.fuzz_budget_s = *o.budget_s;
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  if (o.workers) c.workers = *o.workers;
  if (!o.rulesets.empty()) c.rulesets = o.rulesets;
  if (!o.executor_cmd.empty()) {
    std::istringstream in(o.executor_cmd);
    c.executor_cmd.clear();
    for (std::string w; in >> w;) c.executor_cmd.push_back(w);
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constraint-guided fuzzing of tensor library APIs"};
  app.require_subcommand(1);
  Overrides o;
  std::string rule_text, input_path;
  std::vector<std::string> params;

  for (const char* name : {"errors", "rules", "learn", "genabs", "fuzz", "all"}) {
    std::string help = std::string(name) == "all" ? "Run every stage in order" : std::string("Run the ") + name + " stage";
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, o);
    if (std::string(name) == "fuzz" || std::string(name) == "all")
      sub->add_option("--budget-s", o.budget_s, "Fuzzing budget per API in seconds");
    if (std::string(name) == "rules" || std::string(name) == "all")
      sub->add_option("--ruleset", o.rulesets, "Rule file for the file source (repeatable, replaces the list)");
  }
  auto* report = app.add_subcommand("report", "Summarize the artifacts of a run");
  add_common(report, o);
  auto* eval = app.add_subcommand("eval", "Evaluate one rule against one input document");
  eval->add_option("rule", rule_text, "Rule text")->required();
  eval->add_option("input", input_path, "Input document (JSON)")->required();
  eval->add_option("--params", params, "Argument names bound to the rule's variables, in order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (eval->parsed()) return cmd_eval(rule_text, input_path, params, std::cout, std::cerr);

  RunConfig c;
  try {
    c = resolve(o);
    validate(c);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (report->parsed()) return cmd_report(c, std::cout, std::cerr);
  return cmd_pipeline(app.get_subcommands().front()->get_name(), c, std::cout, std::cerr);
}
