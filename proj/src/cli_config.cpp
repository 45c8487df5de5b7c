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

#include "tcfuzz/cli/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

namespace tcfuzz::cli {

namespace {

// Reads one object level, rejecting unknown keys.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError("config: " + where() + " must be an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.push_back(key);
    if (!doc_.contains(key)) return;
    try {
      out = doc_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config: " + name(key) + " has the wrong type");
    }
  }

  void section(const std::string& key, const std::function<void(Section&)>& fn) {
    seen_.push_back(key);
    if (!doc_.contains(key)) return;
    Section s(doc_.at(key), name(key));
    fn(s);
    s.finish();
  }

  bool has(const std::string& key) const { return doc_.contains(key); }
  const json& at(const std::string& key) {
    seen_.push_back(key);
    return doc_.at(key);
  }
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : doc_.items())
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end())
        throw ConfigError("config: unknown key " + name(k));
  }

 private:
  std::string where() const { return path_.empty() ? "the document" : path_; }
  const json& doc_;
  std::string path_;
  std::vector<std::string> seen_;
};

}  // namespace

std::string assets_dir() {
  if (const char* e = std::getenv("TCFUZZ_ASSETS")) return e;
  return TCFUZZ_ASSETS_DIR;
}

std::string RunConfig::dir(const std::string& kind) const {
  const std::map<std::string, const std::string*> given = {
      {"seeds", &paths.seeds}, {"errors", &paths.errors},     {"rules", &paths.rules},   {"learn", &paths.learn},
      {"corpus", &paths.corpus}, {"findings", &paths.findings}, {"reports", &paths.reports}};
  auto it = given.find(kind);
  if (it == given.end()) throw std::invalid_argument("unknown artifact kind " + kind);
  if (!it->second->empty()) return *it->second;
  return (std::filesystem::path(out_dir) / kind).string();
}

RunConfig default_config() {
  RunConfig c;
  c.rulesets = {assets_dir() + "/rulesets/reference.rules"};
  c.prompts_dir = assets_dir() + "/prompts";
  return c;
}

RunConfig config_from_json(const json& doc, RunConfig c) {
  Section top(doc, "");
  top.get("library", c.library);
  if (top.has("apis")) {
    const json& a = top.at("apis");
    if (a.is_string() && a.get<std::string>() == "all") {
      c.apis.clear();
    } else if (a.is_array() && std::all_of(a.begin(), a.end(), [](const json& x) { return x.is_string(); })) {
      c.apis = a.get<std::vector<std::string>>();
    } else {
      throw ConfigError("config: apis must be \"all\" or a list of API names");
    }
  }
  top.get("out_dir", c.out_dir);
  top.get("seed", c.seed);
  top.get("workers", c.workers);
  top.section("paths", [&](Section& s) {
    s.get("seeds", c.paths.seeds);
    s.get("errors", c.paths.errors);
    s.get("rules", c.paths.rules);
    s.get("learn", c.paths.learn);
    s.get("corpus", c.paths.corpus);
    s.get("findings", c.paths.findings);
    s.get("reports", c.paths.reports);
  });
  top.section("executor", [&](Section& s) {
    s.get("cmd", c.executor_cmd);
    s.get("timeout_ms", c.executor_timeout_ms);
  });
  top.section("seeds", [&](Section& s) {
    s.get("count", c.seed_count);
    s.get("generate_reference", c.generate_reference_seeds);
  });
  top.section("errors", [&](Section& s) {
    s.get("random_budget_s", c.errors_random_budget_s);
    s.get("max_random", c.errors_max_random);
  });
  top.section("rules", [&](Section& s) {
    s.get("sources", c.rule_sources);
    s.get("rulesets", c.rulesets);
    s.section("enumerator", [&](Section& e) {
      e.get("max_depth", c.enum_max_depth);
      e.get("count", c.enum_count);
    });
  });
  top.section("llm", [&](Section& s) {
    s.get("endpoint", c.llm_endpoint);
    s.get("model", c.llm_model);
    s.get("api_key_env", c.llm_api_key_env);
    s.get("failure_bound", c.llm_failure_bound);
    s.get("timeout_s", c.llm_timeout_s);
    s.get("request_timeout_s", c.llm_request_timeout_s);
    s.get("max_turns", c.llm_max_turns);
    s.get("prompts_dir", c.prompts_dir);
  });
  top.section("learn", [&](Section& s) {
    s.get("trials", c.trials);
    s.get("min_seed_inputs", c.min_seed_inputs);
  });
  top.section("genabs", [&](Section& s) {
    s.get("p", c.p);
    s.get("size", c.corpus_size);
    s.get("timeout_s", c.genabs_timeout_s);
  });
  top.section("fuzz", [&](Section& s) {
    s.get("budget_s", c.fuzz_budget_s);
    s.get("tolerance", c.tolerance);
    s.get("backends", c.backends);
    s.get("max_inputs", c.fuzz_max_inputs);
    s.get("stop_at_first_finding", c.stop_at_first_finding);
  });
  top.finish();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot read " + path);
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
  }
  try {
    return config_from_json(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + " (in " + path + ")");
  }
}

json config_to_json(const RunConfig& c) {
  json apis = c.apis.empty() ? json("all") : json(c.apis);
  return json{
      {"library", c.library},
      {"apis", apis},
      {"out_dir", c.out_dir},
      {"seed", c.seed},
      {"workers", c.workers},
      {"paths",
       {{"seeds", c.paths.seeds},
        {"errors", c.paths.errors},
        {"rules", c.paths.rules},
        {"learn", c.paths.learn},
        {"corpus", c.paths.corpus},
        {"findings", c.paths.findings},
        {"reports", c.paths.reports}}},
      {"executor", {{"cmd", c.executor_cmd}, {"timeout_ms", c.executor_timeout_ms}}},
      {"seeds", {{"count", c.seed_count}, {"generate_reference", c.generate_reference_seeds}}},
      {"errors", {{"random_budget_s", c.errors_random_budget_s}, {"max_random", c.errors_max_random}}},
      {"rules",
       {{"sources", c.rule_sources},
        {"rulesets", c.rulesets},
        {"enumerator", {{"max_depth", c.enum_max_depth}, {"count", c.enum_count}}}}},
      {"llm",
       {{"endpoint", c.llm_endpoint},
        {"model", c.llm_model},
        {"api_key_env", c.llm_api_key_env},
        {"failure_bound", c.llm_failure_bound},
        {"timeout_s", c.llm_timeout_s},
        {"request_timeout_s", c.llm_request_timeout_s},
        {"max_turns", c.llm_max_turns},
        {"prompts_dir", c.prompts_dir}}},
      {"learn", {{"trials", c.trials}, {"min_seed_inputs", c.min_seed_inputs}}},
      {"genabs", {{"p", c.p}, {"size", c.corpus_size}, {"timeout_s", c.genabs_timeout_s}}},
      {"fuzz",
       {{"budget_s", c.fuzz_budget_s},
        {"tolerance", c.tolerance},
        {"backends", c.backends},
        {"max_inputs", c.fuzz_max_inputs},
        {"stop_at_first_finding", c.stop_at_first_finding}}}};
}

void apply_env(RunConfig& c) {
  if (const char* e = std::getenv("TCFUZZ_LLM_ENDPOINT")) c.llm_endpoint = e;
  if (const char* e = std::getenv("TCFUZZ_LLM_MODEL")) c.llm_model = e;
  if (!c.llm_api_key_env.empty())
    if (const char* e = std::getenv(c.llm_api_key_env.c_str())) c.llm_api_key = e;
}

void validate(const RunConfig& c) {
  auto positive = [](double v, const char* key) {
    if (!(v > 0)) throw ConfigError(std::string("config: ") + key + " must be positive");
  };
  if (c.library.empty()) throw ConfigError("config: library must not be empty");
  if (c.out_dir.empty()) throw ConfigError("config: out_dir must not be empty");
  positive(static_cast<double>(c.executor_timeout_ms), "executor.timeout_ms");
  positive(static_cast<double>(c.seed_count), "seeds.count");
  positive(c.errors_random_budget_s, "errors.random_budget_s");
  positive(c.llm_timeout_s, "llm.timeout_s");
  positive(c.llm_request_timeout_s, "llm.request_timeout_s");
  positive(static_cast<double>(c.llm_failure_bound), "llm.failure_bound");
  positive(c.genabs_timeout_s, "genabs.timeout_s");
  positive(static_cast<double>(c.corpus_size), "genabs.size");
  positive(c.fuzz_budget_s, "fuzz.budget_s");
  if (c.trials < 1) throw ConfigError("config: learn.trials must be at least 1");
  if (c.p < 0 || c.p > 1) throw ConfigError("config: genabs.p must be in [0, 1]");
  if (c.tolerance < 0) throw ConfigError("config: fuzz.tolerance must not be negative");
  if (c.enum_max_depth < 1) throw ConfigError("config: rules.enumerator.max_depth must be at least 1");
  if (c.backends.empty()) throw ConfigError("config: fuzz.backends must not be empty");
  if (c.rule_sources.empty()) throw ConfigError("config: rules.sources must not be empty");
  for (const auto& s : c.rule_sources) {
    if (s != "enumerator" && s != "file" && s != "llm")
      throw ConfigError("config: rules.sources entry '" + s + "' is not one of enumerator, file, llm");
    if (s == "file" && c.rulesets.empty()) throw ConfigError("config: rules.rulesets is empty but sources has file");
    if (s == "llm" && c.llm_endpoint.empty())
      throw ConfigError("config: llm.endpoint (or TCFUZZ_LLM_ENDPOINT) is required when sources has llm");
  }
  for (const auto& a : c.apis)
    if (a.empty() || a.find('/') != std::string::npos) throw ConfigError("config: bad API name '" + a + "'");
}

}  // namespace tcfuzz::cli
