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

#include "tcfuzz/cli/pipeline.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "tcfuzz/dsl/parser.hpp"
#include "tcfuzz/dsl/ruleset.hpp"
#include "tcfuzz/executor/targets.hpp"
#include "tcfuzz/fuzz/fuzzer.hpp"
#include "tcfuzz/gen/abstract_gen.hpp"
#include "tcfuzz/learn/learner.hpp"
#include "tcfuzz/learn/scoring.hpp"
#include "tcfuzz/rules/enumerator.hpp"
#include "tcfuzz/rules/errors.hpp"
#include "tcfuzz/rules/llm.hpp"

namespace fs = std::filesystem;

namespace tcfuzz::cli {

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::Errors: return "errors";
    case Stage::Rules: return "rules";
    case Stage::Learn: return "learn";
    case Stage::Genabs: return "genabs";
    case Stage::Fuzz: return "fuzz";
  }
  return "?";
}

std::optional<Stage> parse_stage(const std::string& s) {
  for (auto st : {Stage::Errors, Stage::Rules, Stage::Learn, Stage::Genabs, Stage::Fuzz})
    if (s == stage_name(st)) return st;
  return std::nullopt;
}

bool StageSummary::ok() const {
  return std::all_of(apis.begin(), apis.end(), [](const ApiOutcome& o) { return o.ok; });
}

json outcome_to_json(const ApiOutcome& o) {
  return json{{"api", o.api}, {"ok", o.ok}, {"cached", o.cached}, {"message", o.message}, {"stats", o.stats}};
}

ApiOutcome outcome_from_json(const json& j) {
  ApiOutcome o;
  o.api = j.at("api").get<std::string>();
  o.ok = j.at("ok").get<bool>();
  o.cached = j.value("cached", false);
  o.message = j.value("message", std::string());
  o.stats = j.value("stats", json::object());
  return o;
}

json summary_to_json(const StageSummary& s, const RunConfig& cfg) {
  json apis = json::array();
  for (const auto& o : s.apis) apis.push_back(outcome_to_json(o));
  return json{{"stage", stage_name(s.stage)}, {"library", cfg.library}, {"seed", cfg.seed}, {"ok", s.ok()},
              {"apis", apis}};
}

namespace {

std::string under(const RunConfig& c, const std::string& kind, const std::string& api, const std::string& ext) {
  return (fs::path(c.dir(kind)) / c.library / (api + ext)).string();
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::nullopt;
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << data;
    if (!f) throw std::runtime_error("cannot write " + path);
  }
  fs::rename(tmp, path);
}

std::string fnv_hex(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << h;
  return o.str();
}

// Hash of everything an offline stage reads.
std::string fingerprint(Stage s, const RunConfig& c, const json& params, const std::vector<std::string>& inputs) {
  std::string acc = std::string(stage_name(s)) + "\n" + json(c.executor_cmd).dump() + "\n" +
                    std::to_string(c.seed) + "\n" + params.dump() + "\n";
  for (const auto& in : inputs) acc += fnv_hex(in) + "\n";
  return fnv_hex(acc);
}

std::optional<json> fresh_meta(const std::string& artifact, const std::string& fp) {
  if (!fs::exists(artifact)) return std::nullopt;
  auto text = read_file(meta_path(artifact));
  if (!text) return std::nullopt;
  try {
    json m = json::parse(*text);
    if (m.value("fingerprint", std::string()) == fp) return m;
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

void write_meta(const std::string& artifact, Stage s, const RunConfig& c, const std::string& api,
                const std::string& fp, const json& stats) {
  json m{{"stage", stage_name(s)}, {"library", c.library}, {"api", api},
         {"seed", c.seed},        {"fingerprint", fp},     {"stats", stats}};
  write_file(meta_path(artifact), m.dump(2) + "\n");
}

ApiOutcome cached_outcome(const std::string& api, const json& meta) {
  ApiOutcome o;
  o.api = api;
  o.ok = true;
  o.cached = true;
  o.stats = meta.value("stats", json::object());
  return o;
}

struct StageFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<ApiInput> load_seeds(const std::string& path) {
  auto text = read_file(path);
  if (!text) throw StageFailure("missing seed file " + path);
  std::vector<ApiInput> out;
  std::istringstream in(*text);
  std::string line;
  size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(decode_input(json::parse(line)));
    } catch (const std::exception& e) {
      throw StageFailure("bad seed at " + path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::string seeds_text(const std::vector<ApiInput>& seeds) {
  std::string s;
  for (const auto& in : seeds) s += encode_input(in).dump() + "\n";
  return s;
}

const exec::ApiInfo& api_info(exec::Executor& ex, const std::string& api) {
  const exec::ApiInfo* info = ex.find(api);
  if (!info) throw StageFailure("the executor does not offer " + api);
  return *info;
}

std::string signature_text(const exec::ApiInfo& info) { return exec::handshake_json({info}).dump(); }

std::vector<learn::Invariant> kept_from(const std::string& learn_file) {
  auto text = read_file(learn_file);
  if (!text) throw StageFailure("missing learn report " + learn_file + " (run the learn stage)");
  try {
    return learn::report_from_json(json::parse(*text)).kept;
  } catch (const std::exception& e) {
    throw StageFailure("bad learn report " + learn_file + ": " + e.what());
  }
}

// ---------------------------------------------------------------- stages

ApiOutcome stage_errors(const RunConfig& c, const std::string& api, exec::Executor& ex) {
  std::string sp = seeds_path(c, api);
  if (!fs::exists(sp)) {
    if (!c.generate_reference_seeds || !exec::find_target(api)) throw StageFailure("missing seed file " + sp);
    write_file(sp, seeds_text(exec::seed_inputs(api, c.seed_count, c.seed)));
  }
  auto seeds = load_seeds(sp);
  std::string out = errors_path(c, api);
  json params{{"random_budget_s", c.errors_random_budget_s}, {"max_random", c.errors_max_random}};
  std::string fp = fingerprint(Stage::Errors, c, params, {*read_file(sp), signature_text(api_info(ex, api))});
  if (auto m = fresh_meta(out, fp)) return cached_outcome(api, *m);

  rules::ErrorDb db;
  rules::CollectConfig cc;
  cc.random_budget = std::chrono::milliseconds(static_cast<int64_t>(c.errors_random_budget_s * 1000));
  cc.max_random = c.errors_max_random;
  cc.seed = c.seed;
  auto rep = rules::collect_errors(api, seeds, ex, db, cc);
  write_file(out, db.to_json().dump(2) + "\n");
  ApiOutcome o;
  o.api = api;
  o.ok = true;
  o.stats = json{{"seeds", seeds.size()},           {"executed", rep.executed}, {"mutants", rep.mutants},
                 {"random_inputs", rep.random_inputs}, {"messages", db.messages(api).size()},
                 {"crashes", rep.crashes.size()}};
  write_meta(out, Stage::Errors, c, api, fp, o.stats);
  return o;
}

ApiOutcome stage_rules(const RunConfig& c, const std::string& api, exec::Executor& ex) {
  const exec::ApiInfo& info = api_info(ex, api);
  std::vector<std::string> inputs = {signature_text(info)};
  bool use_llm = std::find(c.rule_sources.begin(), c.rule_sources.end(), "llm") != c.rule_sources.end();
  bool use_file = std::find(c.rule_sources.begin(), c.rule_sources.end(), "file") != c.rule_sources.end();
  if (use_file)
    for (const auto& r : c.rulesets) {
      auto text = read_file(r);
      if (!text) throw StageFailure("cannot read ruleset " + r);
      inputs.push_back(*text);
    }
  if (use_llm) inputs.push_back(read_file(errors_path(c, api)).value_or(""));
  json params{{"sources", c.rule_sources},
              {"rulesets", c.rulesets},
              {"max_depth", c.enum_max_depth},
              {"count", c.enum_count},
              {"llm", use_llm ? json{{"endpoint", c.llm_endpoint},
                                     {"model", c.llm_model},
                                     {"failure_bound", c.llm_failure_bound},
                                     {"timeout_s", c.llm_timeout_s},
                                     {"max_turns", c.llm_max_turns},
                                     {"prompts_dir", c.prompts_dir}}
                              : json(nullptr)}};
  std::string out = rules_path(c, api);
  std::string fp = fingerprint(Stage::Rules, c, params, inputs);
  if (auto m = fresh_meta(out, fp)) return cached_outcome(api, *m);

  std::vector<dsl::Rule> rules;
  std::set<std::string> seen;
  json per_source = json::object();
  json issues = json::array();
  json llm_stats = nullptr;
  size_t not_applicable = 0;
  auto add = [&](const dsl::TypedRule& r, const std::string& source) {
    std::string text = dsl::render_rule(r.rule);
    if (!seen.insert(text).second) return;
    if (learn::enumerate_candidates(r, info.signature).empty()) {
      ++not_applicable;
      return;
    }
    dsl::Rule copy = r.rule;
    if (copy.name.empty()) copy.name = source + "_" + std::to_string(rules.size() + 1);
    rules.push_back(std::move(copy));
    per_source[source] = per_source.value(source, 0) + 1;
  };
  for (const auto& src : c.rule_sources) {
    if (src == "enumerator") {
      rules::EnumeratorConfig ec;
      ec.max_depth = c.enum_max_depth;
      ec.count = c.enum_count;
      ec.seed = c.seed;
      for (const auto& r : rules::enumerate_rules(info.signature, ec)) add(r, "enumerator");
    } else if (src == "file") {
      for (const auto& path : c.rulesets) {
        auto load = dsl::load_ruleset(path);
        for (const auto& i : load.issues) issues.push_back(i.to_string());
        for (const auto& e : load.rules) add(e.rule, "file");
      }
    } else if (src == "llm") {
      rules::PromptAssets assets;
      try {
        assets = rules::load_prompt_assets(c.prompts_dir);
      } catch (const std::exception& e) {
        throw StageFailure(e.what());
      }
      rules::PromptInputs in;
      in.api = api;
      in.docs = info.doc;
      if (fs::exists(errors_path(c, api))) {
        auto db = rules::ErrorDb::load(errors_path(c, api));
        in.errors = db.messages(api);
      }
      rules::HttpChatTransport transport(
          c.llm_endpoint, c.llm_model, c.llm_api_key,
          std::chrono::milliseconds(static_cast<int64_t>(c.llm_request_timeout_s * 1000)));
      rules::LlmLimits lim;
      lim.failure_bound = c.llm_failure_bound;
      lim.timeout = std::chrono::milliseconds(static_cast<int64_t>(c.llm_timeout_s * 1000));
      lim.max_turns = c.llm_max_turns;
      auto res = rules::generate_rules_llm(assets, in, transport, lim);
      for (const auto& r : res.rules) add(r, "llm");
      llm_stats = json{{"turns", res.turns.size()},
                       {"failures", res.failures},
                       {"stop", rules::stop_reason_name(res.stop)},
                       {"warning", res.warning}};
    }
  }
  write_file(out, dsl::format_ruleset(rules));
  ApiOutcome o;
  o.api = api;
  o.ok = true;
  o.stats = json{{"rules", rules.size()},
                 {"by_source", per_source},
                 {"not_applicable", not_applicable},
                 {"issues", issues},
                 {"llm", llm_stats}};
  write_meta(out, Stage::Rules, c, api, fp, o.stats);
  return o;
}

ApiOutcome stage_learn(const RunConfig& c, const std::string& api, exec::Executor& ex) {
  const exec::ApiInfo& info = api_info(ex, api);
  std::string sp = seeds_path(c, api), rp = rules_path(c, api);
  auto seeds_raw = read_file(sp);
  if (!seeds_raw) throw StageFailure("missing seed file " + sp);
  auto rules_raw = read_file(rp);
  if (!rules_raw) throw StageFailure("missing rules file " + rp + " (run the rules stage)");
  json params{{"trials", c.trials}, {"min_seed_inputs", c.min_seed_inputs}, {"p", c.p}};
  std::string out = learn_path(c, api);
  std::string fp = fingerprint(Stage::Learn, c, params, {*seeds_raw, *rules_raw, signature_text(info)});
  if (auto m = fresh_meta(out, fp)) return cached_outcome(api, *m);

  auto load = dsl::parse_ruleset(*rules_raw, rp);
  if (!load.issues.empty()) throw StageFailure(load.issues.front().to_string());
  std::vector<dsl::TypedRule> rules;
  for (auto& e : load.rules) rules.push_back(std::move(e.rule));

  std::vector<ApiInput> valid;
  for (auto& s : load_seeds(sp)) {
    exec::ExecRequest req;
    req.api = api;
    req.input = s;
    if (exec::is_valid(ex.run(req).status)) valid.push_back(std::move(s));
  }
  if (valid.size() < c.min_seed_inputs)
    throw StageFailure("only " + std::to_string(valid.size()) + " valid seeds in " + sp + "; learn.min_seed_inputs is " +
                       std::to_string(c.min_seed_inputs));

  auto learned = learn::learn_invariants(rules, valid, info.signature);
  auto layout = solver::build_layout(info.signature);
  auto lowered = gen::lower_invariants(learned.kept, layout);
  std::vector<bool> testable(learned.kept.size(), true);
  for (const auto& [i, why] : lowered.unsupported) testable[i] = false;
  learn::LearnConfig lc;
  lc.trials = c.trials;
  lc.seed = c.seed;
  lc.min_seed_inputs = c.min_seed_inputs;
  learn::LearnReport rep;
  try {
    rep = learn::refine(learned, gen::make_validity_probe(learned.kept, layout, lowered, ex, c.p), lc, testable);
  } catch (const learn::SolverUnsat& e) {
    std::string core;
    for (const auto& k : e.core()) core += "\n  " + k;
    throw StageFailure(std::string(e.what()) + "; core:" + core);
  }
  json doc = learn::report_to_json(rep);
  doc["api"] = api;
  doc["seed"] = c.seed;
  write_file(out, doc.dump(2) + "\n");
  ApiOutcome o;
  o.api = api;
  o.ok = true;
  o.stats = json{{"candidates", rules.size()},
                 {"seeds_valid", valid.size()},
                 {"learned", learned.kept.size()},
                 {"kept", rep.kept.size()},
                 {"dropped_redundant", rep.dropped_redundant.size()},
                 {"v_orig", rep.v_orig},
                 {"degenerate", rep.degenerate},
                 {"unlowerable", rep.unlowerable.size()}};
  write_meta(out, Stage::Learn, c, api, fp, o.stats);
  return o;
}

ApiOutcome stage_genabs(const RunConfig& c, const std::string& api, exec::Executor& ex) {
  const exec::ApiInfo& info = api_info(ex, api);
  std::string lp = learn_path(c, api);
  auto learn_raw = read_file(lp);
  if (!learn_raw) throw StageFailure("missing learn report " + lp + " (run the learn stage)");
  json params{{"p", c.p}, {"size", c.corpus_size}, {"timeout_s", c.genabs_timeout_s}};
  std::string out = corpus_path(c, api);
  std::string fp = fingerprint(Stage::Genabs, c, params, {*learn_raw, signature_text(info)});
  if (auto m = fresh_meta(out, fp)) return cached_outcome(api, *m);

  auto kept = kept_from(lp);
  auto layout = solver::build_layout(info.signature);
  gen::GenConfig gc;
  gc.p = c.p;
  gc.target_size = c.corpus_size;
  gc.timeout = std::chrono::milliseconds(static_cast<int64_t>(c.genabs_timeout_s * 1000));
  gc.seed = c.seed;
  gen::GenResult res;
  try {
    res = gen::generate_abstract_inputs(kept, layout, gen::BucketTable::standard(), ex, gc);
  } catch (const gen::BaseUnsat& e) {
    std::string core;
    for (const auto& k : e.core()) core += "\n  " + k;
    throw StageFailure(std::string(e.what()) + "; core:" + core);
  }
  fs::create_directories(fs::path(out).parent_path());
  gen::corpus_save(res.corpus, out);
  const auto& st = res.stats;
  ApiOutcome o;
  o.api = api;
  o.ok = true;
  o.stats = json{{"corpus", res.corpus.inputs.size()},
                 {"iterations", st.iterations},
                 {"invalid", st.invalid},
                 {"unsat", st.unsat},
                 {"unknown", st.unknown},
                 {"bucket_retries", st.bucket_retries},
                 {"concretize_failures", st.concretize_failures},
                 {"unsupported", st.unsupported}};
  write_meta(out, Stage::Genabs, c, api, fp, o.stats);
  if (res.corpus.inputs.empty()) {
    o.ok = false;
    o.message = "no abstract inputs were recorded";
  }
  return o;
}

ApiOutcome stage_fuzz(const RunConfig& c, const std::string& api, exec::Executor& ex) {
  const exec::ApiInfo& info = api_info(ex, api);
  std::string cp = corpus_path(c, api);
  if (!fs::exists(cp)) throw StageFailure("missing corpus " + cp + " (run the genabs stage)");
  gen::Corpus corpus;
  try {
    corpus = gen::corpus_load(cp);
  } catch (const gen::CorruptCorpus& e) {
    throw StageFailure(std::string(e.what()) + " in " + cp);
  }
  auto kept = kept_from(learn_path(c, api));
  auto layout = solver::build_layout(info.signature);
  auto target = fuzz::make_fuzz_target(layout, corpus, kept);

  fuzz::FuzzConfig fc;
  fc.budget = std::chrono::milliseconds(static_cast<int64_t>(c.fuzz_budget_s * 1000));
  fc.seed = c.seed;
  fc.tolerance = c.tolerance;
  fc.backends.clear();
  for (const auto& b : c.backends)
    if (std::find(info.backends.begin(), info.backends.end(), b) != info.backends.end()) fc.backends.push_back(b);
  if (fc.backends.empty()) throw StageFailure(api + " offers none of the configured backends");
  fc.max_inputs = c.fuzz_max_inputs;
  fc.findings_dir = c.dir("findings");
  fc.library = c.library;
  fc.stop_at_first_finding = c.stop_at_first_finding;
  fs::remove_all(findings_dir(c, api));

  fuzz::FuzzReport rep;
  try {
    rep = fuzz::fuzz_api(target, ex, fc);
  } catch (const fuzz::EmptyCorpus&) {
    throw StageFailure("the corpus " + cp + " is empty");
  }
  json doc = fuzz::fuzz_report_to_json(rep);
  doc["seed"] = c.seed;
  doc["backends"] = fc.backends;
  write_file(fuzz_report_path(c, api), doc.dump(2) + "\n");
  std::map<std::string, size_t> kinds;
  for (const auto& f : rep.findings) ++kinds[fuzz::finding_kind_name(f.kind)];
  ApiOutcome o;
  o.api = api;
  o.ok = true;
  o.stats = json{{"generated", rep.generated},
                 {"validity_ratio", rep.validity_ratio},
                 {"throughput", rep.throughput},
                 {"findings", kinds},
                 {"backends", fc.backends}};
  write_meta(fuzz_report_path(c, api), Stage::Fuzz, c, api, "", o.stats);
  return o;
}

}  // namespace

std::string seeds_path(const RunConfig& c, const std::string& api) { return under(c, "seeds", api, ".jsonl"); }
std::string errors_path(const RunConfig& c, const std::string& api) { return under(c, "errors", api, ".json"); }
std::string rules_path(const RunConfig& c, const std::string& api) { return under(c, "rules", api, ".rules"); }
std::string learn_path(const RunConfig& c, const std::string& api) { return under(c, "learn", api, ".json"); }
std::string corpus_path(const RunConfig& c, const std::string& api) { return under(c, "corpus", api, ".jsonl"); }
std::string fuzz_report_path(const RunConfig& c, const std::string& api) {
  return under(c, "reports", api, ".fuzz.json");
}
std::string findings_dir(const RunConfig& c, const std::string& api) {
  return (fs::path(c.dir("findings")) / c.library / api).string();
}
std::string summary_path(const RunConfig& c, Stage s) {
  return (fs::path(c.dir("reports")) / c.library / (std::string(stage_name(s)) + ".summary.json")).string();
}
std::string meta_path(const std::string& artifact) { return artifact + ".meta.json"; }

std::unique_ptr<exec::Executor> make_executor(const RunConfig& c) {
  if (c.executor_cmd.empty()) return std::make_unique<exec::InProcessExecutor>();
  return std::make_unique<exec::SubprocessExecutor>(c.executor_cmd,
                                                    std::chrono::milliseconds(c.executor_timeout_ms));
}

std::vector<std::string> resolve_apis(const RunConfig& c, exec::Executor& executor) {
  if (c.apis.empty()) {
    std::vector<std::string> all;
    for (const auto& a : executor.catalog()) all.push_back(a.api);
    return all;
  }
  for (const auto& a : c.apis)
    if (!executor.find(a)) throw ConfigError("config: API '" + a + "' is not offered by the executor");
  return c.apis;
}

ApiOutcome run_stage(Stage s, const RunConfig& c, const std::string& api, exec::Executor& executor) {
  try {
    switch (s) {
      case Stage::Errors: return stage_errors(c, api, executor);
      case Stage::Rules: return stage_rules(c, api, executor);
      case Stage::Learn: return stage_learn(c, api, executor);
      case Stage::Genabs: return stage_genabs(c, api, executor);
      case Stage::Fuzz: return stage_fuzz(c, api, executor);
    }
  } catch (const std::exception& e) {
    ApiOutcome o;
    o.api = api;
    o.message = e.what();
    return o;
  }
  return ApiOutcome{api, false, false, "unknown stage", json::object()};
}

std::vector<ApiOutcome> run_pool(const std::vector<std::string>& apis, size_t workers, const std::string& scratch,
                                 const std::function<ApiOutcome(const std::string&)>& fn) {
  std::vector<ApiOutcome> out(apis.size());
  if (workers <= 1 || apis.size() <= 1) {
    for (size_t i = 0; i < apis.size(); ++i) out[i] = fn(apis[i]);
    return out;
  }
  fs::create_directories(scratch);
  auto result_file = [&](size_t i) { return (fs::path(scratch) / ("worker-" + std::to_string(i) + ".json")).string(); };
  std::map<pid_t, size_t> running;
  size_t next = 0;
  while (next < apis.size() || !running.empty()) {
    while (running.size() < workers && next < apis.size()) {
      size_t i = next++;
      fs::remove(result_file(i));
      std::cout.flush();
      std::cerr.flush();
      pid_t pid = ::fork();
      if (pid == 0) {
        int code = 0;
        try {
          write_file(result_file(i), outcome_to_json(fn(apis[i])).dump());
        } catch (...) {
          code = 1;
        }
        ::_exit(code);
      }
      if (pid < 0) {
        out[i] = ApiOutcome{apis[i], false, false, "fork failed", json::object()};
        continue;
      }
      running[pid] = i;
    }
    bool reaped = false;
    for (auto it = running.begin(); it != running.end();) {
      int status = 0;
      if (::waitpid(it->first, &status, WNOHANG) != it->first) {
        ++it;
        continue;
      }
      size_t i = it->second;
      it = running.erase(it);
      reaped = true;
      auto text = read_file(result_file(i));
      if (text) {
        try {
          out[i] = outcome_from_json(json::parse(*text));
          fs::remove(result_file(i));
          continue;
        } catch (const std::exception&) {
        }
      }
      std::string why = WIFSIGNALED(status) ? "worker killed by signal " + std::to_string(WTERMSIG(status))
                                            : "worker exited with status " + std::to_string(WEXITSTATUS(status));
      out[i] = ApiOutcome{apis[i], false, false, why, json::object()};
    }
    if (!reaped && !running.empty()) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return out;
}

int cmd_pipeline(const std::string& stage, const RunConfig& c, std::ostream& out, std::ostream& err) {
  std::vector<Stage> stages;
  if (stage == "all") {
    stages = {Stage::Errors, Stage::Rules, Stage::Learn, Stage::Genabs, Stage::Fuzz};
  } else if (auto s = parse_stage(stage)) {
    stages = {*s};
  } else {
    err << "error: unknown stage '" << stage << "'\n";
    return kExitConfig;
  }
  std::vector<std::string> apis;
  try {
    validate(c);
    for (const char* kind : {"seeds", "errors", "rules", "learn", "corpus", "findings", "reports"}) {
      std::error_code ec;
      fs::create_directories(fs::path(c.dir(kind)) / c.library, ec);
      if (ec) throw ConfigError(std::string("config: cannot create ") + c.dir(kind) + ": " + ec.message());
    }
    auto ex = make_executor(c);
    apis = resolve_apis(c, *ex);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: executor: " << e.what() << "\n";
    return kExitStage;
  }
  size_t workers = c.workers ? c.workers : std::max(1u, std::thread::hardware_concurrency());
  std::string scratch = (fs::path(c.dir("reports")) / c.library / ".workers").string();
  int rc = kExitOk;
  for (Stage s : stages) {
    auto fn = [&](const std::string& api) {
      try {
        auto ex = make_executor(c);
        return run_stage(s, c, api, *ex);
      } catch (const std::exception& e) {
        return ApiOutcome{api, false, false, std::string("executor: ") + e.what(), json::object()};
      }
    };
    StageSummary sum;
    sum.stage = s;
    sum.apis = run_pool(apis, workers, scratch, fn);
    try {
      write_file(summary_path(c, s), summary_to_json(sum, c).dump(2) + "\n");
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      rc = kExitStage;
    }
    std::vector<std::string> next;
    for (const auto& o : sum.apis) {
      out << stage_name(s) << " " << o.api << ": " << (o.ok ? (o.cached ? "cached" : "ok") : "failed");
      if (!o.message.empty()) out << ": " << o.message;
      out << "\n";
      if (o.ok) next.push_back(o.api);
      else rc = kExitStage;
    }
    apis = std::move(next);
  }
  fs::remove_all(scratch);
  return rc;
}

// ---------------------------------------------------------------- report

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::set<std::string> discover_apis(const RunConfig& c) {
  std::set<std::string> found;
  const std::vector<std::pair<std::string, std::string>> kinds = {
      {"rules", ".rules"}, {"learn", ".json"}, {"corpus", ".jsonl"}, {"reports", ".fuzz.json"}};
  for (const auto& [kind, ext] : kinds) {
    fs::path dir = fs::path(c.dir(kind)) / c.library;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir, ec)) {
      std::string name = e.path().filename().string();
      if (ends_with(name, ".meta.json") || !ends_with(name, ext) || name.size() == ext.size()) continue;
      std::string api = name.substr(0, name.size() - ext.size());
      if (kind == "reports" && ends_with(name, ".summary.json")) continue;
      found.insert(api);
    }
  }
  return found;
}

std::optional<uint64_t> meta_seed(const std::string& artifact) {
  auto text = read_file(meta_path(artifact));
  if (!text) return std::nullopt;
  try {
    json m = json::parse(*text);
    if (m.contains("seed")) return m["seed"].get<uint64_t>();
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

std::string fmt(double v, int prec) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(prec) << v;
  return o.str();
}

}  // namespace

int cmd_report(const RunConfig& c, std::ostream& out, std::ostream& err) {
  std::vector<std::string> apis = c.apis;
  if (apis.empty()) {
    auto found = discover_apis(c);
    apis.assign(found.begin(), found.end());
  }
  if (apis.empty()) {
    err << "error: MissingArtifacts: no stage artifacts for library '" << c.library << "' under " << c.out_dir << "\n";
    return kExitStage;
  }
  const std::vector<std::string> kinds = {"crash", "nan", "overflow", "inconsistent"};
  json rows = json::array();
  std::vector<std::string> missing, broken;
  std::set<uint64_t> all_seeds;
  exec::InProcessExecutor reference;
  for (const auto& api : apis) {
    json row{{"api", api}};
    bool any = false;
    std::set<uint64_t> seeds;
    try {
    for (const auto& art : {seeds_path(c, api), errors_path(c, api), rules_path(c, api), learn_path(c, api),
                            corpus_path(c, api), fuzz_report_path(c, api)})
      if (auto s = meta_seed(art)) seeds.insert(*s);

    row["rules"] = nullptr;
    if (fs::exists(rules_path(c, api))) {
      any = true;
      row["rules"] = dsl::load_ruleset(rules_path(c, api)).rules.size();
    }
    row["kept"] = nullptr;
    std::vector<learn::Invariant> kept;
    bool have_learn = false;
    if (auto text = read_file(learn_path(c, api))) {
      any = true;
      json j = json::parse(*text);
      kept = learn::report_from_json(j).kept;
      have_learn = true;
      row["kept"] = kept.size();
      if (j.contains("seed")) seeds.insert(j["seed"].get<uint64_t>());
    }
    row["corpus"] = nullptr;
    if (fs::exists(corpus_path(c, api))) {
      any = true;
      try {
        row["corpus"] = gen::corpus_load(corpus_path(c, api)).inputs.size();
      } catch (const gen::CorruptCorpus& e) {
        row["corpus"] = e.partial().inputs.size();
        row["corpus_error"] = e.what();
      }
    }
    row["validity_ratio"] = nullptr;
    row["throughput"] = nullptr;
    row["generated"] = nullptr;
    if (auto text = read_file(fuzz_report_path(c, api))) {
      any = true;
      json j = json::parse(*text);
      row["validity_ratio"] = j.value("validity_ratio", 0.0);
      row["throughput"] = j.value("throughput", 0.0);
      row["generated"] = j.value("generated", 0);
      if (j.contains("seed")) seeds.insert(j["seed"].get<uint64_t>());
    }
    json findings = json::object();
    for (const auto& k : kinds) findings[k] = 0;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(findings_dir(c, api), ec)) {
      std::string name = e.path().filename().string();
      auto dash = name.find('-');
      if (dash == std::string::npos) continue;
      std::string k = name.substr(0, dash);
      if (findings.contains(k)) findings[k] = findings[k].get<int>() + 1;
    }
    row["findings"] = findings;
    row["recall"] = nullptr;
    row["precision"] = nullptr;
    if (have_learn && exec::find_target(api)) {
      std::vector<learn::Invariant> truth;
      for (const auto& g : exec::ground_truth(api))
        truth.push_back(learn::Invariant{dsl::type_check(dsl::parse_rule(g.text)), g.params});
      exec::GridBounds grid;
      if (exec::find_target(api)->signature().params.size() > 3) grid.max_ndim = 2;
      auto score = learn::score_invariants(kept, truth, api, reference, grid);
      row["recall"] = score.recall();
      row["precision"] = score.precision();
      row["missed"] = score.missed;
      row["incorrect"] = score.incorrect;
    }
    row["seeds"] = json(std::vector<uint64_t>(seeds.begin(), seeds.end()));
    row["seed_mismatch"] = seeds.size() > 1;
    all_seeds.insert(seeds.begin(), seeds.end());
    } catch (const std::exception& e) {
      row["error"] = e.what();
      broken.push_back(api + ": " + e.what());
    }
    if (!any) missing.push_back(api);
    rows.push_back(row);
  }
  bool mismatch = all_seeds.size() > 1;
  json doc{{"library", c.library}, {"seed_mismatch", mismatch}, {"apis", rows}};
  try {
    write_file((fs::path(c.dir("reports")) / c.library / "report.json").string(), doc.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitStage;
  }

  auto cell = [](const json& v, int prec) -> std::string {
    if (v.is_null()) return "-";
    if (v.is_number_float()) return fmt(v.get<double>(), prec);
    return v.dump();
  };
  out << std::left << std::setw(24) << "api" << std::right << std::setw(7) << "rules" << std::setw(6) << "kept"
      << std::setw(8) << "corpus" << std::setw(10) << "validity" << std::setw(11) << "inputs/s" << std::setw(7)
      << "crash" << std::setw(5) << "nan" << std::setw(6) << "ovfl" << std::setw(7) << "incons" << std::setw(8)
      << "recall" << std::setw(7) << "prec" << "\n";
  for (const auto& r : rows) {
    const json& f = r["findings"];
    out << std::left << std::setw(24) << r["api"].get<std::string>() << std::right << std::setw(7)
        << cell(r["rules"], 0) << std::setw(6) << cell(r["kept"], 0) << std::setw(8) << cell(r["corpus"], 0)
        << std::setw(10) << cell(r["validity_ratio"], 3) << std::setw(11) << cell(r["throughput"], 0)
        << std::setw(7) << f["crash"].get<int>() << std::setw(5) << f["nan"].get<int>() << std::setw(6)
        << f["overflow"].get<int>() << std::setw(7) << f["inconsistent"].get<int>() << std::setw(8)
        << cell(r["recall"], 3) << std::setw(7) << cell(r["precision"], 3) << (r["seed_mismatch"].get<bool>() ? "  seed mismatch" : "")
        << "\n";
  }
  if (mismatch) {
    out << "warning: artifacts were produced with different seeds:";
    for (auto s : all_seeds) out << " " << s;
    out << "\n";
  }
  for (const auto& b : broken) err << "error: unreadable artifact for " << b << "\n";
  if (!missing.empty()) {
    err << "error: MissingArtifacts: no stage artifacts for";
    for (const auto& m : missing) err << " " << m;
    err << "\n";
    return kExitStage;
  }
  return broken.empty() ? kExitOk : kExitStage;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const std::string& rule_text, const std::string& input_path, const std::vector<std::string>& params,
             std::ostream& out, std::ostream& err) {
  dsl::TypedRule rule;
  try {
    rule = dsl::type_check(dsl::parse_rule(rule_text));
  } catch (const std::exception& e) {
    err << "error: rule: " << e.what() << "\n";
    return kExitConfig;
  }
  ApiInput input;
  auto text = read_file(input_path);
  if (!text) {
    err << "error: cannot read input document " << input_path << "\n";
    return kExitConfig;
  }
  try {
    input = decode_input(json::parse(*text));
  } catch (const std::exception& e) {
    err << "error: input document " << input_path << ": " << e.what() << "\n";
    return kExitConfig;
  }
  const auto& bindings = rule.rule.bindings;
  std::vector<std::vector<std::string>> tuples;
  if (!params.empty()) {
    if (params.size() != bindings.size()) {
      err << "error: --params has " << params.size() << " names but the rule binds " << bindings.size()
          << " variables\n";
      return kExitConfig;
    }
    for (size_t i = 0; i < params.size(); ++i) {
      const ConcreteValue* v = input.get(params[i]);
      if (!v) {
        err << "error: parameter '" << params[i] << "' is not in " << input_path << "\n";
        return kExitConfig;
      }
      if (!conforms(*v, bindings[i].type)) {
        err << "error: parameter '" << params[i] << "' does not conform to " << bindings[i].type->to_string() << "\n";
        return kExitConfig;
      }
    }
    tuples.push_back(params);
  } else {
    std::vector<std::string> cur;
    std::function<void()> rec = [&]() {
      if (cur.size() == bindings.size()) {
        tuples.push_back(cur);
        return;
      }
      for (const auto& [name, v] : input.args) {
        if (std::find(cur.begin(), cur.end(), name) != cur.end()) continue;
        if (!conforms(v, bindings[cur.size()].type)) continue;
        cur.push_back(name);
        rec();
        cur.pop_back();
      }
    };
    rec();
    if (tuples.empty()) {
      err << "error: no arguments of " << input_path << " conform to the rule's bindings\n";
      return kExitConfig;
    }
  }
  bool all = true;
  for (const auto& t : tuples) {
    auto r = learn::check_invariant(learn::Invariant{rule, t}, input);
    json line{{"params", t}};
    switch (r.verdict) {
      case Verdict::Holds: line["verdict"] = "holds"; break;
      case Verdict::Fails: line["verdict"] = "fails"; break;
      case Verdict::Errors:
        line["verdict"] = "errors";
        if (r.error) line["error"] = std::string(eval_error_kind_name(r.error->kind())) + ": " + r.error->what();
        break;
    }
    all = all && r.verdict == Verdict::Holds;
    out << line.dump() << "\n";
  }
  return all ? kExitOk : 1;
}

}  // namespace tcfuzz::cli
