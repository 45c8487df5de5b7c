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

#include <filesystem>
#include <set>

#include "../support/llm_stub.hpp"
#include "catch_amalgamated.hpp"
#include "tcfuzz/dsl/parser.hpp"
#include "tcfuzz/dsl/ruleset.hpp"
#include "tcfuzz/executor/targets.hpp"
#include "tcfuzz/rules/enumerator.hpp"
#include "tcfuzz/rules/errors.hpp"
#include "tcfuzz/rules/llm.hpp"

using namespace tcfuzz;
using namespace tcfuzz::rules;

namespace {

const char* kDimRule = "{v_1: tensor, v_2: int} |= (-1 * ndim(v_1) <= v_2) and (v_2 <= ndim(v_1) - 1)";

ApiSignature sig(std::vector<std::pair<std::string, std::string>> params) {
  ApiSignature s;
  s.api = "t.api";
  for (auto& [n, t] : params) s.params.push_back(Param{n, dsl::parse_type(t), true});
  return s;
}

std::string asset(const std::string& rel) { return std::string(TCFUZZ_ASSETS_DIR) + "/" + rel; }

bool is_atomic_comparison(const dsl::ExprPtr& e) {
  const auto* c = e->as<dsl::Cmp>();
  if (!c) return false;
  for (const auto& side : {c->lhs, c->rhs})
    if (side->as<dsl::Arith>() || side->as<dsl::Cmp>() || side->as<dsl::Logic>() || side->as<dsl::Quant>() ||
        side->as<dsl::IfThen>())
      return false;
  return true;
}

std::vector<FeedbackKind> kinds(const std::vector<Feedback>& fs) {
  std::vector<FeedbackKind> out;
  for (const auto& f : fs) out.push_back(f.kind);
  return out;
}

class AcceptAll : public exec::Executor {
 public:
  explicit AcceptAll(ApiSignature s) { catalog_.push_back(exec::ApiInfo{s.api, s, "", {"cpu"}}); }
  exec::ExecResult run(const exec::ExecRequest& req) override {
    exec::ExecResult r;
    r.id = req.id;
    return r;
  }
  const std::vector<exec::ApiInfo>& catalog() const override { return catalog_; }

 private:
  std::vector<exec::ApiInfo> catalog_;
};

}  // namespace

// ------------------------------------------------------------- enumerator

TEST_CASE("enumerated rules are distinct, typed and bounded in depth", "[rules][enum]") {
  const auto& s = exec::find_target("ref.narrow")->signature();
  auto rules = enumerate_rules(s, {3, 50, 7});
  REQUIRE(rules.size() == 50);
  std::set<std::string> texts;
  for (const auto& r : rules) {
    std::string text = dsl::render_rule(r.rule);
    texts.insert(text);
    CHECK(rule_depth(r.rule) <= 3);
    auto back = dsl::parse_rule(text);
    CHECK(dsl::rule_equal(back, r.rule));
    CHECK(dsl::used_variables(r.rule).size() == r.rule.bindings.size());
    CHECK_NOTHROW(dsl::type_check(back));
  }
  CHECK(texts.size() == 50);
}

TEST_CASE("depth one yields atomic comparisons only", "[rules][enum]") {
  auto s = sig({{"input", "tensor"}, {"dim", "int"}, {"scale", "float"}, {"sizes", "list(int)"}});
  auto rules = enumerate_rules(s, {1, 40, 3});
  REQUIRE_FALSE(rules.empty());
  for (const auto& r : rules) {
    CHECK(rule_depth(r.rule) == 1);
    CHECK(is_atomic_comparison(r.rule.body));
  }
}

TEST_CASE("enumeration is deterministic per seed", "[rules][enum]") {
  const auto& s = exec::find_target("ref.add_broadcast")->signature();
  auto a = enumerate_rules(s, {4, 60, 11});
  auto b = enumerate_rules(s, {4, 60, 11});
  auto c = enumerate_rules(s, {4, 60, 12});
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(dsl::render_rule(a[i].rule) == dsl::render_rule(b[i].rule));
  bool differs = a.size() != c.size();
  for (size_t i = 0; !differs && i < a.size(); ++i) differs = dsl::render_rule(a[i].rule) != dsl::render_rule(c[i].rule);
  CHECK(differs);
  CHECK(enumerate_rules(sig({{"mode", "str"}}), {2, 10, 1}).empty());
  CHECK_THROWS_AS(enumerate_rules(s, {0, 10, 1}), std::invalid_argument);
}

// --------------------------------------------------------------- mutators

TEST_CASE("mutators keep documents well formed", "[rules][mutate]") {
  ApiSignature s = sig({{"input", "tensor"}, {"dim", "int"}, {"alpha", "float"}, {"kind", "dtype"}, {"sizes", "list(int)"}});
  s.params.push_back(Param{"out", dsl::parse_type("tensor"), false});
  std::mt19937_64 rng(5);
  for (int round = 0; round < 30; ++round) {
    ApiInput in;
    in.api = s.api;
    for (const auto& p : s.params) in.args.emplace_back(p.name, random_value(p.type, rng));
    for (Mutator m : all_mutators()) {
      for (const auto& mutant : mutate(m, in, s)) {
        CHECK(decode_input(encode_input(mutant)) == mutant);
        for (const auto& [name, v] : mutant.args)
          if (const TensorV* t = v.as<TensorV>()) CHECK(validate_tensor(*t).empty());
      }
      auto again = mutate(m, in, s);
      CHECK(again == mutate(m, in, s));
    }
  }
}

TEST_CASE("individual mutators", "[rules][mutate]") {
  ApiSignature s = sig({{"input", "tensor"}, {"dim", "int"}});
  s.params.push_back(Param{"out", dsl::parse_type("tensor"), false});
  TensorV t;
  t.ndim = 2;
  t.shape = {2, 3};
  t.lo = 1;
  t.hi = 6;
  t.elements = std::vector<double>{1, 2, 3, 4, 5, 6};
  ApiInput in{s.api, {{"input", ConcreteValue(t)}, {"dim", ConcreteValue(int64_t{1})}, {"out", ConcreteValue(t)}}};

  auto one = [&](Mutator m, size_t k = 0) { return mutate(m, in, s).at(k); };
  CHECK(one(Mutator::DropOptional).get("out") == nullptr);
  CHECK(one(Mutator::EmptyTensor).get("input")->as<TensorV>()->shape == std::vector<int64_t>{0, 3});
  CHECK(*one(Mutator::AllZero).get("input")->as<TensorV>()->elements == std::vector<double>(6, 0.0));
  CHECK(*one(Mutator::IntNegate).get("dim")->as<int64_t>() == -1);
  CHECK(*one(Mutator::IntExtreme).get("dim")->as<int64_t>() == 2147483647);
  CHECK(one(Mutator::DtypeSwap).get("input")->as<TensorV>()->dtype == 1);
  CHECK(one(Mutator::RankUp).get("input")->as<TensorV>()->shape == std::vector<int64_t>{2, 3, 2});
  ApiInput lowered = one(Mutator::RankDown);
  auto down = lowered.get("input")->as<TensorV>();
  CHECK(down->shape == std::vector<int64_t>{2});
  CHECK(*down->elements == std::vector<double>{1, 4});
  CHECK(one(Mutator::KindConfusion).get("input")->as<double>() != nullptr);
  CHECK(one(Mutator::KindConfusion, 1).get("dim")->as<TensorV>() != nullptr);
  CHECK(all_mutators().size() == 9);
}

// ------------------------------------------------------------ error db

TEST_CASE("error messages are normalized and deduplicated", "[rules][errors]") {
  CHECK(normalize_message("  start (3) +  length (4)\texceeds 12 ") == "start (#) + length (#) exceeds #");
  ErrorDb db;
  CHECK(db.add("a", "index 3 out of range"));
  CHECK_FALSE(db.add("a", "index  17 out of range"));
  CHECK(db.add("b", "index 3 out of range"));
  CHECK(db.messages("a").size() == 1);
  CHECK(db.messages("zzz").empty());
  auto path = (std::filesystem::temp_directory_path() / "tcfuzz-errordb.json").string();
  db.save(path);
  auto back = ErrorDb::load(path);
  CHECK(back.entries() == db.entries());
  CHECK_THROWS(ErrorDb::load(path + ".missing"));
}

TEST_CASE("collecting errors on the reference targets", "[rules][errors]") {
  exec::InProcessExecutor ex;
  ErrorDb db;
  CollectConfig cfg;
  cfg.random_budget = std::chrono::milliseconds(2000);
  cfg.max_random = 300;
  cfg.seed = 1;
  auto seeds = exec::seed_inputs("ref.add_broadcast", 10, 4);
  auto rep = collect_errors("ref.add_broadcast", seeds, ex, db, cfg);
  CHECK(rep.random_inputs == 300);
  CHECK(rep.executed == rep.mutants + rep.random_inputs);
  bool mismatch = false;
  for (const auto& m : db.messages("ref.add_broadcast"))
    mismatch = mismatch || m.find("sizes must be equal or 1 at each trailing dimension") != std::string::npos;
  CHECK(mismatch);
  std::set<std::string> norm;
  for (const auto& m : db.messages("ref.add_broadcast")) norm.insert(normalize_message(m));
  CHECK(norm.size() == db.messages("ref.add_broadcast").size());

  auto crash = collect_errors("ref.channel_shuffle", exec::seed_inputs("ref.channel_shuffle", 10, 2), ex, db, cfg);
  CHECK_FALSE(crash.crashes.empty());

  auto s = sig({{"x", "tensor"}});
  AcceptAll robust(s);
  ErrorDb empty;
  cfg.max_random = 50;
  std::mt19937_64 rng(1);
  ApiInput seed{s.api, {{"x", random_value(s.params[0].type, rng)}}};
  auto r = collect_errors(s.api, {seed}, robust, empty, cfg);
  CHECK(r.added == 0);
  CHECK(empty.messages(s.api).empty());
  CHECK_THROWS_AS(collect_errors("ref.nope", {}, ex, db, cfg), exec::UnknownApi);
}

// --------------------------------------------------------------- rulesets

TEST_CASE("shipped rulesets load cleanly", "[rules][files]") {
  auto bc = dsl::load_ruleset(asset("rulesets/broadcast.rules"));
  CHECK(bc.issues.empty());
  REQUIRE(bc.rules.size() == 3);
  CHECK(dsl::rule_equal(bc.rules[2].rule.rule, dsl::parse_rule(kDimRule)));
  bool ndim_order = false, offset_form = false;
  for (const auto& e : bc.rules) {
    std::string t = dsl::render_rule(e.rule.rule);
    ndim_order = ndim_order || t.find("ndim(v_1) = ndim(v_2)") != std::string::npos;
    offset_form = offset_form || t.find("i + (ndim(v_2) - ndim(v_1))") != std::string::npos;
  }
  CHECK(ndim_order);
  CHECK(offset_form);

  auto ref = dsl::load_ruleset(asset("rulesets/reference.rules"));
  CHECK(ref.issues.empty());
  for (const auto* t : exec::reference_targets())
    for (const auto& g : t->ground_truth()) {
      auto want = dsl::parse_rule(g.text);
      bool found = std::any_of(ref.rules.begin(), ref.rules.end(),
                               [&](const dsl::RulesetEntry& e) { return dsl::rule_equal(e.rule.rule, want); });
      CHECK(found);
    }
}

// -------------------------------------------------------------------- llm

TEST_CASE("responses are split and classified", "[rules][llm]") {
  std::vector<dsl::TypedRule> accepted;
  CHECK(kinds(classify_response("I think the input must be positive.", accepted)) ==
        std::vector<FeedbackKind>{FeedbackKind::FormatError});
  auto fs = classify_response(std::string("```\n- ") + kDimRule +
                                  "\n{v_1: tensor, v_2: int} |= ndim(v_1) >= 1\n{v_1: tensor} |= ndim(v_1 >=\n" +
                                  kDimRule + "\n{v_1: int} |= ndim(v_1) = 1\n```",
                              accepted);
  CHECK(kinds(fs) == std::vector<FeedbackKind>{FeedbackKind::Success, FeedbackKind::RedundantBindings,
                                               FeedbackKind::ParsingError, FeedbackKind::DuplicateRule,
                                               FeedbackKind::ParsingError});
  CHECK(accepted.size() == 1);
  CHECK(fs[1].detail.find("v_2") != std::string::npos);
  CHECK(split_candidates("text\n  * {v_1: int} |= v_1 > 0  \n{not a rule}\n").size() == 1);
}

TEST_CASE("prompts fill every slot", "[rules][llm]") {
  auto assets = load_prompt_assets(asset("prompts"));
  CHECK(assets.examples.size() >= 5);
  PromptInputs in{"ref.narrow", "narrow(input, dim, start, length)", {"start must be non-negative"}};
  std::string p = build_prompt(assets, in, {Feedback{FeedbackKind::DuplicateRule, "already generated", "{x}"}});
  CHECK(p.find("{{") == std::string::npos);
  CHECK(p.find("ref.narrow") != std::string::npos);
  CHECK(p.find("start must be non-negative") != std::string::npos);
  CHECK(p.find("DuplicateRule") != std::string::npos);
  CHECK(p.find("forall") != std::string::npos);
  CHECK_THROWS(load_prompt_assets(asset("missing")));
}

TEST_CASE("the generation loop follows the stub transcript", "[rules][llm]") {
  std::vector<std::string> script{kDimRule, "this is garbage {v_1: |= ((", "{v_1: tensor} |= ndim(v_1) >=",
                                  kDimRule, "{v_1: tensor, v_2: int} |= ndim(v_1) >= 2"};
  testing::LlmStub stub([&](size_t turn) { return script[std::min(turn, script.size() - 1)]; });
  HttpChatTransport http(stub.endpoint(), "stub-model", "");
  auto assets = load_prompt_assets(asset("prompts"));
  PromptInputs in{"ref.argmax", "argmax doc", {}};
  LlmLimits lim;
  lim.max_turns = 5;
  auto res = generate_rules_llm(assets, in, http, lim);
  REQUIRE(res.turns.size() == 5);
  std::vector<FeedbackKind> seq;
  for (const auto& t : res.turns) seq.push_back(t.feedback.at(0).kind);
  CHECK(seq == std::vector<FeedbackKind>{FeedbackKind::Success, FeedbackKind::FormatError,
                                         FeedbackKind::ParsingError, FeedbackKind::DuplicateRule,
                                         FeedbackKind::RedundantBindings});
  CHECK(res.rules.size() == 1);
  CHECK(res.failures == 4);
  CHECK(res.stop == StopReason::MaxTurns);
  auto prompts = stub.prompts();
  REQUIRE(prompts.size() == 5);
  CHECK(prompts[2].find("FormatError") != std::string::npos);
  CHECK(prompts[4].find("DuplicateRule") != std::string::npos);
}

TEST_CASE("the loop stops at the failure bound", "[rules][llm]") {
  testing::LlmStub stub([](size_t) { return std::string("{v_1: tensor} |= ndim(\n{v_1: int} |= (("); });
  HttpChatTransport http(stub.endpoint(), "m", "k");
  auto res = generate_rules_llm(load_prompt_assets(asset("prompts")), PromptInputs{"a", "", {}}, http, LlmLimits{});
  CHECK(res.stop == StopReason::FailureBound);
  CHECK(res.failures == 100);
  CHECK(res.turns.size() == 50);
}

TEST_CASE("the loop honors the timeout and accepts multi-rule turns", "[rules][llm]") {
  const auto& s = exec::find_target("ref.narrow")->signature();
  auto pool = enumerate_rules(s, {3, 400, 5});
  testing::LlmStub stub([&](size_t turn) {
    std::string out;
    for (size_t i = 0; i < 5; ++i) out += dsl::render_rule(pool[(turn * 5 + i) % pool.size()].rule) + "\n";
    return out;
  });
  HttpChatTransport http(stub.endpoint(), "m", "");
  testing::SteppingClock clock{{}, std::chrono::milliseconds(1500)};
  auto res = generate_rules_llm(load_prompt_assets(asset("prompts")), PromptInputs{"ref.narrow", "", {}}, http,
                                LlmLimits{}, clock);
  CHECK(res.stop == StopReason::Timeout);
  CHECK(res.turns.size() == 39);
  CHECK(res.rules.size() >= 30);
  CHECK(res.failures == 0);
}

TEST_CASE("endpoint failures end the loop with partial results", "[rules][llm]") {
  auto assets = load_prompt_assets(asset("prompts"));
  {
    testing::LlmStub denied([](size_t) { return std::string(); }, 401);
    HttpChatTransport http(denied.endpoint(), "m", "bad-key");
    auto res = generate_rules_llm(assets, PromptInputs{"a", "", {}}, http, LlmLimits{});
    CHECK(res.stop == StopReason::Endpoint);
    CHECK(res.warning.find("401") != std::string::npos);
    CHECK(res.turns.empty());
  }
  int port;
  {
    testing::LlmStub gone([](size_t) { return std::string(); });
    port = std::stoi(gone.endpoint().substr(gone.endpoint().rfind(':') + 1));
  }
  HttpChatTransport http("http://127.0.0.1:" + std::to_string(port), "m", "", std::chrono::milliseconds(500));
  auto res = generate_rules_llm(assets, PromptInputs{"a", "", {}}, http, LlmLimits{});
  CHECK(res.stop == StopReason::Endpoint);
  CHECK_FALSE(res.warning.empty());
}
