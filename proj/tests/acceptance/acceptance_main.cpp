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

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run criteria 1-9
//   acceptance 3 7        run the listed criteria only

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "../support/llm_stub.hpp"
#include "tcfuzz/dsl/parser.hpp"
#include "tcfuzz/dsl/ruleset.hpp"
#include "tcfuzz/dsl/typecheck.hpp"
#include "tcfuzz/eval.hpp"
#include "tcfuzz/executor/targets.hpp"
#include "tcfuzz/fuzz/concretize.hpp"
#include "tcfuzz/fuzz/fuzzer.hpp"
#include "tcfuzz/gen/abstract_gen.hpp"
#include "tcfuzz/learn/scoring.hpp"
#include "tcfuzz/rules/enumerator.hpp"
#include "tcfuzz/rules/llm.hpp"
#include "tcfuzz/solver/lower.hpp"
#include "tcfuzz/solver/solver.hpp"

using namespace tcfuzz;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- tolerances

constexpr uint64_t kSeed = 0;
constexpr size_t kSeedInputs = 117;
constexpr double kRecall = 1.0;
constexpr double kPrecision = 0.90;
constexpr double kLearnBudgetS = 120;
constexpr double kBroadcastBudgetS = 5;
constexpr size_t kMinPairs = 1500;
constexpr int kTrials = 30;
constexpr double kFuzzBudgetS = 30;
constexpr size_t kCorpusSize = 100;
constexpr double kValidity = 0.95;
constexpr size_t kMinGenerated = 10000;
constexpr double kConcretizeMs = 50;
constexpr size_t kDiversityInputs = 50;
constexpr size_t kMinBuckets = 3;
constexpr double kCrashWithinS = 10;
constexpr double kTolerance = 0.01;
constexpr double kSkew = 0.5;
constexpr size_t kSoundnessRules = 200;
constexpr int kMaxNdim = 5;
constexpr size_t kFailureBound = 100;
constexpr int kLlmTimeoutS = 60;

const char* kBroadcastRule =
    "{v_1: tensor, v_2: tensor} |= if ndim(v_1) = ndim(v_2) then forall i in [0, ndim(v_1) - 1] : "
    "shape(v_1, i) = shape(v_2, i) or shape(v_1, i) = 1 or shape(v_2, i) = 1 "
    "else if ndim(v_1) > ndim(v_2) then forall i in [0, ndim(v_2) - 1] : "
    "shape(v_1, ndim(v_1) - ndim(v_2) + i) = shape(v_2, i) or shape(v_1, ndim(v_1) - ndim(v_2) + i) = 1 or "
    "shape(v_2, i) = 1 "
    "else forall i in [0, ndim(v_1) - 1] : "
    "shape(v_2, ndim(v_2) - ndim(v_1) + i) = shape(v_1, i) or shape(v_2, ndim(v_2) - ndim(v_1) + i) = 1 or "
    "shape(v_1, i) = 1";

const char* kBroadcastRuleShort =
    "{v_1: tensor, v_2: tensor} |= if ndim(v_1) < ndim(v_2) then forall i in [0, ndim(v_1) - 1] : "
    "shape(v_1, i) = shape(v_2, i + (ndim(v_2) - ndim(v_1))) or shape(v_1, i) = 1 or "
    "shape(v_2, i + (ndim(v_2) - ndim(v_1))) = 1 "
    "else forall i in [0, ndim(v_2) - 1] : "
    "shape(v_2, i) = shape(v_1, i + (ndim(v_1) - ndim(v_2))) or shape(v_2, i) = 1 or "
    "shape(v_1, i + (ndim(v_1) - ndim(v_2))) = 1";

const char* kDimRule = "{v_1: tensor, v_2: int} |= (-1 * ndim(v_1) <= v_2) and (v_2 <= ndim(v_1) - 1)";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string asset(const std::string& rel) { return std::string(TCFUZZ_ASSETS_DIR) + "/" + rel; }

dsl::TypedRule rule(const std::string& text) { return dsl::type_check(dsl::parse_rule(text)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(prec);
  o << v;
  return o.str();
}

TensorV shaped(std::vector<int64_t> shape) {
  TensorV t;
  t.ndim = static_cast<int64_t>(shape.size());
  t.shape = std::move(shape);
  t.lo = 0;
  t.hi = 1;
  return t;
}

void shapes_upto(int max_nd, int max_dim, std::vector<std::vector<int64_t>>& out) {
  out.push_back({});
  std::vector<std::vector<int64_t>> frontier{{}};
  for (int nd = 1; nd <= max_nd; ++nd) {
    std::vector<std::vector<int64_t>> next;
    for (const auto& s : frontier)
      for (int64_t d = 1; d <= max_dim; ++d) {
        auto t = s;
        t.push_back(d);
        next.push_back(t);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = next;
  }
}

// Right-aligned pairwise dimension test, written without the DSL.
bool brute_broadcastable(const std::vector<int64_t>& a, const std::vector<int64_t>& b) {
  size_t n = std::max(a.size(), b.size());
  for (size_t k = 0; k < n; ++k) {
    int64_t x = k < a.size() ? a[a.size() - 1 - k] : 1;
    int64_t y = k < b.size() ? b[b.size() - 1 - k] : 1;
    if (x != y && x != 1 && y != 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------- shared state

struct Learned {
  const exec::ReferenceTarget* target = nullptr;
  solver::SymbolicLayout layout;
  std::vector<learn::Invariant> kept;
  learn::Score score;
  double seconds = 0;
};

exec::InProcessExecutor& executor() {
  static exec::InProcessExecutor ex;
  return ex;
}

// Enumerator candidates first, then the shipped rules; 117 seeds; refined.
const std::vector<std::unique_ptr<Learned>>& learned_targets() {
  static std::vector<std::unique_ptr<Learned>> all = [] {
    std::vector<std::unique_ptr<Learned>> out;
    auto shipped = dsl::load_ruleset(asset("rulesets/reference.rules"));
    for (const auto* t : exec::reference_targets()) {
      auto t0 = std::chrono::steady_clock::now();
      auto l = std::make_unique<Learned>();
      l->target = t;
      const auto& sig = t->signature();
      std::vector<dsl::TypedRule> rules;
      rules::EnumeratorConfig ec;
      ec.seed = kSeed;
      for (auto& r : rules::enumerate_rules(sig, ec)) rules.push_back(r);
      for (auto& e : shipped.rules) rules.push_back(e.rule);
      auto outcome = learn::learn_invariants(rules, exec::seed_inputs(t->name(), kSeedInputs, kSeed), sig);
      l->layout = solver::build_layout(sig);
      auto lowered = gen::lower_invariants(outcome.kept, l->layout);
      learn::LearnConfig cfg;
      cfg.seed = kSeed;
      cfg.trials = kTrials;
      auto rep =
          learn::refine(outcome, gen::make_validity_probe(outcome.kept, l->layout, lowered, executor()), cfg);
      l->kept = rep.kept;
      std::vector<learn::Invariant> truth;
      for (const auto& g : t->ground_truth()) truth.push_back(learn::Invariant{rule(g.text), g.params});
      exec::GridBounds grid;
      if (sig.params.size() > 3) grid.max_ndim = 2;
      l->score = learn::score_invariants(l->kept, truth, t->name(), executor(), grid);
      l->seconds = seconds_since(t0);
      out.push_back(std::move(l));
    }
    return out;
  }();
  return all;
}

const Learned& learned(const std::string& api) {
  for (const auto& l : learned_targets())
    if (l->target->name() == api) return *l;
  throw std::runtime_error("no reference target " + api);
}

struct Fuzzed {
  gen::Corpus corpus;
  fuzz::FuzzTarget target;
  fuzz::FuzzConfig cfg;
  fuzz::FuzzReport report;
};

std::string findings_root() { return (fs::temp_directory_path() / "tcfuzz-acceptance").string(); }

gen::Corpus corpus_for(const Learned& l, size_t size) {
  gen::GenConfig gc;
  gc.target_size = size;
  gc.seed = kSeed;
  return gen::generate_abstract_inputs(l.kept, l.layout, gen::BucketTable::standard(), executor(), gc).corpus;
}

// A full-budget fuzz run per target from its learned corpus.
const Fuzzed& fuzzed(const std::string& api) {
  static std::map<std::string, std::unique_ptr<Fuzzed>> cache;
  auto& slot = cache[api];
  if (!slot) {
    const Learned& l = learned(api);
    slot = std::make_unique<Fuzzed>();
    slot->corpus = corpus_for(l, kCorpusSize);
    slot->target = fuzz::make_fuzz_target(l.layout, slot->corpus, l.kept);
    slot->cfg.budget = std::chrono::milliseconds(static_cast<int64_t>(kFuzzBudgetS * 1000));
    slot->cfg.seed = kSeed;
    slot->cfg.tolerance = kTolerance;
    slot->cfg.findings_dir = findings_root();
    slot->report = fuzz::fuzz_api(slot->target, executor(), slot->cfg);
  }
  return *slot;
}

// Accepts every call, so generation is driven by the solver alone.
class AcceptAll : public exec::Executor {
 public:
  explicit AcceptAll(const ApiSignature& s) { catalog_.push_back(exec::ApiInfo{s.api, s, "", {"cpu"}}); }
  exec::ExecResult run(const exec::ExecRequest& req) override {
    exec::ExecResult r;
    r.id = req.id;
    return r;
  }
  const std::vector<exec::ApiInfo>& catalog() const override { return catalog_; }

 private:
  std::vector<exec::ApiInfo> catalog_;
};

// ---------------------------------------------------------------- criteria

Outcome criterion1() {
  size_t checked = 0;
  std::vector<std::string> texts = {kBroadcastRule, kBroadcastRuleShort, kDimRule};
  for (const auto& entry : fs::directory_iterator(asset("rulesets"))) {
    if (entry.path().extension() != ".rules") continue;
    auto load = dsl::load_ruleset(entry.path().string());
    if (!load.issues.empty()) return {false, load.issues.front().to_string()};
    for (const auto& e : load.rules) texts.push_back(dsl::render_rule(e.rule.rule));
  }
  for (const auto* t : exec::reference_targets())
    for (const auto& g : t->ground_truth()) texts.push_back(g.text);
  for (const auto& text : texts) {
    try {
      dsl::Rule r = dsl::parse_rule(text);
      std::string once = dsl::render_rule(r);
      dsl::Rule again = dsl::parse_rule(once);
      if (!dsl::rule_equal(r, again) || dsl::render_rule(again) != once) return {false, "round trip differs: " + text};
      dsl::type_check(again);
      ++checked;
    } catch (const std::exception& e) {
      return {false, text + ": " + e.what()};
    }
  }

  struct Negative {
    const char* text;
    dsl::TypeErrorKind kind;
  };
  using K = dsl::TypeErrorKind;
  const Negative negatives[] = {
      {"{v_1: tensor} |= v_1 > 0", K::NotPrimitive},
      {"{v_1: tensor|int} |= v_1 = 1", K::BadUnion},
      {"{v_1: int} |= v_1[0] = 1", K::NotIndexable},
      {"{v_1: list(int)} |= v_1[true] = 1", K::IndexNotInt},
      {"{v_1: int} |= v_1.len = 1", K::NoLength},
      {"{v_2: int} |= ndim(v_2) = 1", K::TensorFnOnNonTensor},
      {"{v_1: tensor} |= ndim(v_1) + true > 1", K::ArithOperand},
      {"{v_1: tensor} |= ndim(v_1) and true", K::LogicOperand},
      {"{v_1: tensor} |= forall i in [0, true] : shape(v_1, i) > 0", K::BoundNotInt},
      {"{v_1: tensor} |= if ndim(v_1) then true else false", K::CondNotBool},
      {"{v_1: tensor} |= ndim(v_1)", K::RuleNotBool},
      {"{a: int, s: str} |= (if a > 0 then 1 else s) = 1", K::BranchMismatch},
  };
  size_t rejected = 0;
  for (const auto& n : negatives) {
    try {
      dsl::type_check(dsl::parse_rule(n.text));
      return {false, std::string("accepted: ") + n.text};
    } catch (const dsl::TypeErrorReport& rep) {
      if (rep.errors().empty() || rep.errors().front().kind != n.kind)
        return {false, std::string("wrong error kind for ") + n.text};
      ++rejected;
    }
  }
  return {true, std::to_string(checked) + " rules round-trip and type-check; " + std::to_string(rejected) + "/" +
                    std::to_string(std::size(negatives)) + " negatives rejected with the expected kind"};
}

Outcome criterion2() {
  auto t0 = std::chrono::steady_clock::now();
  dsl::TypedRule r = rule(kBroadcastRule);
  auto verdict = [&](std::vector<int64_t> a, std::vector<int64_t> b) {
    return check_rule(r, Binding{{"v_1", shaped(std::move(a))}, {"v_2", shaped(std::move(b))}}).verdict;
  };
  if (verdict({5, 3, 4, 1}, {3, 1, 1}) != Verdict::Holds) return {false, "[5,3,4,1] vs [3,1,1] is not broadcastable"};
  if (verdict({3, 4}, {2, 4}) != Verdict::Fails) return {false, "[3,4] vs [2,4] is broadcastable"};
  std::vector<std::vector<int64_t>> shapes;
  shapes_upto(3, 3, shapes);
  size_t pairs = 0, mismatches = 0;
  for (const auto& a : shapes)
    for (const auto& b : shapes) {
      ++pairs;
      Verdict v = verdict(a, b);
      if (v == Verdict::Errors || (v == Verdict::Holds) != brute_broadcastable(a, b)) ++mismatches;
    }
  double el = seconds_since(t0);
  std::string detail = std::to_string(pairs) + " pairs, " + std::to_string(mismatches) + " mismatches, " + fmt(el, 2) +
                       " s (limit " + fmt(kBroadcastBudgetS, 0) + " s)";
  return {mismatches == 0 && pairs >= kMinPairs && el < kBroadcastBudgetS, detail};
}

Outcome criterion3() {
  auto t0 = std::chrono::steady_clock::now();
  size_t covered = 0, total = 0, correct = 0, kept = 0;
  std::string per;
  for (const auto& l : learned_targets()) {
    covered += l->score.covered.size();
    total += l->score.covered.size() + l->score.missed.size();
    correct += l->score.correct.size();
    kept += l->kept.size();
    per += " " + l->target->name() + "=" + fmt(l->score.recall(), 2) + "/" + fmt(l->score.precision(), 2);
  }
  double el = seconds_since(t0);
  double recall = total ? static_cast<double>(covered) / total : 1.0;
  double precision = kept ? static_cast<double>(correct) / kept : 1.0;
  std::string detail = "recall " + fmt(recall) + " (>= " + fmt(kRecall, 2) + "), precision " + fmt(precision) +
                       " (>= " + fmt(kPrecision, 2) + "), " + fmt(el, 1) + " s;" + per;
  return {recall >= kRecall && precision >= kPrecision && el < kLearnBudgetS, detail};
}

Outcome criterion4() {
  auto& ex = executor();
  const auto& sig = ex.find("ref.add_broadcast")->signature;
  auto layout = solver::build_layout(sig);
  std::vector<dsl::TypedRule> rules{rule(kBroadcastRule), rule(kBroadcastRuleShort),
                                    rule("{v_1: tensor, v_2: tensor} |= dtype_(v_1) = dtype_(v_2)")};
  auto outcome = learn::learn_invariants(rules, exec::seed_inputs("ref.add_broadcast", kSeedInputs, kSeed), sig);
  auto lowered = gen::lower_invariants(outcome.kept, layout);
  auto probe = gen::make_validity_probe(outcome.kept, layout, lowered, ex);
  learn::LearnConfig cfg;
  cfg.seed = kSeed;
  cfg.trials = kTrials;
  auto rep = learn::refine(outcome, probe, cfg);

  auto is_broadcast = [](const learn::Invariant& inv) {
    std::string text = dsl::render_rule(inv.rule.rule);
    return text.find("forall") != std::string::npos;
  };
  std::set<std::string> learned_bc;
  size_t kept_bc = 0;
  for (const auto& k : outcome.kept)
    if (is_broadcast(k)) learned_bc.insert(dsl::render_rule(k.rule.rule));
  for (const auto& k : rep.kept) kept_bc += is_broadcast(k);

  std::set<std::string> kept_keys;
  for (const auto& k : rep.kept) kept_keys.insert(k.key());
  std::vector<bool> active(outcome.kept.size());
  for (size_t i = 0; i < outcome.kept.size(); ++i) active[i] = kept_keys.count(outcome.kept[i].key()) > 0;
  auto after = probe(active, cfg.seed, kTrials);
  double v_after = after.trials ? static_cast<double>(after.valid) / after.trials : 0;
  double gap = std::fabs(v_after - rep.v_orig);
  std::string detail = std::to_string(learned_bc.size()) + " encodings learned, " + std::to_string(kept_bc) +
                       " kept; v_orig " + fmt(rep.v_orig) + ", after " + fmt(v_after) + " (|gap| " + fmt(gap) +
                       " <= 1/T = " + fmt(1.0 / kTrials) + ")";
  return {learned_bc.size() == 2 && kept_bc == 1 && gap <= 1.0 / kTrials + 1e-12, detail};
}

Outcome criterion5() {
  bool ok = true;
  std::string per;
  for (const auto& l : learned_targets()) {
    const auto& rep = fuzzed(l->target->name()).report;
    bool good = rep.validity_ratio >= kValidity && rep.generated >= kMinGenerated &&
                rep.concretize_ms_mean <= kConcretizeMs;
    ok = ok && good;
    per += " " + l->target->name() + "=" + fmt(rep.validity_ratio) + "/" + std::to_string(rep.generated) + "/" +
           fmt(rep.concretize_ms_mean, 3) + "ms" + (good ? "" : "(!)");
  }
  return {ok, "validity/generated/concretize per " + fmt(kFuzzBudgetS, 0) + " s run (>= " + fmt(kValidity, 2) +
                  ", >= " + std::to_string(kMinGenerated) + ", <= " + fmt(kConcretizeMs, 0) + " ms):" + per};
}

Outcome criterion6() {
  auto dims = gen::BucketTable::standard().dims();
  auto bucket_of = [&](int64_t v) -> int {
    for (size_t b = 0; b < dims.size(); ++b)
      if (v >= dims[b].lo && v <= dims[b].hi) return static_cast<int>(b);
    return -1;
  };
  std::string problems, per;
  auto check = [&](const std::string& api, const gen::Corpus& corpus, const solver::SymbolicLayout& layout,
                   const std::vector<learn::Invariant>& kept) {
    const auto& in = corpus.inputs;
    if (in.size() != kDiversityInputs) {
      problems += " " + api + ": " + std::to_string(in.size()) + " inputs recorded";
      return;
    }
    std::set<std::map<std::string, int64_t>> distinct;
    for (const auto& a : in) distinct.insert(a.model);
    if (distinct.size() != in.size()) problems += " " + api + ": duplicate models";

    std::set<solver::VarId> constrained;
    auto lowered = gen::lower_invariants(kept, layout);
    for (const auto& f : lowered.formulas()) {
      std::vector<solver::VarId> vs;
      f.collect_vars(vs);
      constrained.insert(vs.begin(), vs.end());
    }
    // Dims no invariant mentions, taken where the tensor reaches them.
    size_t free_dims = 0;
    for (const auto& p : layout.params()) {
      if (p.value.kind != dsl::TypeKind::Tensor) continue;
      const auto& t = p.value.tensor;
      for (size_t i = 0; i < t.dims.size(); ++i) {
        if (constrained.count(t.dims[i])) continue;
        std::string var = layout.var(t.dims[i]).name;
        std::string nd = layout.var(t.nd).name;
        std::set<int> hit;
        size_t active = 0;
        for (const auto& a : in)
          if (a.model.at(nd) > static_cast<int64_t>(i)) {
            ++active;
            hit.insert(bucket_of(a.model.at(var)));
          }
        if (active < kDiversityInputs / 2) continue;
        ++free_dims;
        if (hit.size() < kMinBuckets)
          problems += " " + api + ": " + var + " hits " + std::to_string(hit.size()) + " buckets";
      }
    }
    size_t repeats = 0;
    for (size_t i = 1; i < in.size(); ++i) {
      std::set<std::string> before;
      for (const auto& [n, b] : in[i - 1].provenance.buckets) before.insert(n);
      for (const auto& [n, b] : in[i].provenance.buckets)
        if (before.count(n) && in[i].model.at(n) == in[i - 1].model.at(n)) ++repeats;
      for (const auto& [n, v] : in[i].provenance.blocked)
        if (in[i].model.at(n) == v) ++repeats;
    }
    if (repeats) problems += " " + api + ": " + std::to_string(repeats) + " repeated sampled values";
    per += " " + api + "=" + std::to_string(distinct.size()) + "/" + std::to_string(free_dims);
  };
  for (const auto& l : learned_targets())
    check(l->target->name(), corpus_for(*l, kDiversityInputs), l->layout, l->kept);
  // Without invariants every dim is unconstrained.
  for (const auto& l : learned_targets()) {
    AcceptAll accept(l->target->signature());
    gen::GenConfig gc;
    gc.target_size = kDiversityInputs;
    gc.seed = kSeed;
    auto corpus = gen::generate_abstract_inputs({}, l->layout, gen::BucketTable::standard(), accept, gc).corpus;
    check(l->target->name() + "(free)", corpus, l->layout, {});
  }
  return {problems.empty(), problems.empty() ? "distinct models / free dims checked:" + per : problems};
}

Outcome criterion7() {
  const Learned& shuffle = learned("ref.channel_shuffle");
  gen::Corpus corpus = corpus_for(shuffle, kCorpusSize);
  auto target = fuzz::make_fuzz_target(shuffle.layout, corpus, shuffle.kept);
  fuzz::FuzzConfig cfg;
  cfg.budget = std::chrono::milliseconds(static_cast<int64_t>(kCrashWithinS * 1000));
  cfg.seed = kSeed;
  cfg.tolerance = kTolerance;
  cfg.stop_at_first_finding = true;
  auto rep = fuzz::fuzz_api(target, executor(), cfg);
  bool crash = false;
  for (const auto& f : rep.findings) crash = crash || f.kind == fuzz::FindingKind::Crash;
  std::string detail = "crash after " + fmt(rep.first_crash_s, 2) + " s";
  bool ok = crash && rep.first_crash_s >= 0 && rep.first_crash_s < kCrashWithinS;

  const auto& add = fuzzed("ref.add_broadcast");
  const auto& mm = fuzzed("ref.matmul2d");
  size_t nan = 0, add_incons = 0, skew = 0;
  for (const auto& f : add.report.findings) {
    nan += f.kind == fuzz::FindingKind::NaN;
    add_incons += f.kind == fuzz::FindingKind::Inconsistent;
  }
  for (const auto& f : mm.report.findings)
    if (f.kind == fuzz::FindingKind::Inconsistent && std::fabs(f.max_abs_diff - kSkew) < 1e-9) ++skew;
  ok = ok && nan > 0 && add_incons == 0 && skew > 0;
  detail += "; add NaN findings " + std::to_string(nan) + ", add inconsistent " + std::to_string(add_incons) +
            ", matmul skew " + fmt(kSkew, 1) + " findings " + std::to_string(skew);

  // The 1e-6 gpu offset alone stays under the tolerance.
  size_t small_skew = 0, compared = 0;
  for (const auto& in : exec::seed_inputs("ref.add_broadcast", kSeedInputs, kSeed)) {
    const auto* alpha = in.get("alpha");
    if (!alpha || !alpha->as<double>() || *alpha->as<double>() < 0) continue;
    exec::ExecRequest req;
    req.api = "ref.add_broadcast";
    req.input = in;
    if (executor().run(req).status != exec::ExecStatus::Ok) continue;
    ++compared;
    auto d = fuzz::run_differential(executor(), "ref.add_broadcast", in, {"cpu", "gpu"}, kTolerance);
    small_skew += d.agree ? 0 : 1;
  }
  ok = ok && compared > 0 && small_skew == 0;
  detail += "; 1e-6 offset findings " + std::to_string(small_skew) + "/" + std::to_string(compared);

  size_t replayed = 0, identical = 0;
  auto check_replays = [&](const fuzz::FuzzTarget& t, const fuzz::FuzzConfig& c,
                           const std::vector<fuzz::Finding>& findings) {
    for (const auto& f : findings) {
      ++replayed;
      auto again = fuzz::replay(t, executor(), f.seed, c);
      if (again && fuzz::finding_to_json(*again).dump() == fuzz::finding_to_json(f).dump()) ++identical;
    }
  };
  check_replays(target, cfg, rep.findings);
  check_replays(add.target, add.cfg, add.report.findings);
  check_replays(mm.target, mm.cfg, mm.report.findings);
  ok = ok && replayed > 0 && identical == replayed;
  detail += "; replays identical " + std::to_string(identical) + "/" + std::to_string(replayed);
  return {ok, detail};
}

Outcome criterion8() {
  size_t rules_used = 0, sat = 0, holds = 0, other = 0;
  std::string first_bad;
  for (uint64_t round = 0; rules_used < kSoundnessRules && round < 20; ++round)
    for (const auto* t : exec::reference_targets()) {
      if (rules_used >= kSoundnessRules) break;
      const auto& sig = t->signature();
      auto layout = solver::build_layout(sig);
      rules::EnumeratorConfig ec;
      ec.seed = kSeed + round;
      ec.count = 20;
      for (const auto& r : rules::enumerate_rules(sig, ec)) {
        if (rules_used >= kSoundnessRules) break;
        auto tuples = learn::enumerate_candidates(r, sig);
        if (tuples.empty()) continue;
        learn::Invariant inv{r, tuples.front()};
        solver::Lowered low;
        try {
          low = solver::lower_rule(r, inv.params, layout);
        } catch (const solver::LoweringUnsupported&) {
          continue;
        }
        ++rules_used;
        auto res = solver::solve(layout, {low.formula}, solver::SolveOptions{kSeed + rules_used});
        if (res.status != solver::SolveStatus::Sat) continue;
        ++sat;
        std::mt19937_64 rng(kSeed + rules_used);
        std::vector<const learn::Invariant*> rechecks;
        if (low.approximate) rechecks.push_back(&inv);
        try {
          auto input = fuzz::concretize(res.model, layout, rechecks, rng);
          if (learn::check_invariant(inv, input).verdict == Verdict::Holds) {
            ++holds;
            continue;
          }
        } catch (const std::exception&) {
          ++other;
        }
        if (first_bad.empty()) first_bad = inv.key();
      }
    }
  bool ok = rules_used == kSoundnessRules && holds == sat;
  std::string detail = std::to_string(rules_used) + " lowerable rules, " + std::to_string(sat) + " sat, " +
                       std::to_string(holds) + " hold after concretization";
  if (other) detail += ", " + std::to_string(other) + " concretization failures";
  if (!first_bad.empty()) detail += ", first violation " + first_bad;

  // Expansion against the evaluator for every shape with ndim <= 5.
  const std::vector<std::string> quantified = {
      "{v: tensor} |= forall i in [0, ndim(v) - 1] : shape(v, i) >= 2",
      "{v: tensor} |= exists i in [0, ndim(v) - 1] : shape(v, i) = 3",
      "{v: tensor} |= forall i in [1, ndim(v) - 1] : shape(v, i - 1) <= shape(v, i)",
      "{v: tensor} |= exists i in [0, ndim(v) - 2] : forall j in [i + 1, ndim(v) - 1] : shape(v, j) = 1",
      "{v: tensor} |= forall i in [0, 7] : shape(v, i) > 1",
      "{v: tensor} |= if ndim(v) > 2 then shape(v, 2) = 1 else shape(v, 0) = 2",
  };
  ApiSignature one{"acceptance.one", {Param{"v", dsl::parse_type("tensor"), true}}};
  auto layout = solver::build_layout(one);
  auto base = solver::solve(layout, {}, solver::SolveOptions{kSeed});
  if (base.status != solver::SolveStatus::Sat) return {false, "the empty layout is not satisfiable"};
  const auto& slots = layout.param("v")->value.tensor;
  std::vector<std::vector<int64_t>> shapes;
  shapes_upto(kMaxNdim, 3, shapes);
  size_t cases = 0, disagreements = 0;
  for (const auto& text : quantified) {
    auto r = rule(text);
    auto low = solver::lower_rule(r, {"v"}, layout);
    for (const auto& s : shapes) {
      auto m = base.model;
      m[static_cast<size_t>(slots.nd)] = static_cast<int64_t>(s.size());
      for (size_t i = 0; i < slots.dims.size(); ++i)
        m[static_cast<size_t>(slots.dims[i])] = i < s.size() ? s[i] : 1;
      bool eval_holds = check_rule(r, Binding{{"v", shaped(s)}}).verdict == Verdict::Holds;
      ++cases;
      disagreements += low.formula.eval(m) != eval_holds;
    }
  }
  ok = ok && disagreements == 0;
  detail += "; expansion " + std::to_string(cases - disagreements) + "/" + std::to_string(cases) +
            " agree for ndim 0.." + std::to_string(kMaxNdim);
  return {ok, detail};
}

Outcome criterion9() {
  using rules::FeedbackKind;
  auto assets = rules::load_prompt_assets(asset("prompts"));
  std::string detail;
  bool ok = true;

  std::vector<std::string> script{kDimRule, "this is garbage {v_1: |= ((", "{v_1: tensor} |= ndim(v_1) >=", kDimRule,
                                  "{v_1: tensor, v_2: int} |= ndim(v_1) >= 2"};
  {
    testing::LlmStub stub([&](size_t turn) { return script[std::min(turn, script.size() - 1)]; });
    rules::HttpChatTransport http(stub.endpoint(), "stub-model", "");
    rules::LlmLimits lim;
    lim.max_turns = static_cast<int>(script.size());
    auto res = rules::generate_rules_llm(assets, rules::PromptInputs{"ref.argmax", "argmax doc", {}}, http, lim);
    std::vector<FeedbackKind> seq;
    for (const auto& t : res.turns) seq.push_back(t.feedback.at(0).kind);
    std::vector<FeedbackKind> want{FeedbackKind::Success, FeedbackKind::FormatError, FeedbackKind::ParsingError,
                                   FeedbackKind::DuplicateRule, FeedbackKind::RedundantBindings};
    bool seq_ok = seq == want && res.rules.size() == 1;
    ok = ok && seq_ok;
    detail += std::string("five-kind sequence ") + (seq_ok ? "matches" : "differs");
  }
  {
    testing::LlmStub stub([](size_t) { return std::string("{v_1: tensor} |= ndim(\n{v_1: int} |= (("); });
    rules::HttpChatTransport http(stub.endpoint(), "m", "");
    auto res = rules::generate_rules_llm(assets, rules::PromptInputs{"a", "", {}}, http, rules::LlmLimits{});
    bool bound_ok = res.stop == rules::StopReason::FailureBound && res.failures == kFailureBound;
    ok = ok && bound_ok;
    detail += "; failure bound stop after " + std::to_string(res.failures) + " failures";
  }
  {
    const auto& sig = exec::find_target("ref.narrow")->signature();
    auto pool = rules::enumerate_rules(sig, {3, 400, 5});
    testing::LlmStub stub([&](size_t turn) {
      std::string out;
      for (size_t i = 0; i < 5; ++i) out += dsl::render_rule(pool[(turn * 5 + i) % pool.size()].rule) + "\n";
      return out;
    });
    rules::HttpChatTransport http(stub.endpoint(), "m", "");
    testing::SteppingClock clock{{}, std::chrono::milliseconds(1500)};
    rules::LlmLimits lim;
    auto res = rules::generate_rules_llm(assets, rules::PromptInputs{"ref.narrow", "", {}}, http, lim, clock);
    bool multi = false;
    for (const auto& t : res.turns) {
      size_t ok_count = 0;
      for (const auto& f : t.feedback) ok_count += f.kind == FeedbackKind::Success;
      multi = multi || ok_count > 1;
    }
    bool time_ok = res.stop == rules::StopReason::Timeout &&
                   std::chrono::duration_cast<std::chrono::seconds>(lim.timeout).count() == kLlmTimeoutS;
    ok = ok && time_ok && multi;
    detail += "; timeout stop after " + std::to_string(res.turns.size()) + " turns (" + std::to_string(kLlmTimeoutS) +
              " s), " + std::to_string(res.rules.size()) + " rules" + (multi ? " with multi-rule turns" : "");
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"grammar and typing conformance", criterion1}, {"broadcast oracle", criterion2},
      {"learning recall and precision", criterion3},  {"redundancy refinement", criterion4},
      {"validity ratio", criterion5},                 {"diversity", criterion6},
      {"oracle detection", criterion7},               {"solver soundness", criterion8},
      {"generation loop conformance", criterion9},
  };
  std::set<size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoul(argv[i]));
  fs::remove_all(findings_root());
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(i + 1)) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << " [" << criteria[i].first << "] "
              << o.detail << " (" << fmt(seconds_since(t0), 1) << " s)" << std::endl;
  }
  return failed ? 1 : 0;
}
