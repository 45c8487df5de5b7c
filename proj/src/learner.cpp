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

#include "tcfuzz/learn/learner.hpp"

#include <functional>
#include <set>

#include "tcfuzz/dsl/parser.hpp"

namespace tcfuzz::learn {

namespace {

uint64_t mix(uint64_t a, uint64_t b) {
  uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<size_t> param_positions(const Invariant& inv, const ApiInput& in) {
  std::vector<size_t> out;
  for (const auto& p : inv.params) {
    size_t i = 0;
    while (i < in.args.size() && in.args[i].first != p) ++i;
    out.push_back(i);
  }
  return out;
}

}  // namespace

std::string Invariant::key() const {
  std::string out = dsl::render_rule(rule.rule) + " @ (";
  for (size_t i = 0; i < params.size(); ++i) out += (i ? ", " : "") + params[i];
  return out + ")";
}

std::vector<std::vector<std::string>> enumerate_candidates(const dsl::TypedRule& rule, const ApiSignature& sig,
                                                           bool* capped) {
  if (capped) *capped = false;
  const auto& binds = rule.rule.bindings;
  size_t k = binds.size();
  std::vector<std::vector<size_t>> compatible(k);
  std::set<size_t> any;
  for (size_t i = 0; i < k; ++i)
    for (size_t p = 0; p < sig.params.size(); ++p)
      if (dsl::same_type(binds[i].type, sig.params[p].type)) {
        compatible[i].push_back(p);
        any.insert(p);
      }
  size_t cap = (k >= 4 && any.size() > 8) ? kCandidateCap : SIZE_MAX;

  std::vector<std::vector<std::string>> out;
  if (k == 0) return out;
  std::vector<size_t> cur;
  std::vector<bool> used(sig.params.size(), false);
  // Depth-first over positions; each level walks its candidates in order.
  std::function<bool(size_t)> rec = [&](size_t level) {
    if (level == k) {
      if (out.size() >= cap) {
        if (capped) *capped = true;
        return false;
      }
      std::vector<std::string> names;
      for (size_t p : cur) names.push_back(sig.params[p].name);
      out.push_back(std::move(names));
      return true;
    }
    for (size_t p : compatible[level]) {
      if (used[p]) continue;
      used[p] = true;
      cur.push_back(p);
      bool go = rec(level + 1);
      cur.pop_back();
      used[p] = false;
      if (!go) return false;
    }
    return true;
  };
  rec(0);
  return out;
}

CheckResult check_invariant(const Invariant& inv, const ApiInput& input) {
  std::vector<const ConcreteValue*> args;
  static const ConcreteValue none;
  for (const auto& p : inv.params) {
    const ConcreteValue* v = input.get(p);
    args.push_back(v ? v : &none);
  }
  return check_rule(inv.rule, args);
}

LearnOutcome learn_invariants(const std::vector<dsl::TypedRule>& rules, const std::vector<ApiInput>& seeds,
                              const ApiSignature& sig) {
  if (seeds.empty()) throw EmptySeedSet();
  LearnOutcome out;
  std::set<std::string> seen;
  static const ConcreteValue none;
  for (const auto& r : rules) {
    bool capped = false;
    auto tuples = enumerate_candidates(r, sig, &capped);
    if (capped) ++out.capped_rules;
    for (auto& t : tuples) {
      Invariant inv{r, std::move(t)};
      if (!seen.insert(inv.key()).second) continue;
      bool ok = true;
      std::vector<const ConcreteValue*> args(inv.params.size());
      for (size_t s = 0; s < seeds.size() && ok; ++s) {
        auto pos = param_positions(inv, seeds[s]);
        for (size_t i = 0; i < pos.size(); ++i) args[i] = pos[i] < seeds[s].args.size() ? &seeds[s].args[pos[i]].second : &none;
        CheckResult c = check_rule(inv.rule, args);
        if (c.verdict == Verdict::Fails) {
          out.not_invariant.push_back(Counterexample{inv, s, seeds[s]});
          ok = false;
        } else if (c.verdict == Verdict::Errors) {
          out.eval_error.push_back(EvalFailure{inv, s, *c.error});
          ok = false;
        }
      }
      if (ok) out.kept.push_back(std::move(inv));
    }
  }
  return out;
}

LearnReport refine(const LearnOutcome& learned, const ValidityProbe& probe, const LearnConfig& cfg,
                   const std::vector<bool>& testable) {
  if (cfg.trials < 1) throw std::invalid_argument("trials must be at least 1");
  size_t n = learned.kept.size();
  auto can_test = [&](size_t i) { return testable.empty() || testable[i]; };
  LearnReport rep;
  rep.dropped_not_invariant = learned.not_invariant;
  rep.dropped_eval_error = learned.eval_error;

  std::vector<bool> active(n, true);
  Probe base = probe(active, mix(cfg.seed, 0), cfg.trials);
  if (!base.sat) throw SolverUnsat(base.core);
  rep.v_orig = base.ratio();
  if (base.valid == 0) {
    rep.degenerate = true;
    rep.kept = learned.kept;
    for (size_t i = 0; i < n; ++i)
      if (!can_test(i)) rep.unlowerable.push_back(learned.kept[i].key());
    return rep;
  }
  std::vector<bool> redundant(n, false);
  for (size_t i = 0; i < n; ++i) {
    const Invariant& inv = learned.kept[i];
    if (!can_test(i)) {
      rep.kept.push_back(inv);
      rep.unlowerable.push_back(inv.key());
      continue;
    }
    std::vector<bool> act(n);
    for (size_t j = 0; j < n; ++j) act[j] = j != i && !redundant[j];
    Probe p = probe(act, mix(cfg.seed, i + 1), cfg.trials);
    // v_test < v_orig compared on counts over equal trial numbers.
    if (p.sat && p.ratio() < rep.v_orig) {
      rep.kept.push_back(inv);
    } else {
      redundant[i] = true;
      rep.dropped_redundant.push_back(inv);
    }
  }
  return rep;
}

json invariant_to_json(const Invariant& inv) {
  return json{{"rule", dsl::render_rule(inv.rule.rule)}, {"params", inv.params}};
}

Invariant invariant_from_json(const json& j) {
  return Invariant{dsl::type_check(dsl::parse_rule(j.at("rule").get<std::string>())),
                   j.at("params").get<std::vector<std::string>>()};
}

json report_to_json(const LearnReport& r) {
  json kept = json::array(), red = json::array(), ni = json::array(), ee = json::array();
  for (const auto& i : r.kept) kept.push_back(invariant_to_json(i));
  for (const auto& i : r.dropped_redundant) red.push_back(invariant_to_json(i));
  for (const auto& c : r.dropped_not_invariant) {
    json j = invariant_to_json(c.invariant);
    j["seed_index"] = c.seed_index;
    j["counterexample"] = encode_input(c.input);
    ni.push_back(j);
  }
  for (const auto& e : r.dropped_eval_error) {
    json j = invariant_to_json(e.invariant);
    j["seed_index"] = e.seed_index;
    j["error_kind"] = eval_error_kind_name(e.error.kind());
    j["error"] = e.error.what();
    ee.push_back(j);
  }
  return json{{"kept", kept},
              {"dropped_redundant", red},
              {"dropped_not_invariant", ni},
              {"dropped_eval_error", ee},
              {"v_orig", r.v_orig},
              {"degenerate", r.degenerate},
              {"unlowerable", r.unlowerable}};
}

LearnReport report_from_json(const json& j) {
  LearnReport r;
  for (const auto& i : j.at("kept")) r.kept.push_back(invariant_from_json(i));
  for (const auto& i : j.at("dropped_redundant")) r.dropped_redundant.push_back(invariant_from_json(i));
  for (const auto& i : j.at("dropped_not_invariant"))
    r.dropped_not_invariant.push_back(
        Counterexample{invariant_from_json(i), i.at("seed_index").get<size_t>(), decode_input(i.at("counterexample"))});
  for (const auto& i : j.at("dropped_eval_error")) {
    EvalErrorKind kind = EvalErrorKind::WrongKind;
    for (auto k : {EvalErrorKind::NonIntegralIndex, EvalErrorKind::DivisionByZero, EvalErrorKind::IndexOutOfRange,
                   EvalErrorKind::WrongKind, EvalErrorKind::RangeTooLarge})
      if (i.at("error_kind").get<std::string>() == eval_error_kind_name(k)) kind = k;
    r.dropped_eval_error.push_back(EvalFailure{invariant_from_json(i), i.at("seed_index").get<size_t>(),
                                               EvalError(kind, i.at("error").get<std::string>())});
  }
  r.v_orig = j.at("v_orig").get<double>();
  r.degenerate = j.value("degenerate", false);
  r.unlowerable = j.value("unlowerable", std::vector<std::string>{});
  return r;
}

}  // namespace tcfuzz::learn
