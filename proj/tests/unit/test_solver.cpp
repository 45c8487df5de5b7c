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

#include <set>

#include "catch_amalgamated.hpp"
#include "tcfuzz/dsl/parser.hpp"
#include "tcfuzz/eval.hpp"
#include "tcfuzz/solver/lower.hpp"
#include "tcfuzz/solver/solver.hpp"

using namespace tcfuzz;
using namespace tcfuzz::dsl;
using namespace tcfuzz::solver;

namespace {

const char* kBroadcast =
    "{v_1: tensor, v_2: tensor} |= if ndim(v_1) = ndim(v_2) then forall i in [0, ndim(v_1) - 1] : "
    "shape(v_1, i) = shape(v_2, i) or shape(v_1, i) = 1 or shape(v_2, i) = 1 "
    "else if ndim(v_1) > ndim(v_2) then forall i in [0, ndim(v_2) - 1] : "
    "shape(v_1, ndim(v_1) - ndim(v_2) + i) = shape(v_2, i) or shape(v_1, ndim(v_1) - ndim(v_2) + i) = 1 or shape(v_2, i) = 1 "
    "else forall i in [0, ndim(v_1) - 1] : "
    "shape(v_2, ndim(v_2) - ndim(v_1) + i) = shape(v_1, i) or shape(v_2, ndim(v_2) - ndim(v_1) + i) = 1 or shape(v_1, i) = 1";

TypedRule rule(const std::string& text) { return type_check(parse_rule(text)); }

ApiSignature sig(std::vector<std::pair<std::string, std::string>> params) {
  ApiSignature s;
  s.api = "test.api";
  for (auto& [n, t] : params) s.params.push_back(Param{n, parse_type(t), true});
  return s;
}

ConcreteValue slot_value(const SymbolicLayout& L, const ScalarSlot& s, const std::vector<int64_t>& m) {
  auto at = [&](VarId v) { return m[static_cast<size_t>(v)]; };
  switch (s.kind) {
    case TypeKind::Tensor: {
      TensorV t;
      t.ndim = at(s.tensor.nd);
      for (int64_t i = 0; i < t.ndim; ++i) t.shape.push_back(at(s.tensor.dims[static_cast<size_t>(i)]));
      t.dtype = static_cast<int>(at(s.tensor.dtype));
      t.lo = static_cast<double>(at(s.tensor.lo)) / kScale;
      t.hi = static_cast<double>(at(s.tensor.hi)) / kScale;
      return t;
    }
    case TypeKind::Int: return at(s.var);
    case TypeKind::Float: return static_cast<double>(at(s.var)) / kScale;
    case TypeKind::Bool: return at(s.var) != 0;
    case TypeKind::Dtype: return DtypeV{static_cast<int>(at(s.var))};
    case TypeKind::Str: return *L.string_of(at(s.var));
    default: return ConcreteValue{};
  }
}

// Reads the model back as concrete values (range-only tensors).
Binding to_binding(const SymbolicLayout& L, const std::vector<int64_t>& m, const TypedRule& r,
                   const std::vector<std::string>& params) {
  Binding b;
  for (size_t i = 0; i < params.size(); ++i) {
    const ParamLayout& p = *L.param(params[i]);
    ConcreteValue v;
    if (p.present >= 0 && m[static_cast<size_t>(p.present)] == 0) {
      v = NoneV{};
    } else if (p.len >= 0) {
      std::vector<ConcreteValue> items;
      for (int64_t k = 0; k < m[static_cast<size_t>(p.len)]; ++k)
        items.push_back(slot_value(L, p.elems[static_cast<size_t>(k)], m));
      if (p.type->kind() == TypeKind::List) v = ListV{items};
      else v = TupleV{items};
    } else if (p.tag >= 0) {
      v = slot_value(L, p.arms[static_cast<size_t>(m[static_cast<size_t>(p.tag)])], m);
    } else {
      v = slot_value(L, p.value, m);
    }
    b[r.rule.bindings[i].name] = v;
  }
  return b;
}

size_t user_vars(const SymbolicLayout& L) {
  size_t n = 0;
  for (const auto& v : L.vars()) n += v.internal ? 0 : 1;
  return n;
}

std::vector<int64_t> default_model(const SymbolicLayout& L) {
  auto r = solve(L, {}, SolveOptions{});
  REQUIRE(r.status == SolveStatus::Sat);
  return r.model;
}

void set_tensor(const SymbolicLayout& L, std::vector<int64_t>& m, const std::string& p, const std::vector<int64_t>& shape) {
  const TensorSlots& t = L.param(p)->value.tensor;
  m[static_cast<size_t>(t.nd)] = static_cast<int64_t>(shape.size());
  for (size_t i = 0; i < t.dims.size(); ++i) m[static_cast<size_t>(t.dims[i])] = i < shape.size() ? shape[i] : 1;
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

bool brute_broadcastable(const std::vector<int64_t>& a, const std::vector<int64_t>& b) {
  size_t n = std::max(a.size(), b.size());
  for (size_t k = 0; k < n; ++k) {
    int64_t x = k < a.size() ? a[a.size() - 1 - k] : 1;
    int64_t y = k < b.size() ? b[b.size() - 1 - k] : 1;
    if (x != y && x != 1 && y != 1) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("layout variable counts and names", "[solver]") {
  auto L = build_layout(sig({{"input", "tensor"}}));
  CHECK(user_vars(L) == 9);
  CHECK(L.find("input.ndim") >= 0);
  CHECK(L.find("input.shape[4]") >= 0);
  CHECK(L.find("input.shape[5]") < 0);
  CHECK(L.find("input.dtype") >= 0);
  CHECK(L.find("input.min") >= 0);
  CHECK(L.find("input.max") >= 0);

  auto L2 = build_layout(sig({{"input", "tensor"}, {"dim", "int"}}));
  CHECK(user_vars(L2) == 10);
  CHECK(L2.find("dim.value") >= 0);

  CHECK_THROWS_AS(build_layout(sig({{"x", "list(list(int))"}})), UnsupportedParamType);
}

TEST_CASE("solve basics", "[solver]") {
  auto L = build_layout(sig({{"input", "tensor"}}));
  auto r1 = solve(L, {});
  REQUIRE(r1.status == SolveStatus::Sat);
  CHECK(r1.model.size() == L.vars().size());
  CHECK(L.satisfies_base(r1.model));
  auto r2 = solve(L, {});
  CHECK(r1.model == r2.model);

  VarId nd = L.find("input.ndim");
  auto one = solve(L, {Formula::var_eq(nd, 1)});
  REQUIRE(one.status == SolveStatus::Sat);
  CHECK(one.model[static_cast<size_t>(nd)] == 1);

  std::vector<Formula> contra = {Formula::var_eq(nd, 1), Formula::var_eq(nd, 2)};
  CHECK(solve(L, contra).status == SolveStatus::Unsat);
  CHECK(unsat_core(L, contra) == std::vector<size_t>{0, 1});

  std::vector<Formula> with_noise = {Formula::in_range(nd, 0, 3), Formula::var_eq(nd, 4)};
  CHECK(unsat_core(L, with_noise) == std::vector<size_t>{0, 1});
  std::vector<Formula> three = {Formula::var_eq(nd, 4), Formula::in_range(nd, 1, 5), Formula::var_eq(nd, 2)};
  CHECK(unsat_core(L, three) == std::vector<size_t>{0, 2});
}

TEST_CASE("different seeds vary models and all satisfy the base", "[solver]") {
  auto L = build_layout(sig({{"a", "tensor"}, {"b", "tensor"}, {"k", "int"}, {"f", "float"}}));
  std::set<std::vector<int64_t>> seen;
  for (uint64_t seed = 0; seed < 40; ++seed) {
    auto r = solve(L, {}, SolveOptions{seed});
    REQUIRE(r.status == SolveStatus::Sat);
    CHECK(L.satisfies_base(r.model));
    seen.insert(r.model);
  }
  CHECK(seen.size() >= 35);
}

TEST_CASE("byte budget and integral ranges hold in models", "[solver]") {
  auto L = build_layout(sig({{"x", "tensor"}}));
  const TensorSlots& t = L.param("x")->value.tensor;
  // Force a large tensor: every dim at least 20.
  std::vector<Formula> big = {Formula::var_eq(t.nd, 4)};
  for (int i = 0; i < 4; ++i) {
    LinExpr e = LinExpr::var(t.dims[static_cast<size_t>(i)], -1);
    e.constant = 20;
    big.push_back(Formula::le(e));
  }
  for (uint64_t seed = 0; seed < 10; ++seed) {
    auto r = solve(L, big, SolveOptions{seed});
    REQUIRE(r.status == SolveStatus::Sat);
    __int128 bytes = DtypeTable::standard().by_code(static_cast<int>(r.model[static_cast<size_t>(t.dtype)]))->byte_width;
    for (int i = 0; i < 4; ++i) bytes *= r.model[static_cast<size_t>(t.dims[static_cast<size_t>(i)])];
    CHECK(bytes <= (1 << 20));
  }
  // 40^4 elements exceed the budget at every dtype width.
  std::vector<Formula> huge = {Formula::var_eq(t.nd, 4)};
  for (int i = 0; i < 4; ++i) huge.push_back(Formula::var_eq(t.dims[static_cast<size_t>(i)], 40));
  CHECK(solve(L, huge).status == SolveStatus::Unsat);

  for (uint64_t seed = 0; seed < 30; ++seed) {
    auto r = solve(L, {Formula::var_eq(t.dtype, 2)}, SolveOptions{seed});
    REQUIRE(r.status == SolveStatus::Sat);
    CHECK(r.model[static_cast<size_t>(t.lo)] % kScale == 0);
    CHECK(r.model[static_cast<size_t>(t.hi)] % kScale == 0);
    auto rb = solve(L, {Formula::var_eq(t.dtype, 4)}, SolveOptions{seed});
    REQUIRE(rb.status == SolveStatus::Sat);
    int64_t lo = rb.model[static_cast<size_t>(t.lo)], hi = rb.model[static_cast<size_t>(t.hi)];
    CHECK((lo == 0 || lo == kScale));
    CHECK((hi == 0 || hi == kScale));
  }
}

TEST_CASE("dimension validity rule lowers to the two-sided range", "[solver][lower]") {
  auto L = build_layout(sig({{"input", "tensor"}, {"dim", "int"}}));
  auto r = rule("{v_1: tensor, v_2: int} |= (-1 * ndim(v_1) <= v_2) and (v_2 <= ndim(v_1) - 1)");
  auto low = lower_rule(r, {"input", "dim"}, L);
  CHECK_FALSE(low.approximate);
  auto m = default_model(L);
  VarId nd = L.find("input.ndim"), dim = L.find("dim.value");
  for (int64_t n = 0; n <= 5; ++n) {
    for (int64_t d = -8; d <= 8; ++d) {
      m[static_cast<size_t>(nd)] = n;
      m[static_cast<size_t>(dim)] = d;
      CHECK(low.formula.eval(m) == (-n <= d && d <= n - 1));
    }
  }
}

TEST_CASE("broadcast rule expansion matches right-aligned broadcasting", "[solver][lower]") {
  auto L = build_layout(sig({{"input", "tensor"}, {"other", "tensor"}}));
  auto r = rule(kBroadcast);
  auto low = lower_rule(r, {"input", "other"}, L);
  auto m = default_model(L);

  set_tensor(L, m, "input", {5, 3, 4, 1});
  set_tensor(L, m, "other", {3, 1, 1});
  CHECK(low.formula.eval(m));
  CHECK(check_rule(r, to_binding(L, m, r, {"input", "other"})).verdict == Verdict::Holds);

  std::vector<std::vector<int64_t>> shapes;
  shapes_upto(3, 3, shapes);
  int checked = 0;
  for (const auto& a : shapes) {
    for (const auto& b : shapes) {
      set_tensor(L, m, "input", a);
      set_tensor(L, m, "other", b);
      REQUIRE(low.formula.eval(m) == brute_broadcastable(a, b));
      ++checked;
    }
  }
  CHECK(checked == 1600);
}

TEST_CASE("quantifier expansion agrees with the evaluator for every ndim", "[solver][lower]") {
  const std::vector<std::string> rules = {
      "{v: tensor} |= forall i in [0, ndim(v) - 1] : shape(v, i) >= 2",
      "{v: tensor} |= exists i in [0, ndim(v) - 1] : shape(v, i) = 3",
      "{v: tensor} |= forall i in [1, ndim(v) - 1] : shape(v, i - 1) <= shape(v, i)",
      "{v: tensor} |= forall i in [0, ndim(v) - 1] : shape(v, -1 - i) != 2 or i = 0",
      "{v: tensor} |= exists i in [0, ndim(v) - 2] : forall j in [i + 1, ndim(v) - 1] : shape(v, j) = 1",
      "{v: tensor} |= forall i in [0, 7] : shape(v, i) > 1",
      "{v: tensor} |= exists i in [0, 7] : shape(v, i) = 2",
      "{v: tensor} |= if ndim(v) > 2 then shape(v, 2) = 1 else shape(v, 0) = 2",
      "{v: tensor} |= shape(v, -2) + shape(v, -1) = 4",
  };
  auto L = build_layout(sig({{"v", "tensor"}}));
  auto m = default_model(L);
  std::vector<std::vector<int64_t>> shapes;
  shapes_upto(5, 3, shapes);
  for (const auto& text : rules) {
    INFO(text);
    auto r = rule(text);
    auto low = lower_rule(r, {"v"}, L);
    for (const auto& s : shapes) {
      set_tensor(L, m, "v", s);
      bool holds = check_rule(r, to_binding(L, m, r, {"v"})).verdict == Verdict::Holds;
      REQUIRE(low.formula.eval(m) == holds);
    }
  }
}

TEST_CASE("nonlinear and unbounded rules are rejected", "[solver][lower]") {
  auto L = build_layout(sig({{"a", "tensor"}, {"b", "tensor"}, {"n", "int"}}));
  try {
    lower_rule(rule("{v_1: tensor, v_2: tensor} |= forall i in [0, ndim(v_1) - 1] : shape(v_1, i) * shape(v_2, i) = 4"),
               {"a", "b"}, L);
    FAIL("expected LoweringUnsupported");
  } catch (const LoweringUnsupported& e) {
    CHECK(e.kind() == LoweringUnsupported::Kind::NonlinearTerm);
  }
  try {
    lower_rule(rule("{v: tensor, k: int} |= ndim(v) / k = 1"), {"a", "n"}, L);
    FAIL("expected LoweringUnsupported");
  } catch (const LoweringUnsupported& e) {
    CHECK(e.kind() == LoweringUnsupported::Kind::NonlinearTerm);
  }
  try {
    lower_rule(rule("{k: int} |= forall i in [0, k] : i >= 0"), {"n"}, L);
    FAIL("expected LoweringUnsupported");
  } catch (const LoweringUnsupported& e) {
    CHECK(e.kind() == LoweringUnsupported::Kind::IndexUnbounded);
  }
  // Literal divisors are fine; a zero divisor makes the rule unsatisfiable.
  auto half = lower_rule(rule("{v: tensor} |= ndim(v) / 2 = 1"), {"a"}, L);
  auto s = solve(L, {half.formula});
  REQUIRE(s.status == SolveStatus::Sat);
  CHECK(s.model[static_cast<size_t>(L.find("a.ndim"))] == 2);
  auto zero = lower_rule(rule("{v: tensor} |= ndim(v) / 0 = 1"), {"a"}, L);
  CHECK(zero.formula.is_false());
}

TEST_CASE("min and max lowering", "[solver][lower]") {
  auto L = build_layout(sig({{"x", "tensor"}}));
  const TensorSlots& t = L.param("x")->value.tensor;

  auto ge = lower_rule(rule("{v: tensor} |= min(v) >= 0.5"), {"x"}, L);
  CHECK_FALSE(ge.approximate);
  auto lt = lower_rule(rule("{v: tensor} |= max(v) < 2"), {"x"}, L);
  CHECK_FALSE(lt.approximate);
  auto opp = lower_rule(rule("{v: tensor} |= min(v) <= 0"), {"x"}, L);
  CHECK(opp.approximate);
  auto ne = lower_rule(rule("{v: tensor} |= max(v) != 1"), {"x"}, L);
  CHECK(ne.approximate);

  for (uint64_t seed = 0; seed < 10; ++seed) {
    auto r = solve(L, {ge.formula, lt.formula}, SolveOptions{seed});
    REQUIRE(r.status == SolveStatus::Sat);
    CHECK(r.model[static_cast<size_t>(t.lo)] >= kScale / 2);
    CHECK(r.model[static_cast<size_t>(t.hi)] < 2 * kScale);
  }
  auto eq = lower_rule(rule("{v: tensor} |= max(v) = 3"), {"x"}, L);
  CHECK_FALSE(eq.approximate);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    auto r = solve(L, {eq.formula}, SolveOptions{seed});
    REQUIRE(r.status == SolveStatus::Sat);
    CHECK(r.model[static_cast<size_t>(t.lo)] == 3 * kScale);
    CHECK(r.model[static_cast<size_t>(t.hi)] == 3 * kScale);
  }
}

TEST_CASE("solved models satisfy the rules they were lowered from", "[solver][lower]") {
  struct Case {
    std::vector<std::pair<std::string, std::string>> params;
    std::string text;
  };
  const std::vector<Case> cases = {
      {{{"input", "tensor"}, {"other", "tensor"}}, kBroadcast},
      {{{"input", "tensor"}, {"dim", "int"}}, "{v_1: tensor, v_2: int} |= (-1 * ndim(v_1) <= v_2) and (v_2 <= ndim(v_1) - 1)"},
      {{{"input", "tensor"}, {"dim", "int"}}, "{v: tensor, d: int} |= ndim(v) >= 1 and shape(v, d) >= 2"},
      {{{"x", "tensor"}, {"g", "int"}},
       "{x: tensor, g: int} |= g >= 1 and ndim(x) >= 2 and g <= shape(x, 1) and dtype_(x) = 0"},
      {{{"t", "tuple(int)"}}, "{t: tuple(int)} |= t.len >= 2 and t[-1] = 3 and t[0] < t[-1]"},
      {{{"f", "float"}, {"x", "tensor"}}, "{f: float, x: tensor} |= f > 0.25 and f < 0.5 and min(x) >= f"},
      {{{"b", "bool"}, {"x", "tensor"}}, "{b: bool, x: tensor} |= if b then ndim(x) = 0 else ndim(x) = 3"},
      {{{"a", "tensor"}, {"b", "tensor"}},
       "{a: tensor, b: tensor} |= ndim(a) = 2 and ndim(b) = 2 and shape(a, 1) = shape(b, 0) and shape(a, 0) > 1"},
  };
  for (const auto& c : cases) {
    INFO(c.text);
    auto L = build_layout(sig(c.params));
    auto r = rule(c.text);
    std::vector<std::string> names;
    for (const auto& p : c.params) names.push_back(p.first);
    auto low = lower_rule(r, names, L);
    for (uint64_t seed = 0; seed < 15; ++seed) {
      auto res = solve(L, {low.formula}, SolveOptions{seed});
      REQUIRE(res.status == SolveStatus::Sat);
      CHECK(check_rule(r, to_binding(L, res.model, r, names)).verdict == Verdict::Holds);
    }
  }
}

TEST_CASE("optional and union parameters", "[solver][lower]") {
  ApiSignature s;
  s.api = "opt";
  s.params.push_back(Param{"x", parse_type("tensor"), false});
  s.params.push_back(Param{"u", parse_type("int|str"), true});
  Bounds b;
  b.string_domains["u"] = {"mean", "sum"};
  auto L = build_layout(s, b);
  auto r = rule("{v: tensor} |= ndim(v) = 2");
  auto low = lower_rule(r, {"x"}, L);
  for (uint64_t seed = 0; seed < 5; ++seed) {
    auto res = solve(L, {low.formula}, SolveOptions{seed});
    REQUIRE(res.status == SolveStatus::Sat);
    CHECK(res.model[static_cast<size_t>(L.find("x.present"))] == 1);
  }
  auto ru = rule("{u: int|str} |= u = \"sum\"");
  auto lu = lower_rule(ru, {"u"}, L);
  auto res = solve(L, {lu.formula});
  REQUIRE(res.status == SolveStatus::Sat);
  CHECK(check_rule(ru, to_binding(L, res.model, ru, {"u"})).verdict == Verdict::Holds);
  auto unknown = lower_rule(rule("{u: int|str} |= u = \"max\""), {"u"}, L);
  CHECK(solve(L, {unknown.formula}).status == SolveStatus::Unsat);
}

TEST_CASE("smtlib dump", "[solver]") {
  auto L = build_layout(sig({{"x", "tensor"}}));
  auto low = lower_rule(rule("{v: tensor} |= ndim(v) = 1"), {"x"}, L);
  std::string text = L.smtlib({low.formula});
  CHECK(text.find("(declare-fun |x.ndim| () Int)") != std::string::npos);
  CHECK(text.find("(check-sat)") != std::string::npos);
  CHECK(text.find(" -") == std::string::npos);
}
