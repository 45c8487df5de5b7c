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

#include "catch_amalgamated.hpp"
#include "tcfuzz/dsl/parser.hpp"
#include "tcfuzz/dsl/ruleset.hpp"
#include "tcfuzz/dsl/typecheck.hpp"

using namespace tcfuzz::dsl;

namespace {

const char* kDimValidity = "{v_1: tensor, v_2: int} |= (-1 * ndim(v_1) <= v_2) and (v_2 <= ndim(v_1) - 1)";
const char* kBroadcast =
    "{v_1: tensor, v_2: tensor} |= if ndim(v_1) = ndim(v_2) then forall i in [0, ndim(v_1) - 1] : "
    "shape(v_1, i) = shape(v_2, i) or shape(v_1, i) = 1 or shape(v_2, i) = 1 "
    "else if ndim(v_1) > ndim(v_2) then forall i in [0, ndim(v_2) - 1] : "
    "shape(v_1, ndim(v_1) - ndim(v_2) + i) = shape(v_2, i) or shape(v_1, ndim(v_1) - ndim(v_2) + i) = 1 or shape(v_2, i) = 1 "
    "else forall i in [0, ndim(v_1) - 1] : "
    "shape(v_2, ndim(v_2) - ndim(v_1) + i) = shape(v_1, i) or shape(v_2, ndim(v_2) - ndim(v_1) + i) = 1 or shape(v_1, i) = 1";

void require_round_trip(const std::string& text) {
  Rule r = parse_rule(text);
  std::string once = render_rule(r);
  Rule again = parse_rule(once);
  INFO(once);
  REQUIRE(rule_equal(r, again));
  REQUIRE(render_rule(again) == once);
}

TypeErrorKind first_error(const std::string& text) {
  Rule r = parse_rule(text);
  try {
    type_check(r);
  } catch (const TypeErrorReport& rep) {
    REQUIRE_FALSE(rep.errors().empty());
    return rep.errors().front().kind;
  }
  FAIL("expected a type error for " << text);
  return TypeErrorKind::RuleNotBool;
}

}  // namespace

TEST_CASE("dimension validity rule parses", "[dsl][parse]") {
  Rule r = parse_rule(kDimValidity);
  REQUIRE(r.bindings.size() == 2);
  REQUIRE(r.bindings[0].name == "v_1");
  REQUIRE(r.bindings[0].type->kind() == TypeKind::Tensor);
  REQUIRE(r.bindings[1].type->kind() == TypeKind::Int);
  auto* root = r.body->as<Logic>();
  REQUIRE(root != nullptr);
  REQUIRE(root->op == LogicOp::And);
  auto fv = free_variables(r);
  REQUIRE(fv.size() == 2);
  REQUIRE(fv[0].first == "v_1");
  REQUIRE(fv[1].first == "v_2");
}

TEST_CASE("trivial rule and arity errors", "[dsl][parse]") {
  Rule t = parse_rule("{v_1: tensor} |= true");
  REQUIRE(t.body->as<Literal>() != nullptr);
  REQUIRE(free_variables(t).size() == 1);
  REQUIRE_THROWS_AS(parse_rule("{v_1: tensor} |= shape(v_1)"), ParseError);
  REQUIRE_THROWS_AS(parse_rule("{v_1: tensor} |= ndim(v_1, 0) = 1"), ParseError);
}

TEST_CASE("parse errors carry position and token", "[dsl][parse]") {
  std::string text = "{v_1: tensor} |= ndim(v_1) = = 2";
  try {
    parse_rule(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.line() == 1);
    REQUIRE(e.column() == 30);
    REQUIRE(e.token() == "=");
    REQUIRE(e.span().end <= text.size());
  }
  try {
    parse_rule("{v_1: tensor} |=\n  ndim(v_1) >");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.line() == 2);
    REQUIRE(e.token() == "<end of input>");
  }
}

TEST_CASE("parse error spans stay within the input", "[dsl][parse]") {
  const char* bad[] = {"", "{", "{v_1: tensor", "{v_1: tensor} |=", "{v_1: tensor} |= (", "{v_1: tensor} |= \"abc",
                       "{v_1: tensor} |= forall i in [0, 1 : true", "{v_1: foo} |= true", "{v_1: tensor} |= 1 $ 2",
                       "{v_1: tensor} |= ndim(v_1) > 1 ) "};
  for (const char* text : bad) {
    std::string s(text);
    try {
      parse_rule(s);
      FAIL("accepted " << s);
    } catch (const ParseError& e) {
      REQUIRE(e.span().begin <= s.size());
      REQUIRE(e.span().end <= s.size());
    }
  }
}

TEST_CASE("binding errors", "[dsl][parse]") {
  REQUIRE_THROWS_AS(parse_rule("{v_1: tensor} |= ndim(v_2) = 1"), BindingError);
  REQUIRE_THROWS_AS(parse_rule("{v_1: tensor, v_1: int} |= ndim(v_1) = 1"), BindingError);
  try {
    parse_rule("{v_1: tensor} |= forall v_1 in [0, 1] : true");
    FAIL("shadowing accepted");
  } catch (const BindingError& e) {
    REQUIRE(e.kind() == BindingError::Kind::Shadowing);
  }
  REQUIRE_THROWS_AS(parse_rule("{v_1: tensor} |= forall i in [0, 1] : forall i in [0, 1] : true"), BindingError);
}

TEST_CASE("unicode operators are accepted and rendered as ascii", "[dsl][parse]") {
  Rule r = parse_rule("{v_1: tensor, v_2: int} \xE2\x8A\xA8 \xE2\x88\x80 i \xE2\x88\x88 [0, 2] : v_2 \xE2\x89\xA4 ndim(v_1) \xE2\x88\xA7 v_2 \xE2\x89\xA0 3");
  REQUIRE(render_rule(r) == "{v_1: tensor, v_2: int} |= forall i in [0, 2] : v_2 <= ndim(v_1) and v_2 != 3");
}

TEST_CASE("rendering is canonical and round trips", "[dsl][render]") {
  require_round_trip(kDimValidity);
  require_round_trip(kBroadcast);
  REQUIRE(render_rule(parse_rule(kDimValidity)) ==
          "{v_1: tensor, v_2: int} |= -1 * ndim(v_1) <= v_2 and v_2 <= ndim(v_1) - 1");
  Rule fa = parse_rule("{v_1: tensor, v_2: tensor} |= forall i in [0, ndim(v_1)-1]: shape(v_1,i)=shape(v_2,i)");
  REQUIRE(render_expr(fa.body) == "forall i in [0, ndim(v_1) - 1] : shape(v_1, i) = shape(v_2, i)");
  Rule noelse = parse_rule("{a: int} |= if a > 0 then a < 10");
  REQUIRE(render_expr(noelse.body) == "if a > 0 then a < 10");
  REQUIRE(noelse.body->as<IfThen>()->else_branch == nullptr);

  require_round_trip("{a: int} |= if a > 0 then (if a > 1 then true) else false");
  require_round_trip("{a: int} |= if a > 0 then if a > 1 then true else false");
  require_round_trip("{a: int, b: int} |= a - (b - 1) > a - b - 1");
  require_round_trip("{a: int, b: int} |= a / (b * 2) = a / b * 2");
  require_round_trip("{a: int} |= (a > 1 or a < 0) and a != 5");
  require_round_trip("{a: int} |= a > 1 or (a < 0 and a != -5)");
  require_round_trip("{a: int} |= a > 1 and (a < 0 and a != -5)");
  require_round_trip("{a: int} |= (exists i in [0, a] : i = 3) and a > 2");
  require_round_trip("{a: int} |= a > 2 and exists i in [0, a] : i = 3 or i = 4");
  require_round_trip("{a: int} |= a - -1 >= 2.50");
  require_round_trip("{a: float} |= a * 1.0 >= 1e-6");
  require_round_trip("{s: str} |= s = \"mean\" or s = \"a\\\"b\"");
  require_round_trip("{x: list(int)} |= x.len > 0 and x[-1] >= x[0]");
  require_round_trip("{x: int|str} |= x = 1 or x = \"a\"");
  require_round_trip("{x: tuple(tensor), t: tensor} |= x.len = ndim(t)");
  require_round_trip("{a: int} |= (if a > 0 then 1 else 2) + 3 = a");
  require_round_trip("{a: bool, b: bool} |= (a = b) = true");
}

TEST_CASE("typing judgments", "[dsl][type]") {
  TypedRule tr = type_check(parse_rule("{v_1: tensor, v_3: list(int)} |= ndim(v_1) = v_3.len"));
  const auto* cmp = tr.rule.body->as<Cmp>();
  REQUIRE(tr.type_of(cmp->lhs)->kind() == TypeKind::Int);
  REQUIRE(tr.type_of(cmp->rhs)->kind() == TypeKind::Int);
  REQUIRE(tr.type_of(tr.rule.body)->kind() == TypeKind::Bool);
  REQUIRE(first_error("{v_2: int} |= ndim(v_2) = 1") == TypeErrorKind::TensorFnOnNonTensor);

  TypedRule mm = type_check(parse_rule("{v: tensor} |= min(v) >= 0 and max(v) <= 1 and dtype_(v) = 0"));
  REQUIRE(mm.lints.empty());
  TypedRule lint = type_check(parse_rule("{d: dtype} |= d < 3"));
  REQUIRE(lint.lints.size() == 1);
}

TEST_CASE("negative typing suite", "[dsl][type]") {
  struct Case {
    const char* text;
    TypeErrorKind kind;
  };
  const Case cases[] = {
      {"{v_1: tensor} |= v_1 > 0", TypeErrorKind::NotPrimitive},
      {"{v_1: tensor|int} |= v_1 = 1", TypeErrorKind::BadUnion},
      {"{v_1: int} |= v_1[0] = 1", TypeErrorKind::NotIndexable},
      {"{v_1: list(int)} |= v_1[true] = 1", TypeErrorKind::IndexNotInt},
      {"{v_1: int} |= v_1.len = 1", TypeErrorKind::NoLength},
      {"{v_2: int} |= ndim(v_2) = 1", TypeErrorKind::TensorFnOnNonTensor},
      {"{v_1: float} |= shape(v_1, 0) = 1", TypeErrorKind::TensorFnOnNonTensor},
      {"{v_1: tensor} |= shape(v_1, 0.5) = 1", TypeErrorKind::IndexNotInt},
      {"{v_1: tensor} |= ndim(v_1) + true > 1", TypeErrorKind::ArithOperand},
      {"{v_1: tensor} |= ndim(v_1) and true", TypeErrorKind::LogicOperand},
      {"{v_1: tensor} |= forall i in [0, true] : shape(v_1, i) > 0", TypeErrorKind::BoundNotInt},
      {"{v_1: tensor} |= if ndim(v_1) then true else false", TypeErrorKind::CondNotBool},
      {"{v_1: tensor} |= ndim(v_1)", TypeErrorKind::RuleNotBool},
      {"{s: str} |= s < \"a\"", TypeErrorKind::StringMisuse},
      {"{a: int} |= (if a > 0 then 1) = 1", TypeErrorKind::IfWithoutElseValue},
      {"{a: int, s: str} |= (if a > 0 then 1 else s) = 1", TypeErrorKind::BranchMismatch},
      {"{x: list(list(int))} |= x.len = 1", TypeErrorKind::NestedSequence},
      {"{v_1: tensor} |= forall i in [0, 2] : ndim(v_1)", TypeErrorKind::BodyNotBool},
  };
  for (const auto& c : cases) {
    INFO(c.text);
    REQUIRE(first_error(c.text) == c.kind);
  }
}

TEST_CASE("type errors are all reported", "[dsl][type]") {
  Rule r = parse_rule("{v_1: int, v_2: int} |= ndim(v_1) = 1 and shape(v_2, 0) = 2");
  try {
    type_check(r);
    FAIL("expected errors");
  } catch (const TypeErrorReport& rep) {
    REQUIRE(rep.errors().size() == 2);
    REQUIRE(rep.errors()[0].span.begin < rep.errors()[1].span.begin);
  }
}

TEST_CASE("ruleset text format", "[dsl][ruleset]") {
  std::string text =
      "# header comment\n"
      "\n"
      "# name: a\n# desc: first\n{v_1: tensor} |= ndim(v_1) >= 0\n\n"
      "# name: b\n{v_1: tensor} |= ndim(v_1) >\n\n"
      "# name: c\n{v_1: int} |= ndim(v_1) = 1\n\n"
      "# name: d\n{v_1: tensor} |= true\n";
  RulesetLoad load = parse_ruleset(text, "x.rules");
  REQUIRE(load.rules.size() == 2);
  REQUIRE(load.rules[0].rule.name() == "a");
  REQUIRE(load.rules[0].rule.rule.description == "first");
  REQUIRE(load.rules[0].line == 5);
  REQUIRE(load.rules[1].rule.name() == "d");
  REQUIRE(load.issues.size() == 2);
  REQUIRE(load.issues[0].line == 8);
  REQUIRE(load.issues[1].line == 11);
  REQUIRE(load.issues[0].to_string().rfind("x.rules:8:", 0) == 0);
  REQUIRE(parse_ruleset("").rules.empty());

  std::vector<Rule> rules{load.rules[0].rule.rule, load.rules[1].rule.rule};
  RulesetLoad again = parse_ruleset(format_ruleset(rules));
  REQUIRE(again.issues.empty());
  REQUIRE(again.rules.size() == 2);
  REQUIRE(rule_equal(again.rules[0].rule.rule, rules[0]));
  REQUIRE(again.rules[0].rule.name() == "a");
}

TEST_CASE("used variables detect redundant bindings", "[dsl]") {
  Rule r = parse_rule("{v_1: tensor, v_2: int} |= ndim(v_1) > 0");
  REQUIRE(used_variables(r) == std::vector<std::string>{"v_1"});
  Rule q = parse_rule("{v_1: tensor} |= forall i in [0, 1] : i >= 0");
  REQUIRE(used_variables(q).empty());
}
