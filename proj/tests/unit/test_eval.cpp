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

#include <random>

#include "catch_amalgamated.hpp"
#include "tcfuzz/dsl/parser.hpp"
#include "tcfuzz/eval.hpp"

using namespace tcfuzz;
using namespace tcfuzz::dsl;

namespace {

const char* kBroadcast =
    "{v_1: tensor, v_2: tensor} |= if ndim(v_1) = ndim(v_2) then forall i in [0, ndim(v_1) - 1] : "
    "shape(v_1, i) = shape(v_2, i) or shape(v_1, i) = 1 or shape(v_2, i) = 1 "
    "else if ndim(v_1) > ndim(v_2) then forall i in [0, ndim(v_2) - 1] : "
    "shape(v_1, ndim(v_1) - ndim(v_2) + i) = shape(v_2, i) or shape(v_1, ndim(v_1) - ndim(v_2) + i) = 1 or shape(v_2, i) = 1 "
    "else forall i in [0, ndim(v_1) - 1] : "
    "shape(v_2, ndim(v_2) - ndim(v_1) + i) = shape(v_1, i) or shape(v_2, ndim(v_2) - ndim(v_1) + i) = 1 or shape(v_1, i) = 1";

TypedRule rule(const std::string& text) { return type_check(parse_rule(text)); }

ConcreteValue tensor(std::vector<int64_t> shape) {
  TensorV t;
  t.ndim = static_cast<int64_t>(shape.size());
  t.shape = std::move(shape);
  t.lo = 0;
  t.hi = 1;
  return t;
}

// Right-aligned pairwise dimension test.
bool brute_broadcastable(const std::vector<int64_t>& a, const std::vector<int64_t>& b) {
  size_t n = std::max(a.size(), b.size());
  for (size_t k = 0; k < n; ++k) {
    int64_t x = k < a.size() ? a[a.size() - 1 - k] : 1;
    int64_t y = k < b.size() ? b[b.size() - 1 - k] : 1;
    if (x != y && x != 1 && y != 1) return false;
  }
  return true;
}

void all_shapes(int max_nd, std::vector<std::vector<int64_t>>& out) {
  out.push_back({});
  std::vector<std::vector<int64_t>> frontier{{}};
  for (int nd = 1; nd <= max_nd; ++nd) {
    std::vector<std::vector<int64_t>> next;
    for (const auto& s : frontier)
      for (int64_t d = 1; d <= 3; ++d) {
        auto t = s;
        t.push_back(d);
        next.push_back(t);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = next;
  }
}

}  // namespace

TEST_CASE("dimension validity examples", "[eval]") {
  TypedRule r = rule("{v_1: tensor, v_2: int} |= (-1 * ndim(v_1) <= v_2) and (v_2 <= ndim(v_1) - 1)");
  REQUIRE(check_rule(r, Binding{{"v_1", tensor({2, 3, 4})}, {"v_2", int64_t{-3}}}).verdict == Verdict::Holds);
  REQUIRE(check_rule(r, Binding{{"v_1", tensor({2, 3, 4})}, {"v_2", int64_t{3}}}).verdict == Verdict::Fails);
  REQUIRE(check_rule(r, Binding{{"v_1", tensor({2, 3, 4})}, {"v_2", int64_t{-4}}}).verdict == Verdict::Fails);
}

TEST_CASE("quantifier edge cases", "[eval]") {
  TypedRule empty = rule("{v_1: tensor} |= forall i in [0, -1] : false");
  REQUIRE(check_rule(empty, Binding{{"v_1", tensor({})}}).verdict == Verdict::Holds);
  TypedRule ex = rule("{v_1: tensor} |= exists i in [0, -1] : true");
  REQUIRE(check_rule(ex, Binding{{"v_1", tensor({})}}).verdict == Verdict::Fails);
  TypedRule big = rule("{v_1: tensor} |= forall i in [0, 10000] : i >= 0");
  auto res = check_rule(big, Binding{{"v_1", tensor({})}});
  REQUIRE(res.verdict == Verdict::Errors);
  REQUIRE(res.error->kind() == EvalErrorKind::RangeTooLarge);
  TypedRule ok = rule("{v_1: tensor} |= forall i in [0, 9999] : i >= 0");
  REQUIRE(check_rule(ok, Binding{{"v_1", tensor({})}}).verdict == Verdict::Holds);
}

TEST_CASE("evaluation errors are distinct from failures", "[eval]") {
  TypedRule oob = rule("{v_1: tensor} |= shape(v_1, 5) >= 1");
  auto r = check_rule(oob, Binding{{"v_1", tensor({2, 2, 2})}});
  REQUIRE(r.verdict == Verdict::Errors);
  REQUIRE(r.error->kind() == EvalErrorKind::IndexOutOfRange);
  TypedRule div = rule("{a: int} |= 1 / a > 0");
  REQUIRE(check_rule(div, Binding{{"a", int64_t{0}}}).error->kind() == EvalErrorKind::DivisionByZero);
  TypedRule frac = rule("{v_1: tensor} |= shape(v_1, ndim(v_1) / 2) >= 1");
  REQUIRE(check_rule(frac, Binding{{"v_1", tensor({2, 2, 2})}}).error->kind() == EvalErrorKind::NonIntegralIndex);
  REQUIRE(check_rule(frac, Binding{{"v_1", tensor({2, 2})}}).verdict == Verdict::Holds);
  TypedRule t = rule("{v_1: tensor} |= true");
  REQUIRE(check_rule(t, Binding{{"v_1", tensor({7})}}).verdict == Verdict::Holds);
}

TEST_CASE("exact rational arithmetic", "[eval]") {
  TypedRule r = rule("{a: float} |= a * 3 = 1.5");
  REQUIRE(check_rule(r, Binding{{"a", 0.5}}).verdict == Verdict::Holds);
  TypedRule s = rule("{a: int} |= a / 3 * 3 = a");
  for (int64_t a = -10; a <= 10; ++a) REQUIRE(check_rule(s, Binding{{"a", a}}).verdict == Verdict::Holds);
  Binding b{{"a", int64_t{7}}};
  REQUIRE(eval_expr(s, s.rule.body->as<Cmp>()->lhs, b) == ConcreteValue(int64_t{7}));
}

TEST_CASE("tuple access and union values", "[eval]") {
  TypedRule r = rule("{x: list(int)} |= x.len = 3 and x[-1] = 9 and x[0] < x[1]");
  REQUIRE(check_rule(r, Binding{{"x", ListV{{int64_t{1}, int64_t{2}, int64_t{9}}}}}).verdict == Verdict::Holds);
  REQUIRE(check_rule(r, Binding{{"x", ListV{{int64_t{1}, int64_t{2}}}}}).verdict == Verdict::Fails);
  TypedRule oob = rule("{x: list(int)} |= x[3] = 1");
  REQUIRE(check_rule(oob, Binding{{"x", ListV{{int64_t{1}}}}}).error->kind() == EvalErrorKind::IndexOutOfRange);
  TypedRule u = rule("{x: int|str} |= x = 1 or x = \"sum\"");
  REQUIRE(check_rule(u, Binding{{"x", std::string("sum")}}).verdict == Verdict::Holds);
  REQUIRE(check_rule(u, Binding{{"x", int64_t{1}}}).verdict == Verdict::Holds);
  REQUIRE(check_rule(u, Binding{{"x", std::string("mean")}}).verdict == Verdict::Fails);
}

TEST_CASE("if without else in boolean position", "[eval]") {
  TypedRule r = rule("{a: int} |= if a > 0 then a < 10");
  REQUIRE(check_rule(r, Binding{{"a", int64_t{-5}}}).verdict == Verdict::Holds);
  REQUIRE(check_rule(r, Binding{{"a", int64_t{5}}}).verdict == Verdict::Holds);
  REQUIRE(check_rule(r, Binding{{"a", int64_t{50}}}).verdict == Verdict::Fails);
}

TEST_CASE("broadcast rule matches brute force", "[eval][broadcast]") {
  TypedRule r = rule(kBroadcast);
  REQUIRE(check_rule(r, Binding{{"v_1", tensor({5, 3, 4, 1})}, {"v_2", tensor({3, 1, 1})}}).verdict == Verdict::Holds);
  REQUIRE(check_rule(r, Binding{{"v_1", tensor({3, 4})}, {"v_2", tensor({2, 4})}}).verdict == Verdict::Fails);
  std::vector<std::vector<int64_t>> shapes;
  all_shapes(3, shapes);
  size_t pairs = 0;
  for (const auto& a : shapes)
    for (const auto& b : shapes) {
      auto res = check_rule(r, Binding{{"v_1", tensor(a)}, {"v_2", tensor(b)}});
      REQUIRE(res.verdict != Verdict::Errors);
      REQUIRE((res.verdict == Verdict::Holds) == brute_broadcastable(a, b));
      ++pairs;
    }
  REQUIRE(pairs >= 1500);
}

TEST_CASE("quantifiers equal explicit folds", "[eval][property]") {
  std::mt19937_64 rng(3);
  TypedRule fa = rule("{v: tensor, lo: int, hi: int} |= forall i in [lo, hi] : shape(v, i) > 1");
  TypedRule ex = rule("{v: tensor, lo: int, hi: int} |= exists i in [lo, hi] : shape(v, i) <= 1");
  for (int iter = 0; iter < 500; ++iter) {
    std::vector<int64_t> shape;
    size_t nd = rng() % 6;
    for (size_t i = 0; i < nd; ++i) shape.push_back(static_cast<int64_t>(rng() % 3));
    int64_t lo = static_cast<int64_t>(rng() % (nd + 1)), hi = static_cast<int64_t>(rng() % (nd + 1)) - 1;
    Binding b{{"v", tensor(shape)}, {"lo", lo}, {"hi", hi}};
    bool fold = true;
    for (int64_t i = lo; i <= hi; ++i) fold = fold && shape[static_cast<size_t>(i)] > 1;
    auto rf = check_rule(fa, b);
    auto re = check_rule(ex, b);
    REQUIRE(rf.verdict != Verdict::Errors);
    REQUIRE((rf.verdict == Verdict::Holds) == fold);
    REQUIRE((re.verdict == Verdict::Holds) == !fold);
  }
}
