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

#include "tcfuzz/rules/enumerator.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <set>

#include "tcfuzz/dsl/parser.hpp"

namespace tcfuzz::rules {

namespace {

using dsl::TypeKind;
using dsl::TypePtr;

struct Slot {
  TypePtr type;
  size_t limit = 0;  // parameters of this type
};

class Walk {
 public:
  Walk(const std::vector<Slot>& slots, std::mt19937_64& rng) : slots_(slots), rng_(rng) {}

  std::string rule(int depth) {
    std::string body = formula(depth);
    std::string out = "{";
    for (size_t i = 0; i < vars_.size(); ++i)
      out += (i ? ", " : "") + vars_[i].name + ": " + vars_[i].type->to_string();
    return out + "} |= " + body;
  }

 private:
  struct Var {
    std::string name;
    TypePtr type;
  };

  size_t pick(size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  // A variable of one of the given kinds, reusing a bound one when possible.
  std::optional<std::string> var(std::initializer_list<TypeKind> kinds, bool int_elems = false) {
    auto fits = [&](const TypePtr& t) {
      bool k = std::find(kinds.begin(), kinds.end(), t->kind()) != kinds.end();
      if (k && int_elems && t->is_sequence()) return t->elem()->kind() == TypeKind::Int;
      return k;
    };
    std::vector<size_t> bound, fresh;
    for (size_t i = 0; i < vars_.size(); ++i)
      if (fits(vars_[i].type)) bound.push_back(i);
    for (size_t s = 0; s < slots_.size(); ++s) {
      if (!fits(slots_[s].type)) continue;
      size_t used = 0;
      for (const auto& v : vars_) used += dsl::same_type(v.type, slots_[s].type);
      if (used < slots_[s].limit) fresh.push_back(s);
    }
    if (bound.empty() && fresh.empty()) return std::nullopt;
    if (!bound.empty() && (fresh.empty() || coin(0.6))) return vars_[bound[pick(bound.size())]].name;
    vars_.push_back(Var{"v_" + std::to_string(vars_.size() + 1), slots_[fresh[pick(fresh.size())]].type});
    return vars_.back().name;
  }

  std::string small_int() {
    static const int vals[] = {-1, 0, 1, 2, 3, 4};
    return std::to_string(vals[pick(6)]);
  }

  std::string index() {
    if (!bound_.empty() && coin(0.6)) return bound_.back();
    if (coin(0.3))
      if (auto v = var({TypeKind::Int})) return *v;
    return std::to_string(pick(3));
  }

  // Integer-valued leaf, or a literal when nothing else applies.
  std::string int_leaf(bool allow_literal = true) {
    for (int tries = 0; tries < 6; ++tries) {
      switch (pick(8)) {
        case 0:
        case 1:
          if (auto t = var({TypeKind::Tensor})) return "ndim(" + *t + ")";
          break;
        case 2:
        case 3:
          if (auto t = var({TypeKind::Tensor})) return "shape(" + *t + ", " + index() + ")";
          break;
        case 4:
          if (auto t = var({TypeKind::Tensor})) return "dtype_(" + *t + ")";
          break;
        case 5:
          if (auto v = var({TypeKind::Int})) return *v;
          break;
        case 6:
          if (auto v = var({TypeKind::List, TypeKind::Tuple})) return *v + ".len";
          break;
        case 7:
          if (auto v = var({TypeKind::List, TypeKind::Tuple}, true)) return *v + "[" + std::to_string(pick(2)) + "]";
          break;
      }
    }
    if (!bound_.empty()) return bound_.back();
    return allow_literal ? small_int() : "0";
  }

  std::string float_leaf() {
    for (int tries = 0; tries < 4; ++tries) {
      switch (pick(3)) {
        case 0:
          if (auto t = var({TypeKind::Tensor})) return "min(" + *t + ")";
          break;
        case 1:
          if (auto t = var({TypeKind::Tensor})) return "max(" + *t + ")";
          break;
        case 2:
          if (auto v = var({TypeKind::Float})) return *v;
          break;
      }
    }
    return int_leaf();
  }

  std::string leaf() { return coin(0.2) ? float_leaf() : int_leaf(); }

  std::string term(int budget) {
    if (budget <= 0 || coin(0.5)) return leaf();
    static const char* ops[] = {" + ", " - ", " * "};
    std::string rhs = coin(0.6) ? small_int() : leaf();
    return "(" + term(budget - 1) + ops[pick(3)] + rhs + ")";
  }

  std::string cmp(int budget) {
    static const char* ops[] = {" = ", " != ", " < ", " <= ", " > ", " >= "};
    if (coin(0.1))
      if (auto b = var({TypeKind::Bool})) return *b + (coin() ? " = true" : " = false");
    std::string lhs = term(budget);
    std::string rhs = coin(0.5) ? small_int() : term(budget);
    if (lhs == rhs) rhs = small_int();
    return "(" + lhs + ops[pick(6)] + rhs + ")";
  }

  std::string formula(int d) {
    if (d <= 1) return cmp(0);
    switch (pick(5)) {
      case 0:
        return cmp(d - 1);
      case 1:
        return "(" + formula(d - 1) + " and " + formula(d - 1) + ")";
      case 2:
        return "(" + formula(d - 1) + " or " + formula(d - 1) + ")";
      case 3: {
        std::string c = formula(d - 1);
        std::string t = formula(d - 1);
        return "(if " + c + " then " + t + " else " + formula(d - 1) + ")";
      }
      default: {
        auto t = var({TypeKind::Tensor});
        if (!t || bound_.size() >= 2) return cmp(d - 1);
        std::string i = bound_.empty() ? "i" : "j";
        bound_.push_back(i);
        std::string body = formula(d - 1);
        bound_.pop_back();
        return std::string("(") + (coin() ? "forall " : "exists ") + i + " in [0, ndim(" + *t + ") - 1] : " + body +
               ")";
      }
    }
  }

  const std::vector<Slot>& slots_;
  std::mt19937_64& rng_;
  std::vector<Var> vars_;
  std::vector<std::string> bound_;
};

int depth_of(const dsl::ExprPtr& e) {
  if (!e) return 0;
  return std::visit(
      [&](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, dsl::TensorCall> || std::is_same_v<T, dsl::TupleIndex>)
          return n.index ? depth_of(n.index) : 0;
        else if constexpr (std::is_same_v<T, dsl::Arith> || std::is_same_v<T, dsl::Cmp> ||
                           std::is_same_v<T, dsl::Logic>)
          return 1 + std::max(depth_of(n.lhs), depth_of(n.rhs));
        else if constexpr (std::is_same_v<T, dsl::Quant>)
          return 1 + std::max({depth_of(n.lo), depth_of(n.hi), depth_of(n.body)});
        else if constexpr (std::is_same_v<T, dsl::IfThen>)
          return 1 + std::max({depth_of(n.cond), depth_of(n.then_branch), depth_of(n.else_branch)});
        else
          return 0;
      },
      e->node);
}

}  // namespace

int rule_depth(const dsl::Rule& r) { return depth_of(r.body); }

std::vector<dsl::TypedRule> enumerate_rules(const ApiSignature& sig, const EnumeratorConfig& cfg) {
  if (cfg.max_depth < 1) throw std::invalid_argument("enumerator depth must be at least 1");
  std::vector<Slot> slots;
  for (const auto& p : sig.params) {
    TypeKind k = p.type->kind();
    if (k == TypeKind::Str || k == TypeKind::Union) continue;
    if (p.type->is_sequence() && !p.type->elem()->is_numeric()) continue;
    auto it = std::find_if(slots.begin(), slots.end(), [&](const Slot& s) { return dsl::same_type(s.type, p.type); });
    if (it == slots.end()) slots.push_back(Slot{p.type, 1});
    else ++it->limit;
  }
  std::vector<dsl::TypedRule> out;
  if (slots.empty()) return out;
  std::mt19937_64 rng(cfg.seed);
  std::set<std::string> seen;
  size_t attempts = 0, limit = 200 * cfg.count + 1000;
  while (out.size() < cfg.count && attempts++ < limit) {
    int depth = std::uniform_int_distribution<int>(1, cfg.max_depth)(rng);
    Walk w(slots, rng);
    std::string text = w.rule(depth);
    try {
      auto typed = dsl::type_check(dsl::parse_rule(text));
      if (rule_depth(typed.rule) > cfg.max_depth) continue;
      std::string canon = dsl::render_rule(typed.rule);
      if (!seen.insert(canon).second) continue;
      typed.rule.name = "enum_" + std::to_string(out.size() + 1);
      out.push_back(std::move(typed));
    } catch (const std::exception&) {
      // Ill-typed walks are discarded.
    }
  }
  return out;
}

}  // namespace tcfuzz::rules
