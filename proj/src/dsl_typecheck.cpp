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

#include "tcfuzz/dsl/typecheck.hpp"

#include <map>

namespace tcfuzz::dsl {

const char* type_error_kind_name(TypeErrorKind k) {
  switch (k) {
    case TypeErrorKind::NotPrimitive: return "NotPrimitive";
    case TypeErrorKind::BadUnion: return "BadUnion";
    case TypeErrorKind::NestedSequence: return "NestedSequence";
    case TypeErrorKind::NotIndexable: return "NotIndexable";
    case TypeErrorKind::IndexNotInt: return "IndexNotInt";
    case TypeErrorKind::NoLength: return "NoLength";
    case TypeErrorKind::TensorFnOnNonTensor: return "TensorFnOnNonTensor";
    case TypeErrorKind::ArithOperand: return "ArithOperand";
    case TypeErrorKind::CmpOperand: return "CmpOperand";
    case TypeErrorKind::StringMisuse: return "StringMisuse";
    case TypeErrorKind::LogicOperand: return "LogicOperand";
    case TypeErrorKind::BoundNotInt: return "BoundNotInt";
    case TypeErrorKind::BodyNotBool: return "BodyNotBool";
    case TypeErrorKind::CondNotBool: return "CondNotBool";
    case TypeErrorKind::BranchMismatch: return "BranchMismatch";
    case TypeErrorKind::IfWithoutElseValue: return "IfWithoutElseValue";
    case TypeErrorKind::RuleNotBool: return "RuleNotBool";
  }
  return "?";
}

namespace {
std::string summarize(const std::vector<TypeError>& errs) {
  std::string s = "type errors:";
  for (const auto& e : errs) {
    s += " [" + std::string(type_error_kind_name(e.kind)) + " @" + std::to_string(e.span.begin) + ": " +
         e.message + "]";
  }
  return s;
}
}  // namespace

TypeErrorReport::TypeErrorReport(std::vector<TypeError> errors)
    : std::runtime_error(summarize(errors)), errors_(std::move(errors)) {}

TypePtr TypedRule::type_of(const ExprPtr& e) const {
  auto it = types.find(e.get());
  return it == types.end() ? nullptr : it->second;
}

std::vector<TypeError> check_declared_type(const TypePtr& t, SourceSpan span) {
  std::vector<TypeError> errs;
  if (t->kind() == TypeKind::Union) {
    for (const auto& a : t->arms()) {
      if (!a->is_primitive()) {
        errs.push_back({TypeErrorKind::BadUnion, span, "union arm '" + a->to_string() + "' is not primitive"});
      }
    }
  } else if (t->is_sequence()) {
    const TypePtr& e = t->elem();
    if (e->is_sequence()) {
      errs.push_back({TypeErrorKind::NestedSequence, span, "nested sequence type '" + t->to_string() + "'"});
    } else if (e->kind() == TypeKind::Union) {
      errs.push_back({TypeErrorKind::BadUnion, span, "sequence of union '" + t->to_string() + "'"});
    }
  }
  return errs;
}

namespace {

bool is_int(const TypePtr& t) { return t && t->kind() == TypeKind::Int; }
bool is_bool(const TypePtr& t) { return t && t->kind() == TypeKind::Bool; }

bool has_arm(const TypePtr& t, TypeKind k) {
  if (!t) return false;
  if (t->kind() == k) return true;
  if (t->kind() != TypeKind::Union) return false;
  for (const auto& a : t->arms())
    if (a->kind() == k) return true;
  return false;
}

// Int or float valued (directly or via some union arm).
bool arith_ok(const TypePtr& t) {
  if (!t) return false;
  if (t->kind() == TypeKind::Int || t->kind() == TypeKind::Float) return true;
  if (t->kind() == TypeKind::Union) return has_arm(t, TypeKind::Int) || has_arm(t, TypeKind::Float);
  return false;
}

bool comparable_number(const TypePtr& t) {
  return arith_ok(t) || has_arm(t, TypeKind::Dtype);
}

class Checker {
 public:
  explicit Checker(const Rule& r) : rule_(r) {
    for (const auto& b : r.bindings) env_[b.name] = b.type;
  }

  TypedRule run() {
    for (const auto& b : rule_.bindings) {
      auto errs = check_declared_type(b.type, b.span);
      errors_.insert(errors_.end(), errs.begin(), errs.end());
    }
    TypePtr t = check(rule_.body);
    if (t && !is_bool(t)) error(TypeErrorKind::RuleNotBool, rule_.body, "rule body must be bool, found " + t->to_string());
    if (!errors_.empty()) throw TypeErrorReport(std::move(errors_));
    TypedRule tr;
    tr.rule = rule_;
    tr.types = std::move(types_);
    tr.lints = std::move(lints_);
    return tr;
  }

 private:
  void error(TypeErrorKind k, const ExprPtr& at, std::string msg) { errors_.push_back({k, at->span, std::move(msg)}); }

  TypePtr lookup(const std::string& name) const {
    auto it = env_.find(name);
    return it == env_.end() ? nullptr : it->second;
  }

  TypePtr record(const ExprPtr& e, TypePtr t) {
    if (t) types_[e.get()] = t;
    return t;
  }

  TypePtr check(const ExprPtr& e) { return record(e, std::visit([&](const auto& n) { return visit(e, n); }, e->node)); }

  TypePtr visit(const ExprPtr&, const Literal& l) {
    if (std::holds_alternative<bool>(l.value)) return TypeExpr::prim(TypeKind::Bool);
    if (std::holds_alternative<std::string>(l.value)) return TypeExpr::prim(TypeKind::Str);
    const Number& n = std::get<Number>(l.value);
    return TypeExpr::prim((l.float_syntax || !n.is_integer()) ? TypeKind::Float : TypeKind::Int);
  }

  TypePtr visit(const ExprPtr& e, const VarRef& v) {
    TypePtr t = lookup(v.name);
    if (!t) return nullptr;
    if (t->is_primitive()) return t;
    if (t->kind() == TypeKind::Union) {
      for (const auto& a : t->arms())
        if (!a->is_primitive()) return nullptr;  // reported on the binding
      return t;
    }
    error(TypeErrorKind::NotPrimitive, e, "variable '" + v.name + "' of type " + t->to_string() + " used as a value");
    return nullptr;
  }

  TypePtr visit(const ExprPtr& e, const TensorCall& c) {
    TypePtr t = lookup(c.target);
    bool ok = true;
    if (!t || t->kind() != TypeKind::Tensor) {
      error(TypeErrorKind::TensorFnOnNonTensor, e,
            std::string(tensor_fn_name(c.fn)) + " applied to '" + c.target + "' of type " +
                (t ? t->to_string() : "?"));
      ok = false;
    }
    if (c.index) {
      TypePtr it = check(c.index);
      if (it && !is_int(it)) {
        error(TypeErrorKind::IndexNotInt, c.index, "shape index must be int, found " + it->to_string());
        ok = false;
      }
    }
    return ok ? TypeExpr::prim(TypeKind::Int) : nullptr;
  }

  TypePtr visit(const ExprPtr& e, const TupleIndex& ti) {
    TypePtr t = lookup(ti.target);
    TypePtr it = check(ti.index);
    bool ok = true;
    if (!t || !t->is_sequence()) {
      error(TypeErrorKind::NotIndexable, e, "'" + ti.target + "' of type " + (t ? t->to_string() : "?") + " is not indexable");
      ok = false;
    }
    if (it && !is_int(it)) {
      error(TypeErrorKind::IndexNotInt, ti.index, "index must be int, found " + it->to_string());
      ok = false;
    }
    if (!ok) return nullptr;
    if (!t->elem()->is_primitive()) {
      error(TypeErrorKind::NotPrimitive, e, "element of '" + ti.target + "' has type " + t->elem()->to_string());
      return nullptr;
    }
    return t->elem();
  }

  TypePtr visit(const ExprPtr& e, const TupleLen& tl) {
    TypePtr t = lookup(tl.target);
    if (!t || !t->is_sequence()) {
      error(TypeErrorKind::NoLength, e, "'" + tl.target + "' of type " + (t ? t->to_string() : "?") + " has no length");
      return nullptr;
    }
    return TypeExpr::prim(TypeKind::Int);
  }

  TypePtr visit(const ExprPtr&, const Arith& a) {
    TypePtr l = check(a.lhs);
    TypePtr r = check(a.rhs);
    bool ok = true;
    if (l && !arith_ok(l)) {
      error(TypeErrorKind::ArithOperand, a.lhs, std::string("operand of '") + arith_op_text(a.op) + "' has type " + l->to_string());
      ok = false;
    }
    if (r && !arith_ok(r)) {
      error(TypeErrorKind::ArithOperand, a.rhs, std::string("operand of '") + arith_op_text(a.op) + "' has type " + r->to_string());
      ok = false;
    }
    if (!ok || !l || !r) return nullptr;
    return TypeExpr::prim(is_int(l) && is_int(r) ? TypeKind::Int : TypeKind::Float);
  }

  TypePtr visit(const ExprPtr& e, const Cmp& c) {
    TypePtr l = check(c.lhs);
    TypePtr r = check(c.rhs);
    if (!l || !r) return nullptr;
    bool l_str = has_arm(l, TypeKind::Str), r_str = has_arm(r, TypeKind::Str);
    bool eq_op = c.op == CmpOp::Eq || c.op == CmpOp::Ne;
    if (l->kind() == TypeKind::Str || r->kind() == TypeKind::Str) {
      if (!eq_op || !l_str || !r_str) {
        error(TypeErrorKind::StringMisuse, e, "strings support only '=' and '!=' against str values");
        return nullptr;
      }
      return TypeExpr::prim(TypeKind::Bool);
    }
    if (is_bool(l) || is_bool(r)) {
      if (!(is_bool(l) && is_bool(r)) || !eq_op) {
        error(TypeErrorKind::CmpOperand, e, "bool compares only with bool via '=' or '!='");
        return nullptr;
      }
      return TypeExpr::prim(TypeKind::Bool);
    }
    if (!comparable_number(l) || !comparable_number(r)) {
      error(TypeErrorKind::CmpOperand, e, "cannot compare " + l->to_string() + " with " + r->to_string());
      return nullptr;
    }
    if (!eq_op && (l->kind() == TypeKind::Dtype || r->kind() == TypeKind::Dtype)) {
      lints_.push_back({e->span, "ordering comparison on a dtype value"});
    }
    return TypeExpr::prim(TypeKind::Bool);
  }

  TypePtr visit(const ExprPtr&, const Logic& lg) {
    TypePtr l = check(lg.lhs);
    TypePtr r = check(lg.rhs);
    bool ok = true;
    const char* op = lg.op == LogicOp::And ? "and" : "or";
    if (l && !is_bool(l)) {
      error(TypeErrorKind::LogicOperand, lg.lhs, std::string("operand of '") + op + "' has type " + l->to_string());
      ok = false;
    }
    if (r && !is_bool(r)) {
      error(TypeErrorKind::LogicOperand, lg.rhs, std::string("operand of '") + op + "' has type " + r->to_string());
      ok = false;
    }
    return ok && l && r ? TypeExpr::prim(TypeKind::Bool) : nullptr;
  }

  TypePtr visit(const ExprPtr&, const Quant& q) {
    TypePtr lo = check(q.lo);
    TypePtr hi = check(q.hi);
    bool ok = lo && hi;
    if (lo && !is_int(lo)) {
      error(TypeErrorKind::BoundNotInt, q.lo, "quantifier bound must be int, found " + lo->to_string());
      ok = false;
    }
    if (hi && !is_int(hi)) {
      error(TypeErrorKind::BoundNotInt, q.hi, "quantifier bound must be int, found " + hi->to_string());
      ok = false;
    }
    auto saved = env_.find(q.bound) != env_.end() ? env_[q.bound] : nullptr;
    env_[q.bound] = TypeExpr::prim(TypeKind::Int);
    TypePtr body = check(q.body);
    if (saved) env_[q.bound] = saved; else env_.erase(q.bound);
    if (body && !is_bool(body)) {
      error(TypeErrorKind::BodyNotBool, q.body, "quantifier body must be bool, found " + body->to_string());
      ok = false;
    }
    return ok && body ? TypeExpr::prim(TypeKind::Bool) : nullptr;
  }

  TypePtr visit(const ExprPtr& e, const IfThen& it) {
    TypePtr c = check(it.cond);
    TypePtr t = check(it.then_branch);
    TypePtr f = it.else_branch ? check(it.else_branch) : nullptr;
    bool ok = c && t;
    if (c && !is_bool(c)) {
      error(TypeErrorKind::CondNotBool, it.cond, "condition must be bool, found " + c->to_string());
      ok = false;
    }
    if (!it.else_branch) {
      if (t && !is_bool(t)) {
        error(TypeErrorKind::IfWithoutElseValue, e, "'if' without 'else' must be bool, found " + t->to_string());
        return nullptr;
      }
      return ok ? TypeExpr::prim(TypeKind::Bool) : nullptr;
    }
    if (!ok || !f) return nullptr;
    if (is_bool(t) && is_bool(f)) return t;
    if (arith_ok(t) && arith_ok(f) && t->kind() != TypeKind::Union && f->kind() != TypeKind::Union)
      return TypeExpr::prim(is_int(t) && is_int(f) ? TypeKind::Int : TypeKind::Float);
    if (same_type(t, f) && t->is_primitive()) return t;
    error(TypeErrorKind::BranchMismatch, e, "branches have types " + t->to_string() + " and " + f->to_string());
    return nullptr;
  }

  const Rule& rule_;
  std::map<std::string, TypePtr> env_;
  std::unordered_map<const Expr*, TypePtr> types_;
  std::vector<TypeError> errors_;
  std::vector<Lint> lints_;
};

}  // namespace

TypedRule type_check(const Rule& rule) { return Checker(rule).run(); }

}  // namespace tcfuzz::dsl
