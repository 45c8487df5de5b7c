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

#include "tcfuzz/dsl/ast.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace tcfuzz::dsl {

TypePtr TypeExpr::prim(TypeKind k) {
  auto t = std::make_shared<TypeExpr>();
  t->kind_ = k;
  return t;
}

TypePtr TypeExpr::list(TypePtr elem) {
  auto t = std::make_shared<TypeExpr>();
  t->kind_ = TypeKind::List;
  t->elem_ = std::move(elem);
  return t;
}

TypePtr TypeExpr::tuple(TypePtr elem) {
  auto t = std::make_shared<TypeExpr>();
  t->kind_ = TypeKind::Tuple;
  t->elem_ = std::move(elem);
  return t;
}

TypePtr TypeExpr::union_of(std::vector<TypePtr> arms) {
  auto t = std::make_shared<TypeExpr>();
  t->kind_ = TypeKind::Union;
  for (auto& a : arms) {
    if (a->kind() == TypeKind::Union) {
      for (auto& inner : a->arms()) t->arms_.push_back(inner);
    } else {
      t->arms_.push_back(std::move(a));
    }
  }
  return t;
}

bool TypeExpr::is_primitive() const {
  switch (kind_) {
    case TypeKind::Int:
    case TypeKind::Float:
    case TypeKind::Bool:
    case TypeKind::Dtype:
    case TypeKind::Str:
      return true;
    default:
      return false;
  }
}

bool TypeExpr::is_numeric() const {
  switch (kind_) {
    case TypeKind::Int:
    case TypeKind::Float:
    case TypeKind::Bool:
    case TypeKind::Dtype:
      return true;
    case TypeKind::Union:
      return std::all_of(arms_.begin(), arms_.end(), [](const TypePtr& a) { return a->is_numeric(); });
    default:
      return false;
  }
}

const char* type_kind_name(TypeKind k) {
  switch (k) {
    case TypeKind::Int: return "int";
    case TypeKind::Float: return "float";
    case TypeKind::Bool: return "bool";
    case TypeKind::Dtype: return "dtype";
    case TypeKind::Str: return "str";
    case TypeKind::Tensor: return "tensor";
    case TypeKind::List: return "list";
    case TypeKind::Tuple: return "tuple";
    case TypeKind::Union: return "union";
  }
  return "?";
}

std::string TypeExpr::to_string() const {
  switch (kind_) {
    case TypeKind::List: return "list(" + elem_->to_string() + ")";
    case TypeKind::Tuple: return "tuple(" + elem_->to_string() + ")";
    case TypeKind::Union: {
      std::string s;
      for (size_t i = 0; i < arms_.size(); ++i) {
        if (i) s += "|";
        s += arms_[i]->to_string();
      }
      return s;
    }
    default:
      return type_kind_name(kind_);
  }
}

bool operator==(const TypeExpr& a, const TypeExpr& b) {
  if (a.kind_ != b.kind_) return false;
  if (a.elem_ || b.elem_) {
    if (!a.elem_ || !b.elem_ || !(*a.elem_ == *b.elem_)) return false;
  }
  if (a.arms_.size() != b.arms_.size()) return false;
  for (size_t i = 0; i < a.arms_.size(); ++i) {
    if (!(*a.arms_[i] == *b.arms_[i])) return false;
  }
  return true;
}

bool same_type(const TypePtr& a, const TypePtr& b) {
  if (!a || !b) return a == b;
  return *a == *b;
}

const char* tensor_fn_name(TensorFn f) {
  switch (f) {
    case TensorFn::Ndim: return "ndim";
    case TensorFn::Shape: return "shape";
    case TensorFn::Dtype: return "dtype_";
    case TensorFn::Min: return "min";
    case TensorFn::Max: return "max";
  }
  return "?";
}

const char* arith_op_text(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    case ArithOp::Div: return "/";
  }
  return "?";
}

const char* cmp_op_text(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Gt: return ">";
    case CmpOp::Lt: return "<";
    case CmpOp::Ge: return ">=";
    case CmpOp::Le: return "<=";
  }
  return "?";
}

CmpOp negate_cmp(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return CmpOp::Ne;
    case CmpOp::Ne: return CmpOp::Eq;
    case CmpOp::Gt: return CmpOp::Le;
    case CmpOp::Lt: return CmpOp::Ge;
    case CmpOp::Ge: return CmpOp::Lt;
    case CmpOp::Le: return CmpOp::Gt;
  }
  return op;
}

CmpOp swap_cmp(CmpOp op) {
  switch (op) {
    case CmpOp::Gt: return CmpOp::Lt;
    case CmpOp::Lt: return CmpOp::Gt;
    case CmpOp::Ge: return CmpOp::Le;
    case CmpOp::Le: return CmpOp::Ge;
    default: return op;
  }
}

namespace {

bool literal_equal(const Literal& a, const Literal& b) {
  return a.value == b.value && a.float_syntax == b.float_syntax;
}

struct EqVisitor {
  const Expr& other;

  bool operator()(const Literal& a) const { return literal_equal(a, *other.as<Literal>()); }
  bool operator()(const VarRef& a) const { return a.name == other.as<VarRef>()->name; }
  bool operator()(const TensorCall& a) const {
    auto* b = other.as<TensorCall>();
    return a.fn == b->fn && a.target == b->target && expr_equal(a.index, b->index);
  }
  bool operator()(const TupleIndex& a) const {
    auto* b = other.as<TupleIndex>();
    return a.target == b->target && expr_equal(a.index, b->index);
  }
  bool operator()(const TupleLen& a) const { return a.target == other.as<TupleLen>()->target; }
  bool operator()(const Arith& a) const {
    auto* b = other.as<Arith>();
    return a.op == b->op && expr_equal(a.lhs, b->lhs) && expr_equal(a.rhs, b->rhs);
  }
  bool operator()(const Cmp& a) const {
    auto* b = other.as<Cmp>();
    return a.op == b->op && expr_equal(a.lhs, b->lhs) && expr_equal(a.rhs, b->rhs);
  }
  bool operator()(const Logic& a) const {
    auto* b = other.as<Logic>();
    return a.op == b->op && expr_equal(a.lhs, b->lhs) && expr_equal(a.rhs, b->rhs);
  }
  bool operator()(const Quant& a) const {
    auto* b = other.as<Quant>();
    return a.q == b->q && a.bound == b->bound && expr_equal(a.lo, b->lo) && expr_equal(a.hi, b->hi) &&
           expr_equal(a.body, b->body);
  }
  bool operator()(const IfThen& a) const {
    auto* b = other.as<IfThen>();
    return expr_equal(a.cond, b->cond) && expr_equal(a.then_branch, b->then_branch) &&
           expr_equal(a.else_branch, b->else_branch);
  }
};

void collect_refs(const ExprPtr& e, std::set<std::string>& bound_stack_names,
                  std::vector<std::string>& out) {
  if (!e) return;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        auto note = [&](const std::string& name) {
          if (!bound_stack_names.count(name) && std::find(out.begin(), out.end(), name) == out.end())
            out.push_back(name);
        };
        if constexpr (std::is_same_v<T, VarRef>) {
          note(n.name);
        } else if constexpr (std::is_same_v<T, TensorCall>) {
          note(n.target);
          collect_refs(n.index, bound_stack_names, out);
        } else if constexpr (std::is_same_v<T, TupleIndex>) {
          note(n.target);
          collect_refs(n.index, bound_stack_names, out);
        } else if constexpr (std::is_same_v<T, TupleLen>) {
          note(n.target);
        } else if constexpr (std::is_same_v<T, Arith> || std::is_same_v<T, Cmp> ||
                             std::is_same_v<T, Logic>) {
          collect_refs(n.lhs, bound_stack_names, out);
          collect_refs(n.rhs, bound_stack_names, out);
        } else if constexpr (std::is_same_v<T, Quant>) {
          collect_refs(n.lo, bound_stack_names, out);
          collect_refs(n.hi, bound_stack_names, out);
          bool fresh = bound_stack_names.insert(n.bound).second;
          collect_refs(n.body, bound_stack_names, out);
          if (fresh) bound_stack_names.erase(n.bound);
        } else if constexpr (std::is_same_v<T, IfThen>) {
          collect_refs(n.cond, bound_stack_names, out);
          collect_refs(n.then_branch, bound_stack_names, out);
          collect_refs(n.else_branch, bound_stack_names, out);
        }
      },
      e->node);
}

}  // namespace

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(EqVisitor{*b}, a->node);
}

bool rule_equal(const Rule& a, const Rule& b) {
  if (a.bindings.size() != b.bindings.size()) return false;
  for (size_t i = 0; i < a.bindings.size(); ++i) {
    if (a.bindings[i].name != b.bindings[i].name) return false;
    if (!same_type(a.bindings[i].type, b.bindings[i].type)) return false;
  }
  return expr_equal(a.body, b.body);
}

std::vector<std::pair<std::string, TypePtr>> free_variables(const Rule& r) {
  std::vector<std::pair<std::string, TypePtr>> out;
  out.reserve(r.bindings.size());
  for (const auto& b : r.bindings) out.emplace_back(b.name, b.type);
  return out;
}

std::vector<std::string> used_variables(const Rule& r) {
  std::set<std::string> bound;
  std::vector<std::string> refs;
  collect_refs(r.body, bound, refs);
  std::vector<std::string> out;
  for (const auto& b : r.bindings) {
    if (std::find(refs.begin(), refs.end(), b.name) != refs.end()) out.push_back(b.name);
  }
  return out;
}

}  // namespace tcfuzz::dsl
