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

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tcfuzz/number.hpp"

namespace tcfuzz::dsl {

// Byte offsets into the rule text, half open.
struct SourceSpan {
  size_t begin = 0;
  size_t end = 0;
};

enum class TypeKind { Int, Float, Bool, Dtype, Str, Tensor, List, Tuple, Union };

class TypeExpr;
using TypePtr = std::shared_ptr<const TypeExpr>;

class TypeExpr {
 public:
  static TypePtr prim(TypeKind k);
  static TypePtr list(TypePtr elem);
  static TypePtr tuple(TypePtr elem);
  static TypePtr union_of(std::vector<TypePtr> arms);

  TypeKind kind() const { return kind_; }
  const TypePtr& elem() const { return elem_; }
  const std::vector<TypePtr>& arms() const { return arms_; }

  bool is_primitive() const;
  bool is_numeric() const;  // int, float, bool, dtype
  bool is_sequence() const { return kind_ == TypeKind::List || kind_ == TypeKind::Tuple; }

  std::string to_string() const;

  friend bool operator==(const TypeExpr& a, const TypeExpr& b);

 private:
  TypeKind kind_ = TypeKind::Int;
  TypePtr elem_;
  std::vector<TypePtr> arms_;
};

bool same_type(const TypePtr& a, const TypePtr& b);
const char* type_kind_name(TypeKind k);

enum class TensorFn { Ndim, Shape, Dtype, Min, Max };
enum class ArithOp { Add, Sub, Mul, Div };
enum class CmpOp { Eq, Ne, Gt, Lt, Ge, Le };
enum class LogicOp { And, Or };
enum class Quantifier { ForAll, Exists };

const char* tensor_fn_name(TensorFn f);
const char* arith_op_text(ArithOp op);
const char* cmp_op_text(CmpOp op);
CmpOp negate_cmp(CmpOp op);
CmpOp swap_cmp(CmpOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Literal {
  std::variant<Number, bool, std::string> value;
  // The literal was written with a decimal point or exponent.
  bool float_syntax = false;
};

struct VarRef {
  std::string name;
};

struct TensorCall {
  TensorFn fn;
  std::string target;
  SourceSpan target_span;
  ExprPtr index;  // shape only
};

struct TupleIndex {
  std::string target;
  SourceSpan target_span;
  ExprPtr index;
};

struct TupleLen {
  std::string target;
  SourceSpan target_span;
};

struct Arith {
  ArithOp op;
  ExprPtr lhs, rhs;
};

struct Cmp {
  CmpOp op;
  ExprPtr lhs, rhs;
};

struct Logic {
  LogicOp op;
  ExprPtr lhs, rhs;
};

struct Quant {
  Quantifier q;
  std::string bound;
  SourceSpan bound_span;
  ExprPtr lo, hi, body;
};

struct IfThen {
  ExprPtr cond, then_branch;
  ExprPtr else_branch;  // may be null
};

using ExprNode = std::variant<Literal, VarRef, TensorCall, TupleIndex, TupleLen, Arith, Cmp, Logic,
                              Quant, IfThen>;

struct Expr {
  ExprNode node;
  SourceSpan span;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
};

template <typename T>
ExprPtr make_expr(T node, SourceSpan span = {}) {
  return std::make_shared<const Expr>(Expr{ExprNode(std::move(node)), span});
}

struct VarBinding {
  std::string name;
  TypePtr type;
  SourceSpan span;
};

struct Rule {
  std::string name;
  std::string description;
  std::vector<VarBinding> bindings;
  ExprPtr body;
};

// Structural equality; spans and names/descriptions are ignored.
bool expr_equal(const ExprPtr& a, const ExprPtr& b);
bool rule_equal(const Rule& a, const Rule& b);

// Bindings in declaration order; quantifier-bound names never appear.
std::vector<std::pair<std::string, TypePtr>> free_variables(const Rule& r);

// Names of binding variables actually referenced in the body.
std::vector<std::string> used_variables(const Rule& r);

}  // namespace tcfuzz::dsl
