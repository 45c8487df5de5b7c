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

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tcfuzz/dsl/ast.hpp"

namespace tcfuzz::dsl {

enum class TypeErrorKind {
  NotPrimitive,          // T-PrimAccess: tensor/list variable used as a value
  BadUnion,              // union arm is not primitive
  NestedSequence,        // list of lists
  NotIndexable,          // T-TupleAccess on a non-sequence
  IndexNotInt,           // T-TupleAccess / T-FuncCall-1 index is not int
  NoLength,              // T-TupleLen on a non-sequence
  TensorFnOnNonTensor,   // T-FuncCall-0 / T-FuncCall-1 on a non-tensor
  ArithOperand,
  CmpOperand,
  StringMisuse,
  LogicOperand,
  BoundNotInt,
  BodyNotBool,
  CondNotBool,
  BranchMismatch,
  IfWithoutElseValue,
  RuleNotBool,
};

const char* type_error_kind_name(TypeErrorKind k);

struct TypeError {
  TypeErrorKind kind;
  SourceSpan span;
  std::string message;
};

class TypeErrorReport : public std::runtime_error {
 public:
  explicit TypeErrorReport(std::vector<TypeError> errors);
  const std::vector<TypeError>& errors() const { return errors_; }

 private:
  std::vector<TypeError> errors_;
};

struct Lint {
  SourceSpan span;
  std::string message;
};

struct TypedRule {
  Rule rule;
  std::unordered_map<const Expr*, TypePtr> types;
  std::vector<Lint> lints;

  TypePtr type_of(const ExprPtr& e) const;
  const std::string& name() const { return rule.name; }
  size_t arity() const { return rule.bindings.size(); }
};

// Throws TypeErrorReport listing every error found.
TypedRule type_check(const Rule& rule);

// Checks a declared binding type on its own (union arms, sequence nesting).
std::vector<TypeError> check_declared_type(const TypePtr& t, SourceSpan span);

}  // namespace tcfuzz::dsl
