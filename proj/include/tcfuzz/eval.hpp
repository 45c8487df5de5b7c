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

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "tcfuzz/dsl/typecheck.hpp"
#include "tcfuzz/value.hpp"

namespace tcfuzz {

enum class EvalErrorKind { NonIntegralIndex, DivisionByZero, IndexOutOfRange, WrongKind, RangeTooLarge };

const char* eval_error_kind_name(EvalErrorKind k);

class EvalError : public std::runtime_error {
 public:
  EvalError(EvalErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  EvalErrorKind kind() const { return kind_; }

 private:
  EvalErrorKind kind_;
};

constexpr int64_t kMaxQuantifierSpan = 10000;

using Binding = std::map<std::string, ConcreteValue>;

enum class Verdict { Holds, Fails, Errors };

struct CheckResult {
  Verdict verdict;
  std::optional<EvalError> error;
};

// Evaluates any sub-expression of the rule. Throws EvalError.
ConcreteValue eval_expr(const dsl::TypedRule& r, const dsl::ExprPtr& e, const Binding& b);

CheckResult check_rule(const dsl::TypedRule& r, const Binding& b);

// Arguments in binding order; avoids building a map per check.
CheckResult check_rule(const dsl::TypedRule& r, std::span<const ConcreteValue* const> args);

}  // namespace tcfuzz
