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
#include <string_view>

#include "tcfuzz/dsl/ast.hpp"

namespace tcfuzz::dsl {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, size_t line, size_t column, std::string token, SourceSpan span);
  size_t line() const { return line_; }
  size_t column() const { return column_; }
  const std::string& token() const { return token_; }
  SourceSpan span() const { return span_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  size_t line_, column_;
  std::string token_;
  SourceSpan span_;
};

class BindingError : public std::runtime_error {
 public:
  enum class Kind { Unbound, Duplicate, Shadowing };
  BindingError(Kind kind, std::string name, SourceSpan span);
  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  SourceSpan span() const { return span_; }

 private:
  Kind kind_;
  std::string name_;
  SourceSpan span_;
};

// Parses `{v: type, ...} |= expr`. Throws ParseError or BindingError.
Rule parse_rule(std::string_view text);

// Parses a standalone type such as `list(int)` or `int|str`.
TypePtr parse_type(std::string_view text);

std::string render_rule(const Rule& rule);
std::string render_expr(const ExprPtr& e);

}  // namespace tcfuzz::dsl
