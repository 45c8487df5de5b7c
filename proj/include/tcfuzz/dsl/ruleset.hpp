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

#include <string>
#include <string_view>
#include <vector>

#include "tcfuzz/dsl/typecheck.hpp"

namespace tcfuzz::dsl {

struct RulesetEntry {
  TypedRule rule;
  size_t line = 0;  // line of the rule text
};

struct RulesetIssue {
  std::string file;
  size_t line = 0;
  size_t column = 0;
  std::string message;

  std::string to_string() const;
};

struct RulesetLoad {
  std::vector<RulesetEntry> rules;
  std::vector<RulesetIssue> issues;
};

// Records are blank-line separated: `# name: id`, `# desc: text`, then one rule line.
RulesetLoad parse_ruleset(std::string_view text, const std::string& file = "<memory>");
// Throws std::runtime_error when the file cannot be read.
RulesetLoad load_ruleset(const std::string& path);

std::string format_ruleset(const std::vector<Rule>& rules);

}  // namespace tcfuzz::dsl
