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

#include <cstdint>
#include <vector>

#include "tcfuzz/dsl/typecheck.hpp"
#include "tcfuzz/value.hpp"

namespace tcfuzz::rules {

struct EnumeratorConfig {
  int max_depth = 3;
  size_t count = 50;
  uint64_t seed = 0;
};

// Random grammar walk over the property functions the signature's parameter
// types admit. Depth 1 is a single comparison between properties or literals;
// each connective, arithmetic operator, conditional or quantifier adds one.
// Results are distinct, type-checked and deterministic per seed; fewer than
// `count` come back only when the grammar slice is exhausted.
std::vector<dsl::TypedRule> enumerate_rules(const ApiSignature& sig, const EnumeratorConfig& cfg);

// Nesting depth of a rule body under the measure above.
int rule_depth(const dsl::Rule& r);

}  // namespace tcfuzz::rules
