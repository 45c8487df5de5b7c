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
#include <vector>

#include "tcfuzz/dsl/typecheck.hpp"
#include "tcfuzz/solver/layout.hpp"

namespace tcfuzz::solver {

class LoweringUnsupported : public std::runtime_error {
 public:
  enum class Kind { NonlinearTerm, StringOpUnsupported, IndexUnbounded, CoefficientRange };
  LoweringUnsupported(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

const char* lowering_kind_name(LoweringUnsupported::Kind k);

struct Lowered {
  // Models of `formula` are exactly the descriptor assignments on which the
  // rule holds, except that min/max are read from the range variables.
  Formula formula;
  // Some min/max atom is only sound for the range bounds, not for sampled
  // elements; concretized inputs must be re-checked.
  bool approximate = false;
};

// Quantifier and index spans larger than this are rejected.
constexpr int64_t kMaxExpansionSpan = 256;

// `params[i]` is the parameter bound to the rule's i-th variable.
Lowered lower_rule(const dsl::TypedRule& r, const std::vector<std::string>& params, const SymbolicLayout& layout);

}  // namespace tcfuzz::solver
