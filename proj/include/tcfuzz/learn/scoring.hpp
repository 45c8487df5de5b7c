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
#include <vector>

#include "tcfuzz/executor/executor.hpp"
#include "tcfuzz/executor/grid.hpp"
#include "tcfuzz/learn/learner.hpp"

namespace tcfuzz::learn {

// Kept invariants scored against authored constraints on a small input grid.
struct Score {
  size_t grid_inputs = 0;
  size_t valid_inputs = 0;             // executor returned Ok
  std::vector<std::string> covered;    // truth keys implied by the kept set
  std::vector<std::string> missed;
  std::vector<std::string> correct;    // kept keys holding on every valid input
  std::vector<std::string> incorrect;
  double recall() const;
  double precision() const;
};

// A truth constraint is covered when it holds on every grid input on which
// all kept invariants hold. A kept invariant is correct when it holds on every
// grid input the executor accepts.
Score score_invariants(const std::vector<Invariant>& kept, const std::vector<Invariant>& truth,
                       const std::string& api, exec::Executor& executor, const exec::GridBounds& grid);

json score_to_json(const Score& s);

}  // namespace tcfuzz::learn
