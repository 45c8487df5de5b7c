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

#include <random>
#include <stdexcept>
#include <vector>

#include "tcfuzz/learn/learner.hpp"
#include "tcfuzz/solver/layout.hpp"

namespace tcfuzz::fuzz {

class ConcretizeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ByteBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr int kMaxResamples = 8;

// Builds a concrete input from a total model. Tensor elements are drawn
// uniformly from the model's value range. `rechecks` are invariants whose
// lowering approximated min/max; they are evaluated on the concrete input and
// elements are resampled up to kMaxResamples times; the later half of the
// resamples pins one element to each range bound.
ApiInput concretize(const std::vector<int64_t>& model, const solver::SymbolicLayout& layout,
                    const std::vector<const learn::Invariant*>& rechecks, std::mt19937_64& rng);

}  // namespace tcfuzz::fuzz
