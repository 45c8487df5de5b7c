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

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tcfuzz/solver/layout.hpp"

namespace tcfuzz::solver {

enum class SolveStatus { Sat, Unsat, Unknown };
const char* solve_status_name(SolveStatus s);

struct SolveOptions {
  uint64_t seed = 0;
  int64_t node_limit = 200000;
  std::chrono::milliseconds timeout{5000};
};

struct SolveResult {
  SolveStatus status = SolveStatus::Unknown;
  std::vector<int64_t> model;  // one value per layout variable when Sat
  int64_t nodes = 0;
};

// Finite-domain search over the layout's base constraints plus `extras`.
// Identical inputs and seed give identical results.
SolveResult solve(const SymbolicLayout& layout, const std::vector<Formula>& extras, const SolveOptions& opts = {});

// Number of solve() calls made by this process.
uint64_t solve_calls();

// Indices into `extras` of an unsatisfiable subset that is minimal under
// deletion. Empty when the base alone is unsatisfiable or the whole set is
// not proven unsatisfiable.
std::vector<size_t> unsat_core(const SymbolicLayout& layout, const std::vector<Formula>& extras,
                               const SolveOptions& opts = {});

// Non-internal variables by name.
std::map<std::string, int64_t> named_model(const SymbolicLayout& layout, const std::vector<int64_t>& model);

bool model_satisfies(const SymbolicLayout& layout, const std::vector<Formula>& extras, const std::vector<int64_t>& model);

}  // namespace tcfuzz::solver
