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
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcfuzz/dsl/typecheck.hpp"
#include "tcfuzz/eval.hpp"
#include "tcfuzz/value.hpp"

namespace tcfuzz::learn {

// A rule instantiated with an ordered tuple of distinct API parameters.
struct Invariant {
  dsl::TypedRule rule;
  std::vector<std::string> params;

  // Rendered rule followed by the parameter tuple, e.g. `... @ (input, dim)`.
  std::string key() const;
};

struct LearnConfig {
  int trials = 30;
  uint64_t seed = 0;
  size_t min_seed_inputs = 20;
};

struct Counterexample {
  Invariant invariant;
  size_t seed_index = 0;
  ApiInput input;
};

struct EvalFailure {
  Invariant invariant;
  size_t seed_index = 0;
  EvalError error;
};

struct LearnOutcome {
  std::vector<Invariant> kept;
  std::vector<Counterexample> not_invariant;
  std::vector<EvalFailure> eval_error;
  size_t capped_rules = 0;  // rules whose tuples hit the candidate cap
};

struct LearnReport {
  std::vector<Invariant> kept;
  std::vector<Invariant> dropped_redundant;
  std::vector<Counterexample> dropped_not_invariant;
  std::vector<EvalFailure> dropped_eval_error;
  double v_orig = 0;
  bool degenerate = false;                 // v_orig was 0; nothing removed
  std::vector<std::string> unlowerable;    // kept without a refinement test
};

class EmptySeedSet : public std::runtime_error {
 public:
  EmptySeedSet() : std::runtime_error("no valid seed inputs") {}
};

class SolverUnsat : public std::runtime_error {
 public:
  explicit SolverUnsat(std::vector<std::string> core)
      : std::runtime_error("the invariant set is unsatisfiable"), core_(std::move(core)) {}
  const std::vector<std::string>& core() const { return core_; }

 private:
  std::vector<std::string> core_;
};

constexpr size_t kCandidateCap = 512;

// Ordered tuples of distinct, type-compatible parameters in lexicographic
// order of parameter positions. `capped` is set when the cap applied.
std::vector<std::vector<std::string>> enumerate_candidates(const dsl::TypedRule& rule, const ApiSignature& sig,
                                                           bool* capped = nullptr);

// Checks `rule` on `input` with the parameters bound in order.
CheckResult check_invariant(const Invariant& inv, const ApiInput& input);

// Throws EmptySeedSet.
LearnOutcome learn_invariants(const std::vector<dsl::TypedRule>& rules, const std::vector<ApiInput>& seeds,
                              const ApiSignature& sig);

// Validity of inputs generated under a subset of the invariants.
struct Probe {
  bool sat = true;
  size_t valid = 0;
  size_t trials = 0;
  std::vector<std::string> core;  // invariant keys, when unsatisfiable
  double ratio() const { return trials ? static_cast<double>(valid) / static_cast<double>(trials) : 0.0; }
};

// Generates `trials` inputs under the invariants flagged in `active`.
using ValidityProbe = std::function<Probe(const std::vector<bool>& active, uint64_t seed, int trials)>;

// Leave-one-out refinement in input order. Throws SolverUnsat.
LearnReport refine(const LearnOutcome& learned, const ValidityProbe& probe, const LearnConfig& cfg,
                   const std::vector<bool>& testable = {});

json invariant_to_json(const Invariant& inv);
Invariant invariant_from_json(const json& j);
json report_to_json(const LearnReport& r);
LearnReport report_from_json(const json& j);

}  // namespace tcfuzz::learn
