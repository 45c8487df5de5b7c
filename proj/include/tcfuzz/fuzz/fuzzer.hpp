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
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcfuzz/executor/executor.hpp"
#include "tcfuzz/fuzz/concretize.hpp"
#include "tcfuzz/gen/abstract_gen.hpp"

namespace tcfuzz::fuzz {

enum class FindingKind { Crash, NaN, Overflow, Inconsistent };
const char* finding_kind_name(FindingKind k);
std::optional<FindingKind> parse_finding_kind(const std::string& s);

struct Finding {
  FindingKind kind = FindingKind::Crash;
  std::string api;
  ApiInput input;
  std::vector<std::string> backends;
  std::string evidence;       // crash detail, or which backend deviated
  double max_abs_diff = 0;    // Inconsistent only
  uint64_t seed = 0;          // reproduction seed
  std::string dedup_hash;     // hash of (kind, api, evidence class)
};

struct FuzzConfig {
  std::chrono::milliseconds budget{180000};
  uint64_t seed = 0;
  double tolerance = 0.01;
  std::vector<std::string> backends = {"cpu", "gpu"};
  size_t max_inputs = 0;            // 0: until the budget runs out
  std::string findings_dir;         // empty: findings are not written
  std::string library = "ref";
  bool stop_at_first_finding = false;
};

struct FuzzReport {
  std::string api;
  size_t generated = 0;
  size_t valid = 0;    // did not raise an API error: ok + crashed
  size_t ok = 0;
  size_t invalid = 0;  // API errors
  size_t crashed = 0;  // abnormal terminations, including timeouts
  size_t concretize_failures = 0;
  double validity_ratio = 0;
  double throughput = 0;  // inputs per second
  double elapsed_s = 0;
  double concretize_ms_mean = 0;
  std::vector<Finding> findings;
  std::set<std::string> branches;
  double first_crash_s = -1;  // time to the first crash finding
};

class EmptyCorpus : public std::runtime_error {
 public:
  EmptyCorpus() : std::runtime_error("the corpus is empty") {}
};

class BackendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DiffVerdict {
  bool agree = true;
  FindingKind kind = FindingKind::Inconsistent;
  std::string evidence;
  double max_abs_diff = 0;
};

// Compares two successful results of one input on different backends.
DiffVerdict compare_results(const exec::ExecResult& a, const std::string& backend_a, const exec::ExecResult& b,
                            const std::string& backend_b, double tolerance);

// Runs `input` on every backend and applies the differential oracle.
// Throws BackendUnavailable.
DiffVerdict run_differential(exec::Executor& executor, const std::string& api, const ApiInput& input,
                             const std::vector<std::string>& backends, double tolerance);

// Everything one fuzz loop needs about an API.
struct FuzzTarget {
  const solver::SymbolicLayout* layout = nullptr;
  std::vector<std::vector<int64_t>> models;
  std::vector<learn::Invariant> rechecks;  // approximately lowered invariants
};

FuzzTarget make_fuzz_target(const solver::SymbolicLayout& layout, const gen::Corpus& corpus,
                            const std::vector<learn::Invariant>& invariants);

// The concrete input of one iteration seed. Throws ConcretizeFailure.
ApiInput input_for_seed(const FuzzTarget& t, uint64_t seed);
uint64_t iteration_seed(uint64_t seed, uint64_t iteration);

// Throws EmptyCorpus.
FuzzReport fuzz_api(const FuzzTarget& target, exec::Executor& executor, const FuzzConfig& cfg);

// Re-runs one reproduction seed; returns the finding it triggers, if any.
std::optional<Finding> replay(const FuzzTarget& target, exec::Executor& executor, uint64_t seed,
                              const FuzzConfig& cfg);

json finding_to_json(const Finding& f);
Finding finding_from_json(const json& j);
json fuzz_report_to_json(const FuzzReport& r);
// Writes `<dir>/<kind>-<hash>.json`; returns the path.
std::string write_finding(const Finding& f, const std::string& dir);

}  // namespace tcfuzz::fuzz
