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
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcfuzz/executor/executor.hpp"
#include "tcfuzz/learn/learner.hpp"
#include "tcfuzz/solver/lower.hpp"
#include "tcfuzz/solver/solver.hpp"

namespace tcfuzz::gen {

using solver::Formula;
using solver::SymbolicLayout;
using solver::VarId;

struct Bucket {
  int64_t lo = 0;
  int64_t hi = 0;
  friend bool operator==(const Bucket&, const Bucket&) = default;
};

class BucketTable {
 public:
  // Integer, dim, scaled-float and bool partitions.
  static BucketTable standard();

  const std::vector<Bucket>& ints() const { return ints_; }
  const std::vector<Bucket>& dims() const { return dims_; }
  const std::vector<Bucket>& floats() const { return floats_; }
  const std::vector<Bucket>& bools() const { return bools_; }

  // Buckets for a variable's role, clipped to its domain; empty ones removed.
  std::vector<Bucket> for_var(const solver::VarInfo& v) const;

 private:
  std::vector<Bucket> ints_, dims_, floats_, bools_;
};

class BlockingStore {
 public:
  void add(VarId v, int64_t value);
  bool empty(VarId v) const;
  const std::vector<int64_t>& values(VarId v) const;  // insertion order, distinct
  size_t size() const { return values_.size(); }

 private:
  std::map<VarId, std::vector<int64_t>> values_;
};

struct Provenance {
  int64_t iteration = 0;
  std::vector<std::pair<std::string, Bucket>> buckets;
  std::vector<std::pair<std::string, int64_t>> blocked;
  bool buckets_dropped = false;
};

struct AbstractInput {
  std::map<std::string, int64_t> model;  // every layout variable by name
  Provenance provenance;
};

std::map<std::string, int64_t> model_to_map(const SymbolicLayout& layout, const std::vector<int64_t>& model);
// Throws std::invalid_argument when a layout variable is missing.
std::vector<int64_t> model_from_map(const SymbolicLayout& layout, const std::map<std::string, int64_t>& model);

struct GenConfig {
  double p = 0.3;
  size_t target_size = 100;
  std::chrono::milliseconds timeout{60000};
  uint64_t seed = 0;
  size_t max_iterations = 0;  // 0: until size or timeout
  solver::SolveOptions solve{0, 20000, std::chrono::milliseconds(1000)};
};

struct LoweredInvariant {
  size_t index = 0;  // position in the invariant list
  Formula formula;
  bool approximate = false;
};

struct LoweredSet {
  std::vector<LoweredInvariant> lowered;
  std::vector<std::pair<size_t, std::string>> unsupported;  // index, reason

  // Formulas of the lowered invariants with `active[index]` set (all when empty).
  std::vector<Formula> formulas(const std::vector<bool>& active = {}) const;
  std::vector<const learn::Invariant*> approximate(const std::vector<learn::Invariant>& invs,
                                                   const std::vector<bool>& active = {}) const;
};

LoweredSet lower_invariants(const std::vector<learn::Invariant>& invs, const SymbolicLayout& layout);

// One generation iteration at a time: sampling, blocking, bucketing and solving.
class Generator {
 public:
  Generator(const SymbolicLayout& layout, std::vector<Formula> constraints, BucketTable buckets, GenConfig cfg);

  // Solves one iteration; nullopt when Unsat or Unknown even without buckets.
  std::optional<std::vector<int64_t>> propose(int64_t iteration, Provenance& prov);
  // Adds the sampled variables' values to the blocking store.
  void record(const std::vector<int64_t>& model, const Provenance& prov);

  const BlockingStore& blocking() const { return store_; }
  size_t unsat() const { return unsat_; }
  size_t unknown() const { return unknown_; }
  size_t retries() const { return retries_; }

 private:
  const SymbolicLayout& layout_;
  std::vector<Formula> constraints_;
  BucketTable buckets_;
  GenConfig cfg_;
  std::vector<VarId> candidates_;
  BlockingStore store_;
  std::map<VarId, int64_t> last_;  // values from the last recorded iteration
  size_t unsat_ = 0, unknown_ = 0, retries_ = 0;
};

struct Corpus {
  std::vector<AbstractInput> inputs;
};

struct GenStats {
  size_t iterations = 0;
  size_t recorded = 0;
  size_t invalid = 0;
  size_t unsat = 0;
  size_t unknown = 0;
  size_t bucket_retries = 0;
  size_t concretize_failures = 0;
  std::vector<std::string> unsupported;  // invariant keys left out of the solver
};

struct GenResult {
  Corpus corpus;
  GenStats stats;
};

class BaseUnsat : public std::runtime_error {
 public:
  explicit BaseUnsat(std::vector<std::string> core)
      : std::runtime_error("base constraints and invariants are unsatisfiable"), core_(std::move(core)) {}
  const std::vector<std::string>& core() const { return core_; }

 private:
  std::vector<std::string> core_;
};

// Records valid abstract inputs until the size, iteration or time limit.
// Throws BaseUnsat.
GenResult generate_abstract_inputs(const std::vector<learn::Invariant>& invs, const SymbolicLayout& layout,
                                   const BucketTable& buckets, exec::Executor& executor, const GenConfig& cfg);

// Validity probe for refinement: `trials` generated inputs per call.
learn::ValidityProbe make_validity_probe(const std::vector<learn::Invariant>& invs, const SymbolicLayout& layout,
                                         const LoweredSet& lowered, exec::Executor& executor, double p = 0.3);

class CorruptCorpus : public std::runtime_error {
 public:
  CorruptCorpus(size_t line, Corpus partial, const std::string& why)
      : std::runtime_error("corrupt corpus at line " + std::to_string(line) + ": " + why),
        line_(line),
        partial_(std::move(partial)) {}
  size_t line() const { return line_; }
  const Corpus& partial() const { return partial_; }

 private:
  size_t line_;
  Corpus partial_;
};

json abstract_to_json(const AbstractInput& a);
AbstractInput abstract_from_json(const json& j);
void corpus_save(const Corpus& c, const std::string& path);
// A missing or empty file is an empty corpus. Throws CorruptCorpus.
Corpus corpus_load(const std::string& path);

uint64_t mix_seed(uint64_t a, uint64_t b);

}  // namespace tcfuzz::gen
