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
#include <random>
#include <string>
#include <vector>

#include "tcfuzz/executor/executor.hpp"

namespace tcfuzz::rules {

enum class Mutator {
  DropOptional,
  EmptyTensor,
  AllZero,
  IntNegate,
  IntExtreme,
  DtypeSwap,
  RankUp,
  RankDown,
  KindConfusion,
};

const std::vector<Mutator>& all_mutators();
const char* mutator_name(Mutator m);

// One mutant per parameter the mutator applies to, in signature order.
std::vector<ApiInput> mutate(Mutator m, const ApiInput& in, const ApiSignature& sig);

// Collapses whitespace and replaces digit runs with `#`.
std::string normalize_message(const std::string& msg);

class ErrorDb {
 public:
  // True when the message was new for the API after normalization.
  bool add(const std::string& api, const std::string& message);
  const std::vector<std::string>& messages(const std::string& api) const;
  const std::map<std::string, std::vector<std::string>>& entries() const { return entries_; }

  json to_json() const;
  static ErrorDb from_json(const json& j);
  void save(const std::string& path) const;
  // Throws std::runtime_error when the file is unreadable or malformed.
  static ErrorDb load(const std::string& path);

 private:
  std::map<std::string, std::vector<std::string>> entries_;
  std::map<std::string, std::vector<std::string>> keys_;
};

struct CollectConfig {
  std::chrono::milliseconds random_budget{30000};
  size_t max_random = 0;  // 0: until the budget runs out
  uint64_t seed = 0;
};

struct CollectReport {
  size_t executed = 0;
  size_t mutants = 0;
  size_t random_inputs = 0;
  size_t added = 0;
  std::vector<ApiInput> crashes;
};

// Random value of a declared type; optional parameters may come back None.
ConcreteValue random_value(const dsl::TypePtr& t, std::mt19937_64& rng);

// Runs every mutant of every seed, then random inputs for the budget, and
// files the distinct error messages under the API. Crashing inputs are kept
// apart. Throws exec::UnknownApi.
CollectReport collect_errors(const std::string& api, const std::vector<ApiInput>& seeds, exec::Executor& executor,
                             ErrorDb& db, const CollectConfig& cfg);

}  // namespace tcfuzz::rules
