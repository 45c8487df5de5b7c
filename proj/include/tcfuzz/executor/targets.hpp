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
#include <random>
#include <string>
#include <vector>

#include "tcfuzz/executor/executor.hpp"

namespace tcfuzz::exec {

// Thrown by a target to simulate a process-level fault.
struct SimulatedCrash {
  std::string detail;
};

struct GroundTruthRule {
  std::string text;
  std::vector<std::string> params;
};

struct TargetCall {
  ExecStatus status = ExecStatus::Ok;
  std::string message;
  std::vector<ConcreteValue> outputs;
  std::vector<std::string> branches;
  std::vector<std::string> warnings;
  // Per output: probe values when the output is summarized, else empty.
  std::vector<std::vector<double>> probes;
};

class ReferenceTarget {
 public:
  virtual ~ReferenceTarget() = default;
  virtual const std::string& name() const = 0;
  virtual const ApiSignature& signature() const = 0;
  virtual const std::string& doc() const = 0;
  virtual const std::vector<std::string>& error_vocabulary() const = 0;
  virtual const std::vector<GroundTruthRule>& ground_truth() const = 0;
  // Error or Ok; throws SimulatedCrash for seeded crashes.
  virtual TargetCall call(const ApiInput& in, const std::string& backend) const = 0;
  // A valid input drawn directly from the target's input space.
  virtual ApiInput sample_valid(std::mt19937_64& rng) const = 0;
  std::vector<std::string> backends() const { return {"cpu", "gpu"}; }
};

// Sorted by name.
const std::vector<const ReferenceTarget*>& reference_targets();
const ReferenceTarget* find_target(const std::string& api);
std::vector<ApiInfo> reference_catalog();

// Throws UnknownApi.
const std::vector<GroundTruthRule>& ground_truth(const std::string& api);
std::vector<ApiInput> seed_inputs(const std::string& api, size_t count, uint64_t seed);

// Runs one request against the built-in targets. Throws UnknownApi.
ExecResult run_reference(const ExecRequest& req);

// Outputs above this many elements are summarized: shape, dtype and the
// range of the probe values, with the probe values reported separately.
constexpr int64_t kOutputElementCap = int64_t{1} << 16;
constexpr int64_t kProbeCount = 64;
// Deterministic flat indices sampled from an output; includes the first and last.
std::vector<int64_t> probe_indices(int64_t numel);

// Element access for tensors without materialized elements: every element is lo.
std::vector<double> tensor_elements(const TensorV& t);

}  // namespace tcfuzz::exec
