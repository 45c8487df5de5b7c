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

#include "tcfuzz/learn/scoring.hpp"

namespace tcfuzz::learn {

double Score::recall() const {
  size_t n = covered.size() + missed.size();
  return n ? static_cast<double>(covered.size()) / static_cast<double>(n) : 1.0;
}

double Score::precision() const {
  size_t n = correct.size() + incorrect.size();
  return n ? static_cast<double>(correct.size()) / static_cast<double>(n) : 1.0;
}

Score score_invariants(const std::vector<Invariant>& kept, const std::vector<Invariant>& truth,
                       const std::string& api, exec::Executor& executor, const exec::GridBounds& grid) {
  const exec::ApiInfo* info = executor.find(api);
  if (!info) throw exec::UnknownApi(api);
  std::vector<bool> truth_ok(truth.size(), true), kept_ok(kept.size(), true);
  Score s;
  s.grid_inputs = exec::for_each_grid_input(info->signature, grid, [&](const ApiInput& in) {
    exec::ExecRequest req;
    req.api = api;
    req.input = in;
    bool valid = executor.run(req).status == exec::ExecStatus::Ok;
    if (valid) ++s.valid_inputs;
    bool all_kept = true;
    for (size_t i = 0; i < kept.size(); ++i) {
      if (!all_kept && !valid) break;
      bool holds = check_invariant(kept[i], in).verdict == Verdict::Holds;
      all_kept = all_kept && holds;
      if (valid && !holds) kept_ok[i] = false;
    }
    if (!all_kept) return;
    for (size_t i = 0; i < truth.size(); ++i)
      if (truth_ok[i] && check_invariant(truth[i], in).verdict != Verdict::Holds) truth_ok[i] = false;
  });
  for (size_t i = 0; i < truth.size(); ++i) (truth_ok[i] ? s.covered : s.missed).push_back(truth[i].key());
  for (size_t i = 0; i < kept.size(); ++i) (kept_ok[i] ? s.correct : s.incorrect).push_back(kept[i].key());
  return s;
}

json score_to_json(const Score& s) {
  return json{{"grid_inputs", s.grid_inputs}, {"valid_inputs", s.valid_inputs}, {"recall", s.recall()},
              {"precision", s.precision()},   {"covered", s.covered},           {"missed", s.missed},
              {"correct", s.correct},         {"incorrect", s.incorrect}};
}

}  // namespace tcfuzz::learn
