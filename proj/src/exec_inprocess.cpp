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

#include "tcfuzz/executor/executor.hpp"
#include "tcfuzz/executor/targets.hpp"

namespace tcfuzz::exec {

InProcessExecutor::InProcessExecutor() : catalog_(reference_catalog()) {}

ExecResult InProcessExecutor::run(const ExecRequest& req) { return run_reference(req); }

}  // namespace tcfuzz::exec
