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

#include <iostream>

#include "CLI11.hpp"
#include "tcfuzz/executor/executor.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Reference executor: serves the line-delimited execution protocol on stdin/stdout"};
  bool abort_on_crash = true;
  app.add_flag("!--no-abort", abort_on_crash, "Report simulated crashes instead of aborting the process");
  CLI11_PARSE(app, argc, argv);
  std::ios::sync_with_stdio(false);
  tcfuzz::exec::serve(std::cin, std::cout, abort_on_crash);
  return 0;
}
