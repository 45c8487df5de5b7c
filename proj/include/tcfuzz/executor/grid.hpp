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

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tcfuzz/value.hpp"

namespace tcfuzz::exec {

// Exhaustive small input grid for checking rules against an API.
struct GridBounds {
  int max_ndim = 3;
  int64_t dim_min = 0;
  int64_t dim_max = 3;
  int64_t int_lo = -4;
  int64_t int_hi = 4;
  std::vector<double> floats = {-1.5, 0.0, 0.5, 2.0};
  std::vector<int> dtypes = {0, 2, 4, 5};
  std::vector<std::pair<double, double>> ranges = {{0, 1}};
  int list_max = 2;
  std::map<std::string, std::vector<std::string>> strings;
};

// Values one parameter takes on the grid; optional parameters add None.
std::vector<ConcreteValue> grid_values(const Param& p, const GridBounds& g);

// Calls `fn` on every combination of grid values. Returns the number of inputs.
size_t for_each_grid_input(const ApiSignature& sig, const GridBounds& g,
                           const std::function<void(const ApiInput&)>& fn);

}  // namespace tcfuzz::exec
