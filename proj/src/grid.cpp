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

#include "tcfuzz/executor/grid.hpp"

namespace tcfuzz::exec {

namespace {

void shapes(const GridBounds& g, std::vector<std::vector<int64_t>>& out) {
  std::vector<std::vector<int64_t>> frontier{{}};
  out.push_back({});
  for (int nd = 1; nd <= g.max_ndim; ++nd) {
    std::vector<std::vector<int64_t>> next;
    for (const auto& s : frontier)
      for (int64_t d = g.dim_min; d <= g.dim_max; ++d) {
        auto t = s;
        t.push_back(d);
        next.push_back(std::move(t));
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
}

std::vector<ConcreteValue> values_of(const dsl::TypePtr& t, const std::string& name, const GridBounds& g) {
  std::vector<ConcreteValue> out;
  switch (t->kind()) {
    case dsl::TypeKind::Int:
      for (int64_t i = g.int_lo; i <= g.int_hi; ++i) out.emplace_back(i);
      break;
    case dsl::TypeKind::Float:
      for (double f : g.floats) out.emplace_back(f);
      break;
    case dsl::TypeKind::Bool:
      out.emplace_back(false);
      out.emplace_back(true);
      break;
    case dsl::TypeKind::Dtype:
      for (int d : g.dtypes) out.emplace_back(DtypeV{d});
      break;
    case dsl::TypeKind::Str:
      if (auto it = g.strings.find(name); it != g.strings.end())
        for (const auto& s : it->second) out.emplace_back(s);
      break;
    case dsl::TypeKind::Tensor: {
      std::vector<std::vector<int64_t>> all;
      shapes(g, all);
      for (const auto& s : all)
        for (int d : g.dtypes)
          for (auto [lo, hi] : g.ranges) {
            if (d == 4 && (lo < 0 || hi > 1)) continue;
            TensorV tv;
            tv.ndim = static_cast<int64_t>(s.size());
            tv.shape = s;
            tv.dtype = d;
            tv.lo = lo;
            tv.hi = hi;
            out.emplace_back(std::move(tv));
          }
      break;
    }
    case dsl::TypeKind::List:
    case dsl::TypeKind::Tuple: {
      auto elems = values_of(t->elem(), name, g);
      std::vector<std::vector<ConcreteValue>> seqs{{}};
      std::vector<std::vector<ConcreteValue>> frontier{{}};
      for (int len = 1; len <= g.list_max; ++len) {
        std::vector<std::vector<ConcreteValue>> next;
        for (const auto& s : frontier)
          for (const auto& e : elems) {
            auto n = s;
            n.push_back(e);
            next.push_back(std::move(n));
          }
        seqs.insert(seqs.end(), next.begin(), next.end());
        frontier = std::move(next);
      }
      for (auto& s : seqs) {
        if (t->kind() == dsl::TypeKind::List) out.emplace_back(ListV{std::move(s)});
        else out.emplace_back(TupleV{std::move(s)});
      }
      break;
    }
    case dsl::TypeKind::Union:
      for (const auto& arm : t->arms()) {
        auto v = values_of(arm, name, g);
        out.insert(out.end(), v.begin(), v.end());
      }
      break;
  }
  return out;
}

}  // namespace

std::vector<ConcreteValue> grid_values(const Param& p, const GridBounds& g) {
  auto out = values_of(p.type, p.name, g);
  if (!p.required) out.emplace_back(NoneV{});
  return out;
}

size_t for_each_grid_input(const ApiSignature& sig, const GridBounds& g,
                           const std::function<void(const ApiInput&)>& fn) {
  std::vector<std::vector<ConcreteValue>> axes;
  for (const auto& p : sig.params) {
    axes.push_back(grid_values(p, g));
    if (axes.back().empty()) return 0;
  }
  ApiInput in;
  in.api = sig.api;
  for (size_t i = 0; i < sig.params.size(); ++i) in.args.emplace_back(sig.params[i].name, axes[i][0]);
  std::vector<size_t> idx(axes.size(), 0);
  size_t count = 0;
  while (true) {
    fn(in);
    ++count;
    size_t k = axes.size();
    while (k > 0) {
      --k;
      if (++idx[k] < axes[k].size()) {
        in.args[k].second = axes[k][idx[k]];
        break;
      }
      idx[k] = 0;
      in.args[k].second = axes[k][0];
      if (k == 0) return count;
    }
    if (axes.empty()) return count;
  }
}

}  // namespace tcfuzz::exec
