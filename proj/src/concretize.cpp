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

#include "tcfuzz/fuzz/concretize.hpp"

#include <cmath>

namespace tcfuzz::fuzz {

namespace {

using solver::kScale;
using solver::ScalarSlot;
using solver::SymbolicLayout;
using solver::TensorSlots;

struct Builder {
  const std::vector<int64_t>& m;
  const SymbolicLayout& L;
  std::mt19937_64& rng;

  int64_t at(solver::VarId v) const { return m[static_cast<size_t>(v)]; }

  // With `pin`, two random elements take the lowest and highest values of
  // the range, so the element extremes match the modeled bounds.
  void fill(TensorV& t, bool pin = false) const {
    const DtypeInfo* info = L.bounds().dtypes->by_code(t.dtype);
    int64_t n = t.numel();
    std::vector<double> el(static_cast<size_t>(n));
    double lo = t.lo, hi = t.hi;
    if (t.lo == t.hi) {
      std::fill(el.begin(), el.end(), t.lo);
    } else if (info && info->kind != DtypeKind::Float && info->kind != DtypeKind::Complex) {
      lo = std::ceil(t.lo);
      hi = std::floor(t.hi);
      std::uniform_int_distribution<int64_t> d(static_cast<int64_t>(lo), static_cast<int64_t>(hi));
      for (auto& x : el) x = static_cast<double>(d(rng));
    } else {
      std::uniform_real_distribution<double> d(t.lo, t.hi);
      for (auto& x : el) x = d(rng);
    }
    if (pin && n >= 2) {
      std::uniform_int_distribution<int64_t> pos(0, n - 1);
      size_t a = static_cast<size_t>(pos(rng));
      size_t b = static_cast<size_t>(pos(rng));
      if (a == b) b = (b + 1) % static_cast<size_t>(n);
      el[a] = lo;
      el[b] = hi;
    }
    t.elements = std::move(el);
  }

  TensorV tensor(const TensorSlots& s) const {
    TensorV t;
    t.ndim = at(s.nd);
    for (int64_t i = 0; i < t.ndim; ++i) t.shape.push_back(at(s.dims[static_cast<size_t>(i)]));
    t.dtype = static_cast<int>(at(s.dtype));
    t.lo = static_cast<double>(at(s.lo)) / kScale;
    t.hi = static_cast<double>(at(s.hi)) / kScale;
    if (byte_size(t, *L.bounds().dtypes) > L.bounds().max_tensor_bytes)
      throw ByteBudgetExceeded("tensor of shape with " + std::to_string(t.numel()) + " elements exceeds the byte budget");
    fill(t);
    return t;
  }

  ConcreteValue scalar(const ScalarSlot& s) const {
    switch (s.kind) {
      case dsl::TypeKind::Tensor: return tensor(s.tensor);
      case dsl::TypeKind::Int: return at(s.var);
      case dsl::TypeKind::Float: return static_cast<double>(at(s.var)) / kScale;
      case dsl::TypeKind::Bool: return at(s.var) != 0;
      case dsl::TypeKind::Dtype: return DtypeV{static_cast<int>(at(s.var))};
      case dsl::TypeKind::Str: {
        const std::string* str = L.string_of(at(s.var));
        return str ? *str : std::string();
      }
      default: return ConcreteValue{};
    }
  }
};

void resample(ConcreteValue& v, const Builder& b, bool pin) {
  if (auto* t = std::get_if<TensorV>(&v.v)) {
    b.fill(*t, pin);
  } else if (auto* l = std::get_if<ListV>(&v.v)) {
    for (auto& x : l->items) resample(x, b, pin);
  } else if (auto* tu = std::get_if<TupleV>(&v.v)) {
    for (auto& x : tu->items) resample(x, b, pin);
  }
}

}  // namespace

ApiInput concretize(const std::vector<int64_t>& model, const SymbolicLayout& layout,
                    const std::vector<const learn::Invariant*>& rechecks, std::mt19937_64& rng) {
  if (model.size() != layout.vars().size()) throw ConcretizeFailure("model is not total for the layout");
  Builder b{model, layout, rng};
  ApiInput in;
  in.api = layout.signature().api;
  for (const auto& p : layout.params()) {
    if (p.present >= 0 && b.at(p.present) == 0) continue;
    ConcreteValue v;
    if (p.len >= 0) {
      std::vector<ConcreteValue> items;
      for (int64_t k = 0; k < b.at(p.len); ++k) items.push_back(b.scalar(p.elems[static_cast<size_t>(k)]));
      if (p.type->kind() == dsl::TypeKind::List) v = ListV{std::move(items)};
      else v = TupleV{std::move(items)};
    } else if (p.tag >= 0) {
      v = b.scalar(p.arms[static_cast<size_t>(b.at(p.tag))]);
    } else {
      v = b.scalar(p.value);
    }
    in.args.emplace_back(p.name, std::move(v));
  }
  if (rechecks.empty()) return in;
  for (int attempt = 0;; ++attempt) {
    bool ok = true;
    for (const auto* inv : rechecks)
      if (learn::check_invariant(*inv, in).verdict != Verdict::Holds) {
        ok = false;
        break;
      }
    if (ok) return in;
    if (attempt == kMaxResamples) break;
    bool pin = attempt + 1 >= kMaxResamples / 2;
    for (auto& [name, v] : in.args) resample(v, b, pin);
  }
  throw ConcretizeFailure("approximated min/max invariants still fail after " + std::to_string(kMaxResamples) +
                          " resamples");
}

}  // namespace tcfuzz::fuzz
