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

#include "tcfuzz/solver/layout.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace tcfuzz::solver {

using dsl::TypeKind;

bool is_structural(VarRole r) {
  switch (r) {
    case VarRole::Ndim:
    case VarRole::Dtype:
    case VarRole::Len:
    case VarRole::Tag:
    case VarRole::Present:
    case VarRole::Enum:
    case VarRole::Bool: return true;
    default: return false;
  }
}

const ParamLayout* SymbolicLayout::param(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

VarId SymbolicLayout::find(const std::string& name) const {
  for (size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return static_cast<VarId>(i);
  return -1;
}

int64_t SymbolicLayout::string_code(const std::string& s) const {
  auto it = std::lower_bound(strings_.begin(), strings_.end(), s);
  if (it == strings_.end() || *it != s) return -1;
  return it - strings_.begin();
}

const std::string* SymbolicLayout::string_of(int64_t code) const {
  if (code < 0 || code >= static_cast<int64_t>(strings_.size())) return nullptr;
  return &strings_[static_cast<size_t>(code)];
}

VarId SymbolicLayout::add_var(std::string name, int64_t lo, int64_t hi, VarRole role, bool internal) {
  vars_.push_back(VarInfo{std::move(name), lo, hi, role, internal});
  return static_cast<VarId>(vars_.size() - 1);
}

TensorSlots SymbolicLayout::add_tensor(const std::string& prefix) {
  const Bounds& b = bounds_;
  TensorSlots t;
  t.nd = add_var(prefix + ".ndim", 0, b.max_ndim, VarRole::Ndim);
  for (int i = 0; i < b.max_ndim; ++i) {
    int64_t lo = std::min<int64_t>(b.dim_min, 1);
    t.dims.push_back(add_var(prefix + ".shape[" + std::to_string(i) + "]", lo, std::max<int64_t>(b.dim_max, 1),
                             VarRole::Dim));
  }
  int cmin = INT32_MAX, cmax = INT32_MIN;
  for (const auto& e : b.dtypes->entries()) {
    cmin = std::min(cmin, e.code);
    cmax = std::max(cmax, e.code);
  }
  t.dtype = add_var(prefix + ".dtype", cmin, cmax, VarRole::Dtype);
  auto flo = static_cast<int64_t>(std::ceil(b.float_min * kScale));
  auto fhi = static_cast<int64_t>(std::floor(b.float_max * kScale));
  t.lo = add_var(prefix + ".min", flo, fhi, VarRole::RangeLo);
  t.hi = add_var(prefix + ".max", flo, fhi, VarRole::RangeHi);
  auto ilo = static_cast<int64_t>(std::ceil(b.float_min));
  auto ihi = static_cast<int64_t>(std::floor(b.float_max));
  t.lo_int = add_var(prefix + ".min_int", ilo, ihi, VarRole::RangeLoInt, true);
  t.hi_int = add_var(prefix + ".max_int", ilo, ihi, VarRole::RangeHiInt, true);

  std::vector<Formula> parts;
  LinExpr order = LinExpr::var(t.lo);
  order.terms.emplace_back(t.hi, -1);
  parts.push_back(Formula::le(order));
  for (int i = 0; i < b.max_ndim; ++i) {
    LinExpr active = LinExpr::var(t.nd, -1);
    active.constant = i + 1;  // nd >= i+1
    parts.push_back(Formula::le(active) || Formula::var_eq(t.dims[static_cast<size_t>(i)], 1));
    if (b.dim_min > 1) {
      LinExpr ge = LinExpr::var(t.dims[static_cast<size_t>(i)], -1);
      ge.constant = b.dim_min;
      parts.push_back(Formula::var_eq(t.dims[static_cast<size_t>(i)], 1) || Formula::le(ge));
    }
  }
  // A single-element tensor has one value: its range collapses.
  std::vector<Formula> single = {Formula::eq(order)};
  for (int i = 0; i < b.max_ndim; ++i) single.push_back(Formula::var_ne(t.dims[static_cast<size_t>(i)], 1));
  parts.push_back(Formula::disj(std::move(single)));
  std::vector<Formula> integral_codes;
  for (const auto& e : b.dtypes->entries()) {
    bool integral = e.kind == DtypeKind::Int || e.kind == DtypeKind::Bool;
    if (integral) integral_codes.push_back(Formula::var_eq(t.dtype, e.code));
    if (!integral) continue;
    LinExpr lo_link = LinExpr::var(t.lo);
    lo_link.terms.emplace_back(t.lo_int, -kScale);
    LinExpr hi_link = LinExpr::var(t.hi);
    hi_link.terms.emplace_back(t.hi_int, -kScale);
    std::vector<Formula> then = {Formula::eq(lo_link), Formula::eq(hi_link)};
    if (e.kind == DtypeKind::Bool) {
      then.push_back(Formula::in_range(t.lo_int, 0, 1));
      then.push_back(Formula::in_range(t.hi_int, 0, 1));
    }
    parts.push_back(Formula::var_ne(t.dtype, e.code) || Formula::conj(std::move(then)));
  }
  for (int c = cmin; c <= cmax; ++c)
    if (!b.dtypes->by_code(c)) parts.push_back(Formula::var_ne(t.dtype, c));
  // Helper vars are pinned when the dtype is not integral.
  integral_codes.push_back(Formula::var_eq(t.lo_int, 0) && Formula::var_eq(t.hi_int, 0));
  parts.push_back(Formula::disj(std::move(integral_codes)));
  for (auto& p : parts) base_parts_.push_back(std::move(p));

  ByteBudget bb;
  bb.slots = t;
  bb.budget = b.max_tensor_bytes;
  bb.widths.assign(static_cast<size_t>(cmax + 1), 0);
  for (const auto& e : b.dtypes->entries()) bb.widths[static_cast<size_t>(e.code)] = e.byte_width;
  budgets_.push_back(std::move(bb));
  return t;
}

ScalarSlot SymbolicLayout::add_scalar(const std::string& prefix, const dsl::TypePtr& t, const std::string& param) {
  const Bounds& b = bounds_;
  ScalarSlot s;
  s.kind = t->kind();
  switch (t->kind()) {
    case TypeKind::Tensor: s.tensor = add_tensor(prefix); break;
    case TypeKind::Int: s.var = add_var(prefix, b.int_min, b.int_max, VarRole::Int); break;
    case TypeKind::Float:
      s.var = add_var(prefix, static_cast<int64_t>(std::ceil(b.float_min * kScale)),
                      static_cast<int64_t>(std::floor(b.float_max * kScale)), VarRole::Float);
      break;
    case TypeKind::Bool: s.var = add_var(prefix, 0, 1, VarRole::Bool); break;
    case TypeKind::Dtype: {
      int cmin = INT32_MAX, cmax = INT32_MIN;
      for (const auto& e : b.dtypes->entries()) {
        cmin = std::min(cmin, e.code);
        cmax = std::max(cmax, e.code);
      }
      s.var = add_var(prefix, cmin, cmax, VarRole::Enum);
      for (int c = cmin; c <= cmax; ++c)
        if (!b.dtypes->by_code(c)) base_parts_.push_back(Formula::var_ne(s.var, c));
      break;
    }
    case TypeKind::Str: {
      auto it = b.string_domains.find(param);
      if (it == b.string_domains.end() || it->second.empty())
        throw UnsupportedParamType("string parameter '" + param + "' has no value domain");
      std::vector<int64_t> codes;
      for (const auto& str : it->second) codes.push_back(string_code(str));
      std::sort(codes.begin(), codes.end());
      s.var = add_var(prefix, codes.front(), codes.back(), VarRole::Enum);
      std::vector<Formula> any;
      for (auto c : codes) any.push_back(Formula::var_eq(s.var, c));
      base_parts_.push_back(Formula::disj(std::move(any)));
      break;
    }
    default: throw UnsupportedParamType("parameter '" + param + "' has unsupported type " + t->to_string());
  }
  return s;
}

namespace {

int64_t pin_value(const VarInfo& v) {
  if (v.lo <= 0 && v.hi >= 0) return 0;
  return v.lo;
}

}  // namespace

SymbolicLayout build_layout(const ApiSignature& sig, const Bounds& bounds) {
  if (bounds.max_ndim < 1) throw std::invalid_argument("max_ndim must be at least 1");
  if (bounds.dim_min < 0) throw std::invalid_argument("dimension lower bound must be non-negative");
  SymbolicLayout L;
  L.sig_ = sig;
  L.bounds_ = bounds;
  std::set<std::string> strs;
  for (const auto& [_, dom] : bounds.string_domains) strs.insert(dom.begin(), dom.end());
  L.strings_.assign(strs.begin(), strs.end());

  for (const auto& p : sig.params) {
    ParamLayout pl;
    pl.name = p.name;
    pl.type = p.type;
    pl.required = p.required;
    if (!p.required) pl.present = L.add_var(p.name + ".present", 0, 1, VarRole::Present);
    const auto& t = p.type;
    if (t->is_sequence()) {
      const auto& el = t->elem();
      if (!el->is_primitive() && el->kind() != TypeKind::Tensor)
        throw UnsupportedParamType("parameter '" + p.name + "' has nested type " + t->to_string());
      pl.len = L.add_var(p.name + ".len", 0, bounds.list_cap, VarRole::Len);
      for (int i = 0; i < bounds.list_cap; ++i) {
        auto slot = L.add_scalar(p.name + ".elem[" + std::to_string(i) + "]", el, p.name);
        if (slot.var >= 0) {
          LinExpr active = LinExpr::var(pl.len, -1);
          active.constant = i + 1;
          L.base_parts_.push_back(Formula::le(active) || Formula::var_eq(slot.var, pin_value(L.var(slot.var))));
        }
        pl.elems.push_back(std::move(slot));
      }
    } else if (t->kind() == TypeKind::Union) {
      pl.tag = L.add_var(p.name + ".tag", 0, static_cast<int64_t>(t->arms().size()) - 1, VarRole::Tag);
      for (size_t i = 0; i < t->arms().size(); ++i) {
        const auto& arm = t->arms()[i];
        if (!arm->is_primitive() && arm->kind() != TypeKind::Tensor)
          throw UnsupportedParamType("parameter '" + p.name + "' has a non-primitive union arm");
        pl.arms.push_back(L.add_scalar(p.name + ".arm[" + std::to_string(i) + "]", arm, p.name));
      }
    } else {
      pl.value = L.add_scalar(t->kind() == TypeKind::Tensor ? p.name : p.name + ".value", t, p.name);
    }
    L.params_.push_back(std::move(pl));
  }
  L.base_ = Formula::conj(L.base_parts_);
  return L;
}

namespace {

bool budget_ok(const ByteBudget& b, const std::vector<int64_t>& m) {
  auto d = m[static_cast<size_t>(b.slots.dtype)];
  if (d < 0 || d >= static_cast<int64_t>(b.widths.size())) return false;
  __int128 prod = b.widths[static_cast<size_t>(d)];
  auto nd = m[static_cast<size_t>(b.slots.nd)];
  for (int64_t i = 0; i < nd && i < static_cast<int64_t>(b.slots.dims.size()); ++i) {
    prod *= m[static_cast<size_t>(b.slots.dims[static_cast<size_t>(i)])];
    if (prod > b.budget) prod = static_cast<__int128>(b.budget) + 1;
  }
  return prod <= b.budget;
}

}  // namespace

bool SymbolicLayout::satisfies_base(const std::vector<int64_t>& model) const {
  if (model.size() != vars_.size()) return false;
  for (size_t i = 0; i < vars_.size(); ++i)
    if (model[i] < vars_[i].lo || model[i] > vars_[i].hi) return false;
  if (!base_.eval(model)) return false;
  for (const auto& b : budgets_)
    if (!budget_ok(b, model)) return false;
  return true;
}

std::string SymbolicLayout::smtlib(const std::vector<Formula>& extras) const {
  std::ostringstream os;
  auto name = [&](VarId v) { return "|" + vars_[static_cast<size_t>(v)].name + "|"; };
  os << "(set-logic QF_NIA)\n";
  for (size_t i = 0; i < vars_.size(); ++i) {
    auto n = name(static_cast<VarId>(i));
    os << "(declare-fun " << n << " () Int)\n";
    os << "(assert (and (<= " << vars_[i].lo << " " << n << ") (<= " << n << " " << vars_[i].hi << ")))\n";
  }
  os << "(assert " << formula_to_smtlib(base_, name) << ")\n";
  for (const auto& b : budgets_) {
    std::string width = "0";
    for (size_t c = 0; c < b.widths.size(); ++c)
      width = "(ite (= " + name(b.slots.dtype) + " " + std::to_string(c) + ") " + std::to_string(b.widths[c]) +
              " " + width + ")";
    os << "(assert (<= (* " << width;
    for (auto d : b.slots.dims) os << " " << name(d);
    os << ") " << b.budget << "))\n";
  }
  for (const auto& f : extras) os << "(assert " << formula_to_smtlib(f, name) << ")\n";
  os << "(check-sat)\n";
  std::string s = os.str();
  // SMT-LIB integer literals are non-negative; rewrite the few negative bounds.
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '-' && i > 0 && s[i - 1] == ' ' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
      size_t j = i + 1;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out += "(- " + s.substr(i + 1, j - i - 1) + ")";
      i = j - 1;
    } else {
      out += s[i];
    }
  }
  return out;
}

}  // namespace tcfuzz::solver
