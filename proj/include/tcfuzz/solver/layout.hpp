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

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcfuzz/solver/formula.hpp"
#include "tcfuzz/value.hpp"

namespace tcfuzz::solver {

// Rationals inside the solver are integers over this fixed denominator.
constexpr int64_t kScale = 1024;

struct Bounds {
  int max_ndim = 5;
  int64_t dim_min = 0;
  int64_t dim_max = 64;
  int64_t int_min = -(int64_t{1} << 31);
  int64_t int_max = (int64_t{1} << 31) - 1;
  double float_min = -1e6;
  double float_max = 1e6;
  int64_t max_tensor_bytes = int64_t{1} << 20;
  const DtypeTable* dtypes = &DtypeTable::standard();
  std::map<std::string, std::vector<std::string>> string_domains;  // per parameter name
  int list_cap = 5;
};

enum class VarRole : uint8_t {
  Ndim,
  Dim,
  Dtype,
  RangeLo,
  RangeHi,
  RangeLoInt,   // helper: integral range for integer dtypes
  RangeHiInt,
  Int,
  Float,
  Bool,
  Enum,         // str or dtype scalar
  Len,
  Tag,
  Present,
};

// Role classes labeled first during search.
bool is_structural(VarRole r);

struct VarInfo {
  std::string name;
  int64_t lo = 0;
  int64_t hi = 0;
  VarRole role = VarRole::Int;
  bool internal = false;  // helper, excluded from models shown to users
};

struct TensorSlots {
  VarId nd = -1;
  std::vector<VarId> dims;
  VarId dtype = -1;
  VarId lo = -1, hi = -1;
  VarId lo_int = -1, hi_int = -1;
};

struct ScalarSlot {
  dsl::TypeKind kind = dsl::TypeKind::Int;
  VarId var = -1;
  TensorSlots tensor;  // when kind == Tensor
};

struct ParamLayout {
  std::string name;
  dsl::TypePtr type;
  bool required = true;
  VarId present = -1;  // optional parameters only

  ScalarSlot value;                  // tensor or primitive parameter
  VarId len = -1;                    // list/tuple
  std::vector<ScalarSlot> elems;     // list/tuple element slots
  VarId tag = -1;                    // union
  std::vector<ScalarSlot> arms;      // union arms, in declared order
};

// Tensor byte budget: width(dtype) * prod(dims) <= budget.
struct ByteBudget {
  TensorSlots slots;
  int64_t budget = 0;
  std::vector<int64_t> widths;  // indexed by dtype code
};

class UnsupportedParamType : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SymbolicLayout {
 public:
  const std::vector<VarInfo>& vars() const { return vars_; }
  const VarInfo& var(VarId v) const { return vars_[static_cast<size_t>(v)]; }
  const std::vector<ParamLayout>& params() const { return params_; }
  const ParamLayout* param(const std::string& name) const;
  const Formula& base() const { return base_; }
  const std::vector<ByteBudget>& budgets() const { return budgets_; }
  const Bounds& bounds() const { return bounds_; }
  const ApiSignature& signature() const { return sig_; }
  VarId find(const std::string& name) const;

  // Global code of a string; strings outside every domain get distinct codes.
  int64_t string_code(const std::string& s) const;
  const std::string* string_of(int64_t code) const;

  // Checks every base constraint, including byte budgets, on a total model.
  bool satisfies_base(const std::vector<int64_t>& model) const;

  std::string smtlib(const std::vector<Formula>& extras) const;

 private:
  friend SymbolicLayout build_layout(const ApiSignature& sig, const Bounds& bounds);
  VarId add_var(std::string name, int64_t lo, int64_t hi, VarRole role, bool internal = false);
  TensorSlots add_tensor(const std::string& prefix);
  ScalarSlot add_scalar(const std::string& prefix, const dsl::TypePtr& t, const std::string& param);

  ApiSignature sig_;
  Bounds bounds_;
  std::vector<VarInfo> vars_;
  std::vector<ParamLayout> params_;
  std::vector<ByteBudget> budgets_;
  Formula base_;
  std::vector<Formula> base_parts_;
  std::vector<std::string> strings_;
};

// Variables are named `<param>.<prop>[i]`. Throws UnsupportedParamType.
SymbolicLayout build_layout(const ApiSignature& sig, const Bounds& bounds = Bounds{});

}  // namespace tcfuzz::solver
