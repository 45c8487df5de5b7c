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
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace tcfuzz::solver {

using VarId = int32_t;

// Integer linear expression: sum(coeff * var) + constant.
struct LinExpr {
  std::vector<std::pair<VarId, int64_t>> terms;  // sorted by var, no zero coefficients
  int64_t constant = 0;

  static LinExpr var(VarId v, int64_t coeff = 1);
  static LinExpr konst(int64_t c);
  void normalize();
  int64_t eval(const std::vector<int64_t>& model) const;
};

enum class Rel : uint8_t { Le, Eq, Ne };  // expr REL 0

struct Atom {
  LinExpr lhs;
  Rel rel = Rel::Le;
};

struct FormulaNode;

class Formula {
 public:
  enum class Kind : uint8_t { True, False, Atom, And, Or };

  Formula();  // True
  static Formula truth(bool b);
  // Builds a normalized atom; constant atoms fold to True/False.
  static Formula atom(LinExpr lhs, Rel rel);
  static Formula le(LinExpr lhs) { return atom(std::move(lhs), Rel::Le); }
  static Formula eq(LinExpr lhs) { return atom(std::move(lhs), Rel::Eq); }
  static Formula ne(LinExpr lhs) { return atom(std::move(lhs), Rel::Ne); }
  // lo <= var <= hi
  static Formula in_range(VarId v, int64_t lo, int64_t hi);
  static Formula var_eq(VarId v, int64_t value);
  static Formula var_ne(VarId v, int64_t value);
  static Formula conj(std::vector<Formula> kids);
  static Formula disj(std::vector<Formula> kids);

  Kind kind() const;
  bool is_true() const { return kind() == Kind::True; }
  bool is_false() const { return kind() == Kind::False; }
  const Atom& get_atom() const;
  const std::vector<Formula>& kids() const;
  const FormulaNode* node() const { return node_.get(); }

  bool eval(const std::vector<int64_t>& model) const;
  Formula negate() const;
  size_t size() const;  // node count of the tree view
  void collect_vars(std::vector<VarId>& out) const;

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const FormulaNode> node_;
};

struct FormulaNode {
  Formula::Kind kind = Formula::Kind::True;
  Atom atom;
  std::vector<Formula> kids;
};

inline Formula operator&&(const Formula& a, const Formula& b) { return Formula::conj({a, b}); }
inline Formula operator||(const Formula& a, const Formula& b) { return Formula::disj({a, b}); }

using VarNamer = std::function<std::string(VarId)>;
std::string formula_to_smtlib(const Formula& f, const VarNamer& name);

}  // namespace tcfuzz::solver
