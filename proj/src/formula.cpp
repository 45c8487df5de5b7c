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

#include "tcfuzz/solver/formula.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tcfuzz::solver {

LinExpr LinExpr::var(VarId v, int64_t coeff) {
  LinExpr e;
  if (coeff != 0) e.terms.emplace_back(v, coeff);
  return e;
}

LinExpr LinExpr::konst(int64_t c) {
  LinExpr e;
  e.constant = c;
  return e;
}

void LinExpr::normalize() {
  std::sort(terms.begin(), terms.end());
  std::vector<std::pair<VarId, int64_t>> out;
  for (const auto& [v, a] : terms) {
    if (!out.empty() && out.back().first == v) {
      out.back().second += a;
    } else {
      out.emplace_back(v, a);
    }
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const auto& p) { return p.second == 0; }), out.end());
  terms = std::move(out);
}

int64_t LinExpr::eval(const std::vector<int64_t>& model) const {
  __int128 s = constant;
  for (const auto& [v, a] : terms) s += static_cast<__int128>(a) * model[static_cast<size_t>(v)];
  if (s > INT64_MAX) return INT64_MAX;
  if (s < INT64_MIN) return INT64_MIN;
  return static_cast<int64_t>(s);
}

namespace {

const std::shared_ptr<const FormulaNode>& true_node() {
  static const auto n = [] {
    auto p = std::make_shared<FormulaNode>();
    p->kind = Formula::Kind::True;
    return std::shared_ptr<const FormulaNode>(p);
  }();
  return n;
}

const std::shared_ptr<const FormulaNode>& false_node() {
  static const auto n = [] {
    auto p = std::make_shared<FormulaNode>();
    p->kind = Formula::Kind::False;
    return std::shared_ptr<const FormulaNode>(p);
  }();
  return n;
}

int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

Formula::Formula() : node_(true_node()) {}

Formula Formula::truth(bool b) { return Formula(b ? true_node() : false_node()); }

Formula Formula::atom(LinExpr lhs, Rel rel) {
  lhs.normalize();
  if (lhs.terms.empty()) {
    int64_t c = lhs.constant;
    switch (rel) {
      case Rel::Le: return truth(c <= 0);
      case Rel::Eq: return truth(c == 0);
      case Rel::Ne: return truth(c != 0);
    }
  }
  int64_t g = 0;
  for (const auto& t : lhs.terms) g = std::gcd(g, t.second < 0 ? -t.second : t.second);
  if (g > 1) {
    if (rel == Rel::Le) {
      for (auto& t : lhs.terms) t.second /= g;
      lhs.constant = -floor_div(-lhs.constant, g);
    } else {
      if (lhs.constant % g != 0) return truth(rel == Rel::Ne);
      for (auto& t : lhs.terms) t.second /= g;
      lhs.constant /= g;
    }
  }
  if (rel != Rel::Le && lhs.terms.front().second < 0) {
    for (auto& t : lhs.terms) t.second = -t.second;
    lhs.constant = -lhs.constant;
  }
  auto n = std::make_shared<FormulaNode>();
  n->kind = Kind::Atom;
  n->atom = Atom{std::move(lhs), rel};
  return Formula(std::move(n));
}

Formula Formula::in_range(VarId v, int64_t lo, int64_t hi) {
  LinExpr a = LinExpr::var(v, -1);
  a.constant = lo;  // lo - v <= 0
  LinExpr b = LinExpr::var(v, 1);
  b.constant = -hi;  // v - hi <= 0
  return conj({le(a), le(b)});
}

Formula Formula::var_eq(VarId v, int64_t value) {
  LinExpr e = LinExpr::var(v);
  e.constant = -value;
  return eq(e);
}

Formula Formula::var_ne(VarId v, int64_t value) {
  LinExpr e = LinExpr::var(v);
  e.constant = -value;
  return ne(e);
}

Formula Formula::conj(std::vector<Formula> kids) {
  std::vector<Formula> out;
  out.reserve(kids.size());
  for (auto& k : kids) {
    switch (k.kind()) {
      case Kind::True: break;
      case Kind::False: return truth(false);
      case Kind::And:
        for (const auto& kk : k.kids()) out.push_back(kk);
        break;
      default: out.push_back(std::move(k));
    }
  }
  if (out.empty()) return truth(true);
  if (out.size() == 1) return out[0];
  auto n = std::make_shared<FormulaNode>();
  n->kind = Kind::And;
  n->kids = std::move(out);
  return Formula(std::move(n));
}

Formula Formula::disj(std::vector<Formula> kids) {
  std::vector<Formula> out;
  out.reserve(kids.size());
  for (auto& k : kids) {
    switch (k.kind()) {
      case Kind::False: break;
      case Kind::True: return truth(true);
      case Kind::Or:
        for (const auto& kk : k.kids()) out.push_back(kk);
        break;
      default: out.push_back(std::move(k));
    }
  }
  if (out.empty()) return truth(false);
  if (out.size() == 1) return out[0];
  auto n = std::make_shared<FormulaNode>();
  n->kind = Kind::Or;
  n->kids = std::move(out);
  return Formula(std::move(n));
}

Formula::Kind Formula::kind() const { return node_->kind; }

const Atom& Formula::get_atom() const {
  if (node_->kind != Kind::Atom) throw std::logic_error("formula is not an atom");
  return node_->atom;
}

const std::vector<Formula>& Formula::kids() const { return node_->kids; }

bool Formula::eval(const std::vector<int64_t>& model) const {
  switch (kind()) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Atom: {
      int64_t v = node_->atom.lhs.eval(model);
      switch (node_->atom.rel) {
        case Rel::Le: return v <= 0;
        case Rel::Eq: return v == 0;
        case Rel::Ne: return v != 0;
      }
      return false;
    }
    case Kind::And:
      for (const auto& k : kids())
        if (!k.eval(model)) return false;
      return true;
    case Kind::Or:
      for (const auto& k : kids())
        if (k.eval(model)) return true;
      return false;
  }
  return false;
}

Formula Formula::negate() const {
  switch (kind()) {
    case Kind::True: return truth(false);
    case Kind::False: return truth(true);
    case Kind::Atom: {
      const Atom& a = node_->atom;
      if (a.rel == Rel::Eq) return atom(a.lhs, Rel::Ne);
      if (a.rel == Rel::Ne) return atom(a.lhs, Rel::Eq);
      LinExpr n = a.lhs;  // not (L <= 0)  <=>  -L + 1 <= 0
      for (auto& t : n.terms) t.second = -t.second;
      n.constant = -n.constant + 1;
      return atom(n, Rel::Le);
    }
    case Kind::And: {
      std::vector<Formula> out;
      for (const auto& k : kids()) out.push_back(k.negate());
      return disj(std::move(out));
    }
    case Kind::Or: {
      std::vector<Formula> out;
      for (const auto& k : kids()) out.push_back(k.negate());
      return conj(std::move(out));
    }
  }
  return truth(true);
}

size_t Formula::size() const {
  size_t n = 1;
  for (const auto& k : kids()) n += k.size();
  return n;
}

void Formula::collect_vars(std::vector<VarId>& out) const {
  if (kind() == Kind::Atom) {
    for (const auto& t : node_->atom.lhs.terms) out.push_back(t.first);
  }
  for (const auto& k : kids()) k.collect_vars(out);
}

namespace {

void smt_lin(const LinExpr& e, const VarNamer& name, std::ostringstream& os) {
  auto num = [&](int64_t v) {
    if (v < 0) {
      os << "(- " << (0ULL - static_cast<unsigned long long>(v)) << ")";
    } else {
      os << v;
    }
  };
  os << "(+";
  for (const auto& [v, a] : e.terms) {
    os << " (* ";
    num(a);
    os << " " << name(v) << ")";
  }
  os << " ";
  num(e.constant);
  os << ")";
}

void smt(const Formula& f, const VarNamer& name, std::ostringstream& os) {
  switch (f.kind()) {
    case Formula::Kind::True: os << "true"; return;
    case Formula::Kind::False: os << "false"; return;
    case Formula::Kind::Atom: {
      const Atom& a = f.get_atom();
      if (a.rel == Rel::Ne) os << "(not (= ";
      else os << (a.rel == Rel::Le ? "(<= " : "(= ");
      smt_lin(a.lhs, name, os);
      os << " 0)";
      if (a.rel == Rel::Ne) os << ")";
      return;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or:
      os << (f.kind() == Formula::Kind::And ? "(and" : "(or");
      for (const auto& k : f.kids()) {
        os << " ";
        smt(k, name, os);
      }
      os << ")";
      return;
  }
}

}  // namespace

std::string formula_to_smtlib(const Formula& f, const VarNamer& name) {
  std::ostringstream os;
  smt(f, name, os);
  return os.str();
}

}  // namespace tcfuzz::solver
