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

#include "tcfuzz/solver/lower.hpp"

#include <gmpxx.h>

#include <map>
#include <unordered_map>

#include "tcfuzz/eval.hpp"

namespace tcfuzz::solver {

using namespace dsl;

const char* lowering_kind_name(LoweringUnsupported::Kind k) {
  switch (k) {
    case LoweringUnsupported::Kind::NonlinearTerm: return "NonlinearTerm";
    case LoweringUnsupported::Kind::StringOpUnsupported: return "StringOpUnsupported";
    case LoweringUnsupported::Kind::IndexUnbounded: return "IndexUnbounded";
    case LoweringUnsupported::Kind::CoefficientRange: return "CoefficientRange";
  }
  return "?";
}

namespace {

using Kind = LoweringUnsupported::Kind;

// Rational linear term over raw solver variables.
struct RatLin {
  std::map<VarId, Number> coef;
  Number c;

  bool is_const() const { return coef.empty(); }

  static RatLin konst(Number n) {
    RatLin r;
    r.c = std::move(n);
    return r;
  }
  static RatLin var(VarId v, Number k = Number(1)) {
    RatLin r;
    r.coef.emplace(v, std::move(k));
    return r;
  }
};

RatLin add(const RatLin& a, const RatLin& b, int sign) {
  RatLin r = a;
  r.c = sign > 0 ? a.c + b.c : a.c - b.c;
  for (const auto& [v, k] : b.coef) {
    Number& slot = r.coef[v];
    slot = sign > 0 ? slot + k : slot - k;
    if (slot.sign() == 0) r.coef.erase(v);
  }
  return r;
}

RatLin scale(const RatLin& a, const Number& k) {
  if (k.sign() == 0) return RatLin{};
  RatLin r;
  r.c = a.c * k;
  for (const auto& [v, x] : a.coef) r.coef.emplace(v, x * k);
  return r;
}

LinExpr to_int(const RatLin& r) {
  mpz_class l = 1;
  auto acc = [&](const Number& n) {
    mpq_class q = n.to_mpq();
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
  };
  acc(r.c);
  for (const auto& [_, k] : r.coef) acc(k);
  auto conv = [&](const Number& n) -> int64_t {
    mpq_class q = n.to_mpq() * l;
    mpz_class z = q.get_num();
    if (!z.fits_slong_p() || abs(z) > mpz_class("4611686018427387904"))
      throw LoweringUnsupported(Kind::CoefficientRange, "coefficient " + n.to_string() + " out of range");
    return z.get_si();
  };
  LinExpr e;
  e.constant = conv(r.c);
  for (const auto& [v, k] : r.coef) e.terms.emplace_back(v, conv(k));
  return e;
}

Formula compare(CmpOp op, const RatLin& a, const RatLin& b) {
  LinExpr d = to_int(add(a, b, -1));
  auto neg = [](LinExpr e) {
    for (auto& t : e.terms) t.second = -t.second;
    e.constant = -e.constant;
    return e;
  };
  switch (op) {
    case CmpOp::Eq: return Formula::eq(d);
    case CmpOp::Ne: return Formula::ne(d);
    case CmpOp::Le: return Formula::le(d);
    case CmpOp::Lt: d.constant += 1; return Formula::le(d);
    case CmpOp::Ge: return Formula::le(neg(d));
    case CmpOp::Gt: {
      LinExpr n = neg(d);
      n.constant += 1;
      return Formula::le(n);
    }
  }
  return Formula::truth(false);
}

enum class VK { Num, Str, Bool };

struct Form {
  Formula guard;
  RatLin value;
  VK kind = VK::Num;
};

// Exact truth and falsity conditions; neither holds where evaluation errors.
struct TF {
  Formula t, f;
};

class Lowerer {
 public:
  Lowerer(const TypedRule& r, const std::vector<std::string>& params, const SymbolicLayout& layout)
      : layout_(layout) {
    if (params.size() != r.rule.bindings.size())
      throw std::invalid_argument("rule arity does not match the parameter tuple");
    for (size_t i = 0; i < params.size(); ++i) {
      const ParamLayout* pl = layout.param(params[i]);
      if (!pl) throw std::invalid_argument("unknown parameter '" + params[i] + "'");
      vars_[r.rule.bindings[i].name] = pl;
    }
  }

  TF boolean(const ExprPtr& e) {
    if (auto* l = e->as<Literal>()) {
      if (auto* b = std::get_if<bool>(&l->value)) return {Formula::truth(*b), Formula::truth(!*b)};
      return {Formula::truth(false), Formula::truth(false)};
    }
    if (auto* c = e->as<Cmp>()) return cmp(*c);
    if (auto* lg = e->as<Logic>()) {
      TF a = boolean(lg->lhs);
      TF b = boolean(lg->rhs);
      if (lg->op == LogicOp::And) return {a.t && b.t, a.f || (a.t && b.f)};
      return {a.t || (a.f && b.t), a.f && b.f};
    }
    if (auto* q = e->as<Quant>()) return quant(*q);
    if (auto* it = e->as<IfThen>()) {
      TF c = boolean(it->cond);
      TF a = boolean(it->then_branch);
      if (!it->else_branch) return {c.f || (c.t && a.t), c.t && a.f};
      TF b = boolean(it->else_branch);
      return {(c.t && a.t) || (c.f && b.t), (c.t && a.f) || (c.f && b.f)};
    }
    std::vector<Formula> t, f;
    for (const auto& fm : value(e)) {
      if (fm.kind != VK::Bool) continue;
      t.push_back(fm.guard && compare(CmpOp::Eq, fm.value, RatLin::konst(1)));
      f.push_back(fm.guard && compare(CmpOp::Eq, fm.value, RatLin::konst(0)));
    }
    return {Formula::disj(std::move(t)), Formula::disj(std::move(f))};
  }

 private:
  std::vector<Form> value(const ExprPtr& e) {
    if (auto* l = e->as<Literal>()) {
      if (auto* n = std::get_if<Number>(&l->value)) return {Form{Formula(), RatLin::konst(*n), VK::Num}};
      if (auto* b = std::get_if<bool>(&l->value)) return {Form{Formula(), RatLin::konst(Number(*b ? 1 : 0)), VK::Bool}};
      return {Form{Formula(), RatLin::konst(Number(str_code(std::get<std::string>(l->value)))), VK::Str}};
    }
    if (auto* v = e->as<VarRef>()) {
      for (auto it = bound_.rbegin(); it != bound_.rend(); ++it)
        if (it->first == v->name) return {Form{Formula(), RatLin::konst(Number(it->second)), VK::Num}};
      return param_forms(*param(v->name));
    }
    if (auto* c = e->as<TensorCall>()) return tensor_call(*c);
    if (auto* ti = e->as<TupleIndex>()) return tuple_index(*ti);
    if (auto* tl = e->as<TupleLen>()) {
      const ParamLayout& pl = *param(tl->target);
      if (pl.len < 0) return {};
      return {Form{present(pl), RatLin::var(pl.len), VK::Num}};
    }
    if (auto* a = e->as<Arith>()) return arith(*a);
    if (auto* it = e->as<IfThen>(); it && it->else_branch) {
      TF c = boolean(it->cond);
      std::vector<Form> out;
      for (auto fm : value(it->then_branch)) {
        fm.guard = c.t && fm.guard;
        if (!fm.guard.is_false()) out.push_back(std::move(fm));
      }
      for (auto fm : value(it->else_branch)) {
        fm.guard = c.f && fm.guard;
        if (!fm.guard.is_false()) out.push_back(std::move(fm));
      }
      return out;
    }
    TF b = boolean(e);
    std::vector<Form> out;
    if (!b.t.is_false()) out.push_back(Form{b.t, RatLin::konst(Number(1)), VK::Bool});
    if (!b.f.is_false()) out.push_back(Form{b.f, RatLin::konst(Number(0)), VK::Bool});
    return out;
  }

  const ParamLayout* param(const std::string& name) const {
    auto it = vars_.find(name);
    if (it == vars_.end()) throw std::invalid_argument("variable '" + name + "' is not bound to a parameter");
    return it->second;
  }

  int64_t str_code(const std::string& s) {
    int64_t c = layout_.string_code(s);
    if (c >= 0) return c;
    auto [it, inserted] = fresh_.emplace(s, 1000000000 + static_cast<int64_t>(fresh_.size()));
    return it->second;
  }

  static Formula present(const ParamLayout& pl) {
    return pl.present >= 0 ? Formula::var_eq(pl.present, 1) : Formula();
  }

  static void slot_forms(const ScalarSlot& s, const Formula& g, std::vector<Form>& out) {
    switch (s.kind) {
      case TypeKind::Int:
      case TypeKind::Dtype: out.push_back(Form{g, RatLin::var(s.var), VK::Num}); break;
      case TypeKind::Float: out.push_back(Form{g, RatLin::var(s.var, Number::ratio(1, kScale)), VK::Num}); break;
      case TypeKind::Bool: out.push_back(Form{g, RatLin::var(s.var), VK::Bool}); break;
      case TypeKind::Str: out.push_back(Form{g, RatLin::var(s.var), VK::Str}); break;
      default: break;
    }
  }

  std::vector<Form> param_forms(const ParamLayout& pl) {
    std::vector<Form> out;
    Formula g = present(pl);
    if (pl.tag >= 0) {
      for (size_t i = 0; i < pl.arms.size(); ++i)
        slot_forms(pl.arms[i], g && Formula::var_eq(pl.tag, static_cast<int64_t>(i)), out);
    } else if (pl.len < 0) {
      slot_forms(pl.value, g, out);
    }
    return out;
  }

  std::vector<std::pair<Formula, const TensorSlots*>> tensors(const ParamLayout& pl) {
    std::vector<std::pair<Formula, const TensorSlots*>> out;
    Formula g = present(pl);
    if (pl.tag >= 0) {
      for (size_t i = 0; i < pl.arms.size(); ++i)
        if (pl.arms[i].kind == TypeKind::Tensor)
          out.emplace_back(g && Formula::var_eq(pl.tag, static_cast<int64_t>(i)), &pl.arms[i].tensor);
    } else if (pl.len < 0 && pl.value.kind == TypeKind::Tensor) {
      out.emplace_back(g, &pl.value.tensor);
    }
    return out;
  }

  std::pair<Number, Number> range_of(const RatLin& r) const {
    Number lo = r.c, hi = r.c;
    for (const auto& [v, k] : r.coef) {
      const VarInfo& vi = layout_.var(v);
      Number a = k * Number(vi.lo), b = k * Number(vi.hi);
      if (k.sign() > 0) {
        lo = lo + a;
        hi = hi + b;
      } else {
        lo = lo + b;
        hi = hi + a;
      }
    }
    return {lo, hi};
  }

  // Integral values an index expression can take, each with its guard.
  // Values outside [clip_lo, clip_hi] are dropped when clipping is requested.
  std::vector<std::pair<Formula, int64_t>> split_index(const std::vector<Form>& forms, bool clip, int64_t clip_lo,
                                                        int64_t clip_hi) {
    std::vector<std::pair<Formula, int64_t>> out;
    for (const auto& fm : forms) {
      if (fm.kind != VK::Num) continue;
      if (fm.value.is_const()) {
        if (!fm.value.c.is_integer()) continue;
        auto j = fm.value.c.to_int64();
        if (!j) continue;
        if (clip && (*j < clip_lo || *j > clip_hi)) continue;
        out.emplace_back(fm.guard, *j);
        continue;
      }
      auto [mn, mx] = range_of(fm.value);
      Number lo = mn.ceil(), hi = mx.floor();
      if (clip) {
        if (lo < Number(clip_lo)) lo = Number(clip_lo);
        if (hi > Number(clip_hi)) hi = Number(clip_hi);
      }
      if (hi < lo) continue;
      if (hi - lo + Number(1) > Number(kMaxExpansionSpan))
        throw LoweringUnsupported(Kind::IndexUnbounded, "index range [" + lo.to_string() + ", " + hi.to_string() +
                                                            "] is too wide to expand");
      for (int64_t j = *lo.to_int64(); j <= *hi.to_int64(); ++j) {
        Formula g = fm.guard && compare(CmpOp::Eq, fm.value, RatLin::konst(Number(j)));
        if (!g.is_false()) out.emplace_back(std::move(g), j);
      }
    }
    return out;
  }

  std::vector<Form> tensor_call(const TensorCall& c) {
    const ParamLayout& pl = *param(c.target);
    std::vector<Form> out;
    int nd_max = layout_.bounds().max_ndim;
    std::vector<std::pair<Formula, int64_t>> idx;
    if (c.fn == TensorFn::Shape) idx = split_index(value(c.index), true, -nd_max, nd_max - 1);
    for (const auto& [g, ts] : tensors(pl)) {
      switch (c.fn) {
        case TensorFn::Ndim: out.push_back(Form{g, RatLin::var(ts->nd), VK::Num}); break;
        case TensorFn::Dtype: out.push_back(Form{g, RatLin::var(ts->dtype), VK::Num}); break;
        case TensorFn::Min: out.push_back(Form{g, RatLin::var(ts->lo, Number::ratio(1, kScale)), VK::Num}); break;
        case TensorFn::Max: out.push_back(Form{g, RatLin::var(ts->hi, Number::ratio(1, kScale)), VK::Num}); break;
        case TensorFn::Shape:
          for (const auto& [gi, j] : idx) {
            Formula base = g && gi;
            if (base.is_false()) continue;
            if (j >= 0) {
              LinExpr active = LinExpr::var(ts->nd, -1);
              active.constant = j + 1;
              out.push_back(Form{base && Formula::le(active), RatLin::var(ts->dims[static_cast<size_t>(j)]), VK::Num});
            } else {
              for (int64_t n = -j; n <= nd_max; ++n)
                out.push_back(Form{base && Formula::var_eq(ts->nd, n),
                                   RatLin::var(ts->dims[static_cast<size_t>(n + j)]), VK::Num});
            }
          }
          break;
      }
    }
    return out;
  }

  std::vector<Form> tuple_index(const TupleIndex& ti) {
    const ParamLayout& pl = *param(ti.target);
    if (pl.len < 0) return {};
    int64_t cap = static_cast<int64_t>(pl.elems.size());
    Formula g = present(pl);
    std::vector<Form> out;
    for (const auto& [gi, j] : split_index(value(ti.index), true, -cap, cap - 1)) {
      Formula base = g && gi;
      if (base.is_false()) continue;
      if (j >= 0) {
        LinExpr active = LinExpr::var(pl.len, -1);
        active.constant = j + 1;
        slot_forms(pl.elems[static_cast<size_t>(j)], base && Formula::le(active), out);
      } else {
        for (int64_t n = -j; n <= cap; ++n)
          slot_forms(pl.elems[static_cast<size_t>(n + j)], base && Formula::var_eq(pl.len, n), out);
      }
    }
    return out;
  }

  std::vector<Form> arith(const Arith& a) {
    auto lhs = value(a.lhs);
    auto rhs = value(a.rhs);
    std::vector<Form> out;
    for (const auto& l : lhs) {
      if (l.kind != VK::Num) continue;
      for (const auto& r : rhs) {
        if (r.kind != VK::Num) continue;
        Formula g = l.guard && r.guard;
        if (g.is_false()) continue;
        RatLin v;
        switch (a.op) {
          case ArithOp::Add: v = add(l.value, r.value, 1); break;
          case ArithOp::Sub: v = add(l.value, r.value, -1); break;
          case ArithOp::Mul:
            if (!l.value.is_const() && !r.value.is_const())
              throw LoweringUnsupported(Kind::NonlinearTerm, "product of two non-constant terms");
            v = l.value.is_const() ? scale(r.value, l.value.c) : scale(l.value, r.value.c);
            break;
          case ArithOp::Div:
            if (!r.value.is_const()) throw LoweringUnsupported(Kind::NonlinearTerm, "division by a non-constant term");
            if (r.value.c.sign() == 0) continue;
            v = scale(l.value, Number(1) / r.value.c);
            break;
        }
        out.push_back(Form{std::move(g), std::move(v), VK::Num});
      }
    }
    return out;
  }

  TF cmp(const Cmp& c) {
    auto lhs = value(c.lhs);
    auto rhs = value(c.rhs);
    bool ordering = c.op != CmpOp::Eq && c.op != CmpOp::Ne;
    std::vector<Formula> t, f;
    for (const auto& l : lhs) {
      for (const auto& r : rhs) {
        Formula g = l.guard && r.guard;
        if (g.is_false()) continue;
        if (l.kind != r.kind) {
          if (c.op == CmpOp::Eq) f.push_back(g);
          if (c.op == CmpOp::Ne) t.push_back(g);
          continue;
        }
        if (ordering && l.kind != VK::Num) {
          if (l.kind == VK::Str)
            throw LoweringUnsupported(Kind::StringOpUnsupported, "ordering comparison on strings");
          continue;
        }
        Formula atom = compare(c.op, l.value, r.value);
        t.push_back(g && atom);
        f.push_back(g && atom.negate());
      }
    }
    return {Formula::disj(std::move(t)), Formula::disj(std::move(f))};
  }

  TF quant(const Quant& q) {
    auto los = split_index(value(q.lo), false, 0, 0);
    auto his = split_index(value(q.hi), false, 0, 0);
    bool forall = q.q == Quantifier::ForAll;
    std::map<int64_t, TF> memo;
    auto body = [&](int64_t k) -> const TF& {
      auto it = memo.find(k);
      if (it != memo.end()) return it->second;
      bound_.emplace_back(q.bound, k);
      TF r = boolean(q.body);
      bound_.pop_back();
      return memo.emplace(k, std::move(r)).first->second;
    };
    std::vector<Formula> t, f;
    for (const auto& [g1, lo] : los) {
      for (const auto& [g2, hi] : his) {
        Formula g = g1 && g2;
        if (g.is_false()) continue;
        __int128 span = static_cast<__int128>(hi) - lo + 1;
        if (span > kMaxQuantifierSpan) continue;
        if (span > kMaxExpansionSpan)
          throw LoweringUnsupported(Kind::IndexUnbounded, "quantifier range of " + std::to_string(static_cast<int64_t>(span)) +
                                                              " values is too wide to expand");
        // `all` is the conjunction of the short-circuit-continuing outcomes,
        // `stop` the disjunction of first-stop outcomes.
        std::vector<Formula> all, stop;
        std::vector<Formula> prefix;
        for (int64_t k = lo; k <= hi; ++k) {
          const TF& b = body(k);
          const Formula& cont = forall ? b.t : b.f;
          const Formula& halt = forall ? b.f : b.t;
          std::vector<Formula> term = prefix;
          term.push_back(halt);
          stop.push_back(Formula::conj(std::move(term)));
          prefix.push_back(cont);
          all.push_back(cont);
        }
        Formula cont_all = g && Formula::conj(std::move(all));
        Formula halted = g && Formula::disj(std::move(stop));
        t.push_back(forall ? cont_all : halted);
        f.push_back(forall ? halted : cont_all);
      }
    }
    return {Formula::disj(std::move(t)), Formula::disj(std::move(f))};
  }

  const SymbolicLayout& layout_;
  std::map<std::string, const ParamLayout*> vars_;
  std::vector<std::pair<std::string, int64_t>> bound_;
  std::map<std::string, int64_t> fresh_;
};

struct RangeVar {
  VarId lo, hi;
  bool is_lo;
};

class RangePass {
 public:
  explicit RangePass(const SymbolicLayout& layout) {
    auto add = [&](const TensorSlots& t) {
      ranges_[t.lo] = RangeVar{t.lo, t.hi, true};
      ranges_[t.hi] = RangeVar{t.lo, t.hi, false};
    };
    for (const auto& p : layout.params()) {
      if (p.value.kind == TypeKind::Tensor && p.len < 0 && p.tag < 0) add(p.value.tensor);
      for (const auto& a : p.arms)
        if (a.kind == TypeKind::Tensor) add(a.tensor);
    }
  }

  Formula run(const Formula& f) {
    auto it = memo_.find(f.node());
    if (it != memo_.end()) return it->second;
    Formula out = f;
    switch (f.kind()) {
      case Formula::Kind::Atom: out = atom(f); break;
      case Formula::Kind::And:
      case Formula::Kind::Or: {
        std::vector<Formula> kids;
        for (const auto& k : f.kids()) kids.push_back(run(k));
        out = f.kind() == Formula::Kind::And ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
        break;
      }
      default: break;
    }
    memo_.emplace(f.node(), out);
    return out;
  }

  bool approximate = false;

 private:
  Formula atom(const Formula& f) {
    const Atom& a = f.get_atom();
    std::vector<Formula> pins;
    for (const auto& [v, k] : a.lhs.terms) {
      auto it = ranges_.find(v);
      if (it == ranges_.end()) continue;
      const RangeVar& r = it->second;
      switch (a.rel) {
        case Rel::Eq: {
          LinExpr e = LinExpr::var(r.lo);
          e.terms.emplace_back(r.hi, -1);
          pins.push_back(Formula::eq(e));
          break;
        }
        case Rel::Ne: approximate = true; break;
        case Rel::Le:
          if ((r.is_lo && k > 0) || (!r.is_lo && k < 0)) approximate = true;
          break;
      }
    }
    if (pins.empty()) return f;
    pins.push_back(f);
    return Formula::conj(std::move(pins));
  }

  std::unordered_map<VarId, RangeVar> ranges_;
  std::unordered_map<const FormulaNode*, Formula> memo_;
};

}  // namespace

Lowered lower_rule(const TypedRule& r, const std::vector<std::string>& params, const SymbolicLayout& layout) {
  Lowerer lw(r, params, layout);
  Formula t = lw.boolean(r.rule.body).t;
  RangePass pass(layout);
  Lowered out;
  out.formula = pass.run(t);
  out.approximate = pass.approximate;
  return out;
}

}  // namespace tcfuzz::solver
