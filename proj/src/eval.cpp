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

#include "tcfuzz/eval.hpp"

#include <cmath>
#include <vector>

namespace tcfuzz {

using namespace dsl;

const char* eval_error_kind_name(EvalErrorKind k) {
  switch (k) {
    case EvalErrorKind::NonIntegralIndex: return "NonIntegralIndex";
    case EvalErrorKind::DivisionByZero: return "DivisionByZero";
    case EvalErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case EvalErrorKind::WrongKind: return "WrongKind";
    case EvalErrorKind::RangeTooLarge: return "RangeTooLarge";
  }
  return "?";
}

namespace {

using EVal = std::variant<Number, bool, std::string>;

class Evaluator {
 public:
  Evaluator(const Rule& r, std::span<const ConcreteValue* const> args) : rule_(r), args_(args) {}

  EVal eval(const ExprPtr& e) {
    return std::visit([&](const auto& n) { return visit(n); }, e->node);
  }

  bool eval_bool(const ExprPtr& e) {
    EVal v = eval(e);
    if (auto* b = std::get_if<bool>(&v)) return *b;
    throw EvalError(EvalErrorKind::WrongKind, "expected a boolean value");
  }

 private:
  const ConcreteValue& lookup(const std::string& name) const {
    for (size_t i = 0; i < rule_.bindings.size(); ++i) {
      if (rule_.bindings[i].name == name) {
        if (i >= args_.size() || !args_[i]) throw EvalError(EvalErrorKind::WrongKind, "variable '" + name + "' is unbound");
        return *args_[i];
      }
    }
    throw EvalError(EvalErrorKind::WrongKind, "variable '" + name + "' is unbound");
  }

  const Number* bound_int(const std::string& name) const {
    for (auto it = quant_.rbegin(); it != quant_.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }

  static EVal scalar(const ConcreteValue& v) {
    if (auto* i = v.as<int64_t>()) return Number(*i);
    if (auto* d = v.as<double>()) {
      if (!std::isfinite(*d)) throw EvalError(EvalErrorKind::WrongKind, "non-finite float value");
      return Number::from_double(*d);
    }
    if (auto* b = v.as<bool>()) return *b;
    if (auto* s = v.as<std::string>()) return *s;
    if (auto* dt = v.as<DtypeV>()) return Number(static_cast<int64_t>(dt->code));
    throw EvalError(EvalErrorKind::WrongKind, std::string("expected a primitive value, found ") + v.kind_name());
  }

  Number number(const ExprPtr& e) {
    EVal v = eval(e);
    if (auto* n = std::get_if<Number>(&v)) return *n;
    throw EvalError(EvalErrorKind::WrongKind, "expected a numeric value");
  }

  int64_t index(const ExprPtr& e) {
    Number n = number(e);
    auto i = n.to_int64();
    if (!n.is_integer()) throw EvalError(EvalErrorKind::NonIntegralIndex, "index " + n.to_string() + " is not integral");
    if (!i) throw EvalError(EvalErrorKind::IndexOutOfRange, "index " + n.to_string() + " is out of range");
    return *i;
  }

  EVal visit(const Literal& l) {
    return std::visit([](const auto& x) -> EVal { return x; }, l.value);
  }

  EVal visit(const VarRef& v) {
    if (const Number* n = bound_int(v.name)) return *n;
    return scalar(lookup(v.name));
  }

  EVal visit(const TensorCall& c) {
    const ConcreteValue& v = lookup(c.target);
    std::optional<int64_t> idx;
    if (c.index) idx = index(c.index);
    try {
      return tensor_prop(v, c.fn, idx);
    } catch (const ValueError& err) {
      throw EvalError(err.kind() == ValueError::Kind::IndexOutOfRange ? EvalErrorKind::IndexOutOfRange
                                                                      : EvalErrorKind::WrongKind,
                      err.what());
    } catch (const std::domain_error& err) {
      throw EvalError(EvalErrorKind::WrongKind, err.what());
    }
  }

  static const std::vector<ConcreteValue>& items_of(const ConcreteValue& v) {
    if (auto* l = v.as<ListV>()) return l->items;
    if (auto* t = v.as<TupleV>()) return t->items;
    throw EvalError(EvalErrorKind::WrongKind, std::string("expected a sequence, found ") + v.kind_name());
  }

  EVal visit(const TupleIndex& ti) {
    const auto& items = items_of(lookup(ti.target));
    int64_t i = index(ti.index);
    int64_t n = static_cast<int64_t>(items.size());
    int64_t r = i < 0 ? i + n : i;
    if (r < 0 || r >= n)
      throw EvalError(EvalErrorKind::IndexOutOfRange, "index " + std::to_string(i) + " out of range for length " + std::to_string(n));
    return scalar(items[static_cast<size_t>(r)]);
  }

  EVal visit(const TupleLen& tl) { return Number(static_cast<int64_t>(items_of(lookup(tl.target)).size())); }

  EVal visit(const Arith& a) {
    Number l = number(a.lhs);
    Number r = number(a.rhs);
    switch (a.op) {
      case ArithOp::Add: return l + r;
      case ArithOp::Sub: return l - r;
      case ArithOp::Mul: return l * r;
      case ArithOp::Div:
        if (r.sign() == 0) throw EvalError(EvalErrorKind::DivisionByZero, "division by zero");
        return l / r;
    }
    return Number(0);
  }

  static bool apply(CmpOp op, std::strong_ordering c) {
    switch (op) {
      case CmpOp::Eq: return c == 0;
      case CmpOp::Ne: return c != 0;
      case CmpOp::Gt: return c > 0;
      case CmpOp::Lt: return c < 0;
      case CmpOp::Ge: return c >= 0;
      case CmpOp::Le: return c <= 0;
    }
    return false;
  }

  EVal visit(const Cmp& c) {
    EVal l = eval(c.lhs);
    EVal r = eval(c.rhs);
    if (l.index() != r.index()) {
      if (c.op == CmpOp::Eq) return false;
      if (c.op == CmpOp::Ne) return true;
      throw EvalError(EvalErrorKind::WrongKind, "ordering comparison between different kinds");
    }
    if (auto* ln = std::get_if<Number>(&l)) return apply(c.op, *ln <=> std::get<Number>(r));
    if (auto* lb = std::get_if<bool>(&l)) {
      bool rb = std::get<bool>(r);
      if (c.op == CmpOp::Eq) return *lb == rb;
      if (c.op == CmpOp::Ne) return *lb != rb;
      throw EvalError(EvalErrorKind::WrongKind, "ordering comparison on booleans");
    }
    const auto& ls = std::get<std::string>(l);
    const auto& rs = std::get<std::string>(r);
    if (c.op == CmpOp::Eq) return ls == rs;
    if (c.op == CmpOp::Ne) return ls != rs;
    throw EvalError(EvalErrorKind::WrongKind, "ordering comparison on strings");
  }

  EVal visit(const Logic& lg) {
    bool l = eval_bool(lg.lhs);
    if (lg.op == LogicOp::And) return l ? eval_bool(lg.rhs) : false;
    return l ? true : eval_bool(lg.rhs);
  }

  EVal visit(const Quant& q) {
    int64_t lo = index(q.lo);
    int64_t hi = index(q.hi);
    if (hi >= lo && static_cast<__int128>(hi) - lo + 1 > kMaxQuantifierSpan)
      throw EvalError(EvalErrorKind::RangeTooLarge, "quantifier range [" + std::to_string(lo) + ", " + std::to_string(hi) + "] too large");
    bool forall = q.q == Quantifier::ForAll;
    quant_.emplace_back(q.bound, Number(lo));
    bool result = forall;
    for (int64_t i = lo; i <= hi; ++i) {
      quant_.back().second = Number(i);
      bool b = eval_bool(q.body);
      if (forall && !b) {
        result = false;
        break;
      }
      if (!forall && b) {
        result = true;
        break;
      }
    }
    quant_.pop_back();
    return result;
  }

  EVal visit(const IfThen& it) {
    bool c = eval_bool(it.cond);
    if (!it.else_branch) return c ? eval_bool(it.then_branch) : true;
    return c ? eval(it.then_branch) : eval(it.else_branch);
  }

  const Rule& rule_;
  std::span<const ConcreteValue* const> args_;
  std::vector<std::pair<std::string, Number>> quant_;
};

std::vector<const ConcreteValue*> positional(const Rule& r, const Binding& b) {
  std::vector<const ConcreteValue*> args;
  for (const auto& bd : r.bindings) {
    auto it = b.find(bd.name);
    args.push_back(it == b.end() ? nullptr : &it->second);
  }
  return args;
}

}  // namespace

ConcreteValue eval_expr(const TypedRule& r, const ExprPtr& e, const Binding& b) {
  auto args = positional(r.rule, b);
  Evaluator ev(r.rule, args);
  EVal v = ev.eval(e);
  if (auto* bv = std::get_if<bool>(&v)) return *bv;
  if (auto* s = std::get_if<std::string>(&v)) return *s;
  const Number& n = std::get<Number>(v);
  TypePtr t = r.type_of(e);
  if (t && t->kind() == TypeKind::Int && n.is_integer() && n.to_int64()) return *n.to_int64();
  return n.to_double();
}

CheckResult check_rule(const TypedRule& r, std::span<const ConcreteValue* const> args) {
  try {
    Evaluator ev(r.rule, args);
    return {ev.eval_bool(r.rule.body) ? Verdict::Holds : Verdict::Fails, std::nullopt};
  } catch (const EvalError& e) {
    return {Verdict::Errors, e};
  }
}

CheckResult check_rule(const TypedRule& r, const Binding& b) {
  auto args = positional(r.rule, b);
  return check_rule(r, std::span<const ConcreteValue* const>(args));
}

}  // namespace tcfuzz
